import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bakhvalov_nipg.dgspace import traces
from bakhvalov_nipg.interpolation import (
    Tag,
    composite_assignment,
    composite_interpolate,
    lobatto_interpolate,
    radau_interpolate,
)
from bakhvalov_nipg.mesh import Mesh, MeshConfig, bakhvalov_mesh
from bakhvalov_nipg.nipg import two_level_penalty, layer_test_problem
from bakhvalov_nipg.norms import interpolation_error
from bakhvalov_nipg.orthopoly import gauss_legendre, gauss_lobatto_nodes, legendre_table


def test_lobatto_cubic_example():
    mesh = Mesh(np.array([-1.0, 1.0]))
    f = lobatto_interpolate(lambda x: x**3, mesh, 2)
    np.testing.assert_allclose(f.coeffs, [[0.0, 1.0, 0.0]], atol=1e-15)


def test_radau_square_example():
    mesh = Mesh(np.array([0.0, 1.0]))
    f = radau_interpolate(lambda x: x**2, mesh, 1)
    x = np.array([0.0, 0.5, 1.0])
    np.testing.assert_allclose(f(x), -1 / 3 + 4 / 3 * x, atol=1e-14)


def test_radau_constant():
    mesh = bakhvalov_mesh(MeshConfig(8, 2.0, 2.0, 1e-3))
    f = radau_interpolate(lambda x: np.full_like(x, 4.2), mesh, 3)
    np.testing.assert_allclose(f.coeffs[:, 0], 4.2)
    np.testing.assert_allclose(f.coeffs[:, 1:], 0.0, atol=1e-14)


def test_composite_tags_for_eight_elements():
    mesh = bakhvalov_mesh(MeshConfig(8, 2.0, 2.0, 1e-4))
    a = composite_assignment(mesh)
    assert a.elements(Tag.RADAU) == [0, 1, 2, 3, 4]
    assert a.elements(Tag.LOBATTO) == [5, 6, 7]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_operators_reproduce_polynomials(k, seed):
    rng = np.random.default_rng(seed)
    p = np.polynomial.Polynomial(rng.uniform(-2, 2, k + 1))
    mesh = bakhvalov_mesh(MeshConfig(16, k + 1, 2.0, 1e-5))
    x = np.linspace(0, 1, 301)
    for f in (lobatto_interpolate(p, mesh, k), radau_interpolate(p, mesh, k),
              composite_interpolate(p, mesh, k)[0]):
        np.testing.assert_allclose(f(x), p(x), atol=1e-12)


def _smooth(rng):
    a, b, c = rng.uniform(-2, 2, 3)
    w = rng.uniform(0.5, 6)
    return lambda x: a * np.sin(w * x + b) + c * np.exp(x)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_radau_moment_and_endpoint_conditions(k):
    rng = np.random.default_rng(100 + k)
    mesh = bakhvalov_mesh(MeshConfig(8, k + 1, 2.0, 1e-2))
    rule = gauss_legendre(k + 6)
    V, _ = legendre_table(k - 1, rule.nodes)
    for _ in range(200 // 3 + 1):
        u = _smooth(rng)
        f = radau_interpolate(u, mesh, k)
        x = mesh.points[:-1, None] + 0.5 * mesh.widths[:, None] * (rule.nodes + 1)
        vals, _ = f.at_reference(rule.nodes)
        moments = ((vals - u(x)) * rule.weights) @ V * (0.5 * mesh.widths)[:, None]
        assert np.max(np.abs(moments)) <= 1e-10
        right = traces(f).left[1:]
        np.testing.assert_allclose(right, u(mesh.points[1:]), atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_lobatto_matches_nodes_and_is_continuous(k):
    mesh = bakhvalov_mesh(MeshConfig(16, k + 1, 2.0, 1e-6))
    u = lambda x: np.cos(3 * x) + x
    f = lobatto_interpolate(u, mesh, k)
    s = gauss_lobatto_nodes(k).nodes
    for e in range(mesh.n_elements):
        np.testing.assert_allclose(f.evaluate(e, s), u(mesh.to_physical(e, s)), atol=1e-12)
    np.testing.assert_allclose(traces(f).jump[1:-1], 0.0, atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("eps", [1e-4, 1e-8])
def test_composite_zero_jump(k, eps):
    problem = layer_test_problem(eps)
    for N in [8, 32, 128]:
        mesh = bakhvalov_mesh(MeshConfig(N, k + 1, 2.0, eps))
        pi_u, _ = composite_interpolate(problem.exact, mesh, k)
        tr = traces(pi_u)
        j = N // 2 + 1
        u_j = problem.exact(mesh.points[j])
        jump = (u_j - tr.left[j]) - (u_j - tr.right[j])
        assert abs(jump) <= 1e-12


def _log_slopes(errors):
    e = np.asarray(errors)
    return np.log2(e[:-1] / e[1:])


@pytest.mark.parametrize("k, Ns", [
    (1, [32, 64, 128, 256, 512]),
    (2, [32, 64, 128, 256, 512]),
    # at k=3 the error reaches the round-off floor of the layer function near N=512
    (3, [32, 64, 128, 256]),
])
def test_interpolation_error_rates(k, Ns):
    eps = 1e-6
    problem = layer_test_problem(eps)
    errs = []
    for N in Ns:
        mesh = bakhvalov_mesh(MeshConfig(N, k + 1, 2.0, eps))
        errs.append(interpolation_error(problem, mesh, k, two_level_penalty(N)))
    assert np.all(_log_slopes(errs) >= k - 0.2), errs


@pytest.mark.parametrize("k", [1, 2])
def test_interpolation_max_error_rates(k):
    eps = 1e-6
    problem = layer_test_problem(eps)
    t = np.linspace(-1, 1, 21)
    errs = []
    for N in [32, 64, 128, 256, 512]:
        mesh = bakhvalov_mesh(MeshConfig(N, k + 1, 2.0, eps))
        pi_u, _ = composite_interpolate(problem.exact, mesh, k)
        vals, _ = pi_u.at_reference(t)
        x = mesh.points[:-1, None] + 0.5 * mesh.widths[:, None] * (t + 1)
        errs.append(np.max(np.abs(problem.exact(x) - vals)))
    assert np.all(_log_slopes(errs) >= k + 0.8), errs
