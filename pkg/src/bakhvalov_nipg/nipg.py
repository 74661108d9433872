"""NIPG discretization of -eps u'' + b u' + c u = f on (0, 1), u(0) = u(1) = 0.

The bilinear form is B = B1 + B2 + B3 with

    B1(u, v) = sum_e int eps u' v' - eps sum_j {u'}[v] + eps sum_j [u]{v'}
               + sum_j mu_j [u][v]
    B2(u, v) = sum_e int b u' v - sum_{j<N} b(x_j) [u(x_j)] v(x_j+)
    B3(u, v) = sum_e int c u v

with node sums over j = 0..N unless stated, and L(v) = sum_e int f v.
Dirichlet data enter weakly through the boundary jumps.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dgspace import DgFunction, endpoint_values, traces
from .linalg import BlockLU, BlockTridiagonalMatrix
from .orthopoly import gauss_legendre, legendre_table

log = logging.getLogger(__name__)

CHECK_POINTS = 1000


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients of the convection-diffusion problem.

    ``b, c, f, b_prime`` (and ``exact``/``exact_prime`` when given) must
    accept numpy arrays. ``gamma`` defaults to the minimum of
    ``c - b'/2`` on a 1000-point grid. Construction fails if the sampled
    coefficients violate ``b >= alpha > 0`` or ``c - b'/2 >= gamma > 0``.
    """

    epsilon: float
    b: Callable
    c: Callable
    f: Callable
    b_prime: Callable
    alpha: float
    gamma: Optional[float] = None
    exact: Optional[Callable] = None
    exact_prime: Optional[Callable] = None
    name: str = "custom"

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0 + 1e-15:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        x = np.linspace(0.0, 1.0, CHECK_POINTS)
        bx = _sample(self.b, x)
        reaction = _sample(self.c, x) - 0.5 * _sample(self.b_prime, x)
        if self.alpha <= 0 or np.any(bx < self.alpha):
            raise ValueError(f"convection b must satisfy b >= alpha = {self.alpha} > 0 "
                             f"(sampled min {bx.min():.6g})")
        if self.gamma is None:
            object.__setattr__(self, "gamma", float(reaction.min()))
        if self.gamma <= 0 or np.any(reaction < self.gamma):
            raise ValueError(f"c - b'/2 must stay >= gamma = {self.gamma} > 0 "
                             f"(sampled min {reaction.min():.6g})")

    @property
    def has_exact(self):
        return self.exact is not None and self.exact_prime is not None


def _sample(g, x):
    return np.asarray(g(x), dtype=float) * np.ones_like(x)


def layer_test_problem(epsilon):
    """-eps u'' + (3 - x) u' + u = f with exact solution u = x - x exp(-2(1-x)/eps).

    With E = exp(-2(1-x)/eps) the forcing simplifies to
    ``f = 3 + E + 2 x (x - 1) E / eps``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")

    def layer(x):
        return np.exp(-2.0 * (1.0 - np.asarray(x, dtype=float)) / epsilon)

    def u(x):
        x = np.asarray(x, dtype=float)
        return x - x * layer(x)

    def du(x):
        x = np.asarray(x, dtype=float)
        E = layer(x)
        return 1.0 - E - 2.0 * x * E / epsilon

    def f(x):
        x = np.asarray(x, dtype=float)
        E = layer(x)
        return 3.0 + E + 2.0 * x * (x - 1.0) * E / epsilon

    return ProblemSpec(
        epsilon=epsilon,
        b=lambda x: 3.0 - np.asarray(x, dtype=float),
        c=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        f=f,
        b_prime=lambda x: -np.ones_like(np.asarray(x, dtype=float)),
        alpha=2.0,
        gamma=1.5,
        exact=u,
        exact_prime=du,
        name="layer",
    )


@dataclass(frozen=True)
class PenaltySchedule:
    """Nonnegative penalty weights mu(x_j) for j = 0..N."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("penalties must be a finite nonnegative sequence")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def two_level_penalty(N):
    """mu = 1 for j <= N/2 and mu = N^2 for j > N/2."""
    mu = np.ones(N + 1)
    mu[N // 2 + 1 :] = float(N) ** 2
    return PenaltySchedule(mu)


def constant_penalty(N, value):
    return PenaltySchedule(np.full(N + 1, float(value)))


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    matrix: BlockTridiagonalMatrix
    load: np.ndarray
    mesh: object
    degree: int


def _face_block(eps, mu, bval, upwind, a_r, sig_r, T_r, D_r, a_s, sig_s, T_s, D_s):
    """Interface contributions for trial side r and test side s at a batch of nodes.

    Shapes: scalars per node ``(M,)``, traces ``(M, s)``. Returns ``(M, s, s)``
    indexed ``[node, test mode, trial mode]``.
    """
    outer = lambda p, q: p[:, :, None] * q[:, None, :]
    blk = (-eps * a_r * sig_s)[:, None, None] * outer(T_s, D_r)
    blk += (eps * sig_r * a_s)[:, None, None] * outer(D_s, T_r)
    blk += (mu * sig_r * sig_s)[:, None, None] * outer(T_s, T_r)
    blk -= (upwind * bval * sig_r)[:, None, None] * outer(T_s, T_r)
    return blk


def assemble(problem, mesh, k, penalty, quad_order=None):
    """Assemble the NIPG matrix (rows: test functions) and load vector.

    ``quad_order`` is the number of Gauss points per element, default k + 3.
    """
    N = mesh.n_elements
    if len(penalty) != N + 1:
        raise ValueError(f"penalty has {len(penalty)} values, mesh has {N + 1} nodes")
    q = quad_order or k + 3
    if q < k + 1:
        raise ValueError(f"quadrature order {q} < k + 1")
    eps = problem.epsilon
    rule = gauss_legendre(q)
    V, dV = legendre_table(k, rule.nodes)
    h = mesh.widths
    x = mesh.points[:-1, None] + 0.5 * h[:, None] * (rule.nodes + 1.0)
    bx = _sample(problem.b, x) * rule.weights
    cx = _sample(problem.c, x) * rule.weights
    fx = _sample(problem.f, x) * rule.weights

    stiff = (dV.T * rule.weights) @ dV
    diag = (2.0 * eps / h)[:, None, None] * stiff
    diag += np.einsum("eq,qm,qn->emn", bx, V, dV)
    diag += (0.5 * h)[:, None, None] * np.einsum("eq,qm,qn->emn", cx, V, V)
    load = (0.5 * h)[:, None] * (fx @ V)

    lower = np.zeros((N - 1, k + 1, k + 1))
    upper = np.zeros((N - 1, k + 1, k + 1))
    pm1, pp1, dpm1, dpp1 = endpoint_values(k)
    mu = penalty.values
    bnode = _sample(problem.b, mesh.points)

    def side(elements, ref_vals, ref_ders):
        M = len(elements)
        T = np.tile(ref_vals, (M, 1))
        D = (2.0 / h[elements])[:, None] * ref_ders
        return T, D

    # interior nodes j = 1..N-1: left element j-1, right element j
    j = np.arange(1, N)
    if j.size:
        TL, DL = side(j - 1, pp1, dpp1)
        TR, DR = side(j, pm1, dpm1)
        half = np.full(j.size, 0.5)
        plus, minus = np.ones(j.size), -np.ones(j.size)
        e_, mu_, b_ = np.full(j.size, eps), mu[j], bnode[j]
        no, yes = np.zeros(j.size), np.ones(j.size)
        diag[j - 1] += _face_block(e_, mu_, b_, no, half, plus, TL, DL, half, plus, TL, DL)
        diag[j] += _face_block(e_, mu_, b_, yes, half, minus, TR, DR, half, minus, TR, DR)
        upper[j - 1] += _face_block(e_, mu_, b_, no, half, minus, TR, DR, half, plus, TL, DL)
        lower[j - 1] += _face_block(e_, mu_, b_, yes, half, plus, TL, DL, half, minus, TR, DR)

    one = np.ones(1)
    # x_0: only the right trace of element 0, average weight 1, upwind term present
    TR, DR = side([0], pm1, dpm1)
    diag[0] += _face_block(eps * one, mu[0] * one, bnode[0] * one, one,
                           one, -one, TR, DR, one, -one, TR, DR)[0]
    # x_N: only the left trace of element N-1, no upwind term
    TL, DL = side([N - 1], pp1, dpp1)
    diag[N - 1] += _face_block(eps * one, mu[N] * one, bnode[N] * one, 0 * one,
                               one, one, TL, DL, one, one, TL, DL)[0]

    return AssembledSystem(BlockTridiagonalMatrix(diag, lower, upper), load.ravel(), mesh, k)


def check_assumption(problem, mesh):
    """Log a warning when eps > 1/N, outside the regime the layer bounds assume."""
    N = mesh.n_elements
    if problem.epsilon > 1.0 / N:
        log.warning("epsilon=%g exceeds 1/N=%g; layer-adapted estimates do not apply",
                    problem.epsilon, 1.0 / N)
        return False
    return True


def solve_system(system):
    """Solve an assembled system; returns the solution and its factorization.

    A singular pivot block raises ``SingularBlockError`` whose ``block`` is
    the offending element index.
    """
    lu = BlockLU(system.matrix)
    vec = lu.solve(system.load)
    return DgFunction.from_vector(system.mesh, system.degree, vec), lu


def solve_nipg(problem, mesh, k, penalty, quad_order=None):
    """Compute the NIPG approximation u_N of degree ``k`` on ``mesh``."""
    check_assumption(problem, mesh)
    system = assemble(problem, mesh, k, penalty, quad_order)
    u_N, _ = solve_system(system)
    return u_N


def bilinear_form(problem, penalty, u, v, quad_order=None):
    """Evaluate B(u, v) term by term from traces and quadrature.

    Independent of :func:`assemble`; used to cross-check it.
    """
    mesh = u.mesh
    eps = problem.epsilon
    rule = gauss_legendre(quad_order or max(u.degree, v.degree) + 3)
    h = mesh.widths
    x = mesh.points[:-1, None] + 0.5 * h[:, None] * (rule.nodes + 1.0)
    uu, du = u.at_reference(rule.nodes)
    vv, dv = v.at_reference(rule.nodes)
    integrand = eps * du * dv + _sample(problem.b, x) * du * vv + _sample(problem.c, x) * uu * vv
    volume = float(np.sum((integrand @ rule.weights) * 0.5 * h))
    tu, tv = traces(u), traces(v)
    mu = penalty.values
    bnode = _sample(problem.b, mesh.points)
    faces = (-eps * tu.daverage * tv.jump + eps * tu.jump * tv.daverage
             + mu * tu.jump * tv.jump)
    upwind = -bnode[:-1] * tu.jump[:-1] * tv.right[:-1]
    return volume + float(faces.sum()) + float(upwind.sum())


def load_functional(problem, v, quad_order=None):
    """L(v) = int f v by element-wise quadrature."""
    mesh = v.mesh
    rule = gauss_legendre(quad_order or v.degree + 3)
    h = mesh.widths
    x = mesh.points[:-1, None] + 0.5 * h[:, None] * (rule.nodes + 1.0)
    vv, _ = v.at_reference(rule.nodes)
    return float(np.sum(((_sample(problem.f, x) * vv) @ rule.weights) * 0.5 * h))


def exact_form_on_basis(problem, penalty, mesh, k, quad_order):
    """The vector B(u, phi_i) over all basis functions for the exact solution u.

    u is continuous and vanishes at 0 and 1, so all of its jumps are zero and
    the only face term left is ``-eps u'(x_j) [phi_i(x_j)]`` (with the
    boundary convention for {u'} giving u'(x_j) there too).
    """
    if not problem.has_exact:
        raise ValueError("problem has no exact solution")
    eps = problem.epsilon
    rule = gauss_legendre(quad_order)
    V, dV = legendre_table(k, rule.nodes)
    h = mesh.widths
    x = mesh.points[:-1, None] + 0.5 * h[:, None] * (rule.nodes + 1.0)
    ux = _sample(problem.exact, x)
    dux = _sample(problem.exact_prime, x)
    w = rule.weights
    # phi' = (2/h) P', dx = (h/2) dt
    out = eps * ((dux * w) @ dV)
    out += (_sample(problem.b, x) * dux * w) @ V * (0.5 * h)[:, None]
    out += (_sample(problem.c, x) * ux * w) @ V * (0.5 * h)[:, None]
    # nonzero boundary values of u (inhomogeneous user data) also enter the jumps
    u_nodes = _sample(problem.exact, mesh.points)
    du_nodes = _sample(problem.exact_prime, mesh.points)
    pm1, pp1, dpm1, dpp1 = endpoint_values(k)
    mu = penalty.values
    bnode = _sample(problem.b, mesh.points)
    N = mesh.n_elements
    ujump = np.zeros(N + 1)
    ujump[0], ujump[N] = -u_nodes[0], u_nodes[N]
    # [phi] = phi(x_j-) from element j-1 and -phi(x_j+) from element j
    for sign, elems, nodes, T, D in (
        (1.0, np.arange(N), np.arange(1, N + 1), pp1, dpp1),
        (-1.0, np.arange(N), np.arange(0, N), pm1, dpm1),
    ):
        coef = -eps * du_nodes[nodes] * sign + mu[nodes] * ujump[nodes] * sign
        out[elems] += coef[:, None] * T
        # eps [u]{phi'}: average weight 1 at the boundary nodes, 1/2 inside
        weight = np.where((nodes == 0) | (nodes == N), 1.0, 0.5)
        out[elems] += (eps * ujump[nodes] * weight)[:, None] * D * (2.0 / h[elems])[:, None]
        if sign < 0:
            out[elems] -= (bnode[nodes] * ujump[nodes])[:, None] * T
    return out.ravel()
