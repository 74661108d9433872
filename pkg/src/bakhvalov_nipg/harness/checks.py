"""Quick property suites behind the ``check`` subcommand.

Each check returns ``(name, ok, detail)``. They are small versions of the
test-suite properties, meant as a smoke test of an installation.
"""

import numpy as np

from ..dgspace import DgFunction
from ..interpolation import composite_interpolate, lobatto_interpolate, radau_interpolate
from ..linalg import BlockTridiagonalMatrix, block_lu_solve, dense_solve
from ..mesh import MeshConfig, bakhvalov_mesh, check_mesh_lemma
from ..nipg import assemble, bilinear_form, two_level_penalty, layer_test_problem
from ..norms import nipg_norm
from ..orthopoly import gauss_legendre, gauss_lobatto_nodes

GRID_EPS = [1e-5, 1e-6, 1e-7, 1e-8, 1e-9]
GRID_N = [8, 16, 32, 64, 128, 256, 512, 1024]


def check_quadrature():
    worst = 0.0
    for q in range(1, 12):
        rule = gauss_legendre(q)
        for m in range(2 * q):
            exact = 2.0 / (m + 1) if m % 2 == 0 else 0.0
            worst = max(worst, abs(rule.integrate(rule.nodes**m) - exact))
    lob = gauss_lobatto_nodes(4).nodes
    ok = worst < 1e-13 and abs(lob[1] + np.sqrt(3.0 / 7.0)) < 1e-14
    return "quadrature exactness", ok, f"max error {worst:.1e}"


def check_mesh(sigma=2.0, alpha=2.0):
    bad = []
    for eps in GRID_EPS:
        for N in GRID_N:
            cfg = MeshConfig(N, sigma, alpha, eps)
            mesh = bakhvalov_mesh(cfg)
            report = check_mesh_lemma(mesh, cfg)
            if not report.ok or abs(mesh.points[N // 2] - cfg.tau) > 1e-14:
                bad.append((eps, N))
    return "mesh lemma", not bad, f"{len(GRID_EPS) * len(GRID_N)} meshes, failures {bad}"


def check_block_solver(rng, trials=20):
    worst = 0.0
    for _ in range(trials):
        n, s = int(rng.integers(2, 17)), int(rng.integers(1, 5))
        lower = rng.standard_normal((n - 1, s, s))
        upper = rng.standard_normal((n - 1, s, s))
        diag = rng.standard_normal((n, s, s))
        diag += np.eye(s) * (2.0 * s * 3 + 1.0)
        A = BlockTridiagonalMatrix(diag, lower, upper)
        rhs = rng.standard_normal(n * s)
        x = block_lu_solve(A, rhs)
        ref = dense_solve(A.to_dense(), rhs)
        worst = max(worst, np.linalg.norm(x - ref) / np.linalg.norm(ref))
    return "block solver vs dense", worst < 1e-10, f"max relative difference {worst:.1e}"


def check_interpolants(rng, trials=10):
    worst = 0.0
    mesh = bakhvalov_mesh(MeshConfig(16, 3.0, 2.0, 1e-4))
    for _ in range(trials):
        k = int(rng.integers(1, 4))
        coef = rng.standard_normal(k + 1)
        p = np.polynomial.Polynomial(coef)
        x = np.linspace(0.0, 1.0, 97)[1:-1]
        for op in (lobatto_interpolate, radau_interpolate):
            worst = max(worst, np.max(np.abs(op(p, mesh, k)(x) - p(x))))
    return "Radau/Lobatto reproduce polynomials", worst < 1e-12, f"max error {worst:.1e}"


def check_coercivity(rng, trials=20):
    worst = np.inf
    for k in (1, 2):
        for eps in (1e-4, 1e-6):
            problem = layer_test_problem(eps)
            mesh = bakhvalov_mesh(MeshConfig(16, k + 1, 2.0, eps))
            penalty = two_level_penalty(16)
            for _ in range(trials):
                v = DgFunction(mesh, k, rng.standard_normal((16, k + 1)))
                ratio = bilinear_form(problem, penalty, v, v) / nipg_norm(v, problem, penalty).squared
                worst = min(worst, ratio)
    return "coercivity B(v,v) >= |||v|||^2", worst >= 1 - 1e-10, f"min ratio {worst:.6f}"


def check_assembly(rng):
    k, N, eps = 2, 8, 1e-3
    problem = layer_test_problem(eps)
    mesh = bakhvalov_mesh(MeshConfig(N, k + 1, 2.0, eps))
    penalty = two_level_penalty(N)
    A = assemble(problem, mesh, k, penalty).matrix
    u = DgFunction(mesh, k, rng.standard_normal((N, k + 1)))
    v = DgFunction(mesh, k, rng.standard_normal((N, k + 1)))
    lhs = v.vector @ (A @ u.vector)
    rhs = bilinear_form(problem, penalty, u, v)
    rel = abs(lhs - rhs) / abs(rhs)
    return "assembled matrix matches B(u, v)", rel < 1e-11, f"relative difference {rel:.1e}"


def check_zero_jump():
    worst = 0.0
    for k in (1, 2, 3):
        problem = layer_test_problem(1e-6)
        mesh = bakhvalov_mesh(MeshConfig(32, k + 1, 2.0, 1e-6))
        pi_u, _ = composite_interpolate(problem.exact, mesh, k)
        j = mesh.n_elements // 2 + 1
        left = pi_u.evaluate(j - 1, 1.0)
        right = pi_u.evaluate(j, -1.0)
        u_j = problem.exact(mesh.points[j])
        worst = max(worst, abs((u_j - left) - (u_j - right)))
    return "interpolant jump at x_{N/2+1}", worst <= 1e-12, f"max jump {worst:.1e}"


def run_checks(seed=0):
    rng = np.random.default_rng(seed)
    return [
        check_quadrature(),
        check_mesh(),
        check_block_solver(rng),
        check_interpolants(rng),
        check_coercivity(rng),
        check_assembly(rng),
        check_zero_jump(),
    ]
