"""The NIPG energy norm and the error measures built on it.

    ||v||^2 = eps sum_e ||v'||^2 + gamma sum_e ||v||^2 + sum_j (mu_j + b(x_j)/2) [v(x_j)]^2
"""

from dataclasses import dataclass

import numpy as np

from .dgspace import jump_and_average, traces
from .interpolation import composite_interpolate, lobatto_interpolate
from .orthopoly import gauss_legendre


def default_error_quadrature(k):
    return max(10, 2 * k + 4)


@dataclass(frozen=True)
class ErrorBreakdown:
    """The three squared parts of the NIPG norm and the gamma used."""

    derivative: float
    volume: float
    jump: float
    gamma: float

    @property
    def squared(self):
        return self.derivative + self.volume + self.jump

    @property
    def total(self):
        return float(np.sqrt(self.squared))

    def __float__(self):
        return self.total


def _norm_parts(mesh, values, derivs, jumps, weights, problem, penalty):
    h = mesh.widths
    bnode = np.asarray(problem.b(mesh.points), dtype=float) * np.ones(mesh.points.size)
    derivative = problem.epsilon * float(np.sum((derivs**2 @ weights) * 0.5 * h))
    volume = problem.gamma * float(np.sum((values**2 @ weights) * 0.5 * h))
    jump = float(np.sum((penalty.values + 0.5 * bnode) * jumps**2))
    return ErrorBreakdown(derivative, volume, jump, problem.gamma)


def nipg_norm(v, problem, penalty, quad_order=None):
    """NIPG norm of a DG function, split into its parts."""
    if len(penalty) != v.mesh.n_elements + 1:
        raise ValueError("penalty does not match the mesh")
    rule = gauss_legendre(quad_order or default_error_quadrature(v.degree))
    vals, ders = v.at_reference(rule.nodes)
    return _norm_parts(v.mesh, vals, ders, traces(v).jump, rule.weights, problem, penalty)


def nipg_error(u, du, v, problem, penalty, quad_order=None):
    """NIPG norm of ``u - v`` for an analytic pair ``(u, u')`` and a DG function ``v``.

    The analytic part enters the quadrature directly; jumps use the point
    values of ``u`` at the nodes (zero inside, boundary conventions at 0, 1).
    """
    mesh = v.mesh
    rule = gauss_legendre(quad_order or default_error_quadrature(v.degree))
    x = mesh.points[:-1, None] + 0.5 * mesh.widths[:, None] * (rule.nodes + 1.0)
    vals, ders = v.at_reference(rule.nodes)
    e_vals = np.asarray(u(x), dtype=float) - vals
    e_ders = np.asarray(du(x), dtype=float) - ders
    un = np.asarray(u(mesh.points), dtype=float) * np.ones(mesh.points.size)
    ujump, _ = jump_and_average(un.copy(), un.copy())
    return _norm_parts(mesh, e_vals, e_ders, ujump - traces(v).jump, rule.weights,
                       problem, penalty)


def supercloseness_error(problem, u_N, penalty, quad_order=None):
    """``||L_k u - u_N||`` with the Lobatto interpolant taken on every element."""
    interp = lobatto_interpolate(problem.exact, u_N.mesh, u_N.degree)
    return nipg_norm(interp - u_N, problem, penalty, quad_order).total


def energy_error(problem, u_N, penalty, quad_order=None):
    """``||u - u_N||`` against the exact solution."""
    return nipg_error(problem.exact, problem.exact_prime, u_N, problem, penalty, quad_order).total


def interpolation_error(problem, mesh, k, penalty, quad_order=None):
    """``||u - Pi u||`` for the composite Radau/Lobatto interpolant."""
    pi_u, _ = composite_interpolate(problem.exact, mesh, k)
    return nipg_error(problem.exact, problem.exact_prime, pi_u, problem, penalty, quad_order).total


def composite_supercloseness_error(problem, u_N, penalty, quad_order=None):
    """``||Pi u - u_N||``, reported alongside the Lobatto-based quantity."""
    pi_u, _ = composite_interpolate(problem.exact, u_N.mesh, u_N.degree)
    return nipg_norm(pi_u - u_N, problem, penalty, quad_order).total
