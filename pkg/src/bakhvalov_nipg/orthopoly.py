"""Legendre polynomials, Gauss-Legendre quadrature and Gauss-Lobatto nodes.

Everything here lives on the reference interval [-1, 1]. Rules and node sets
are cached per degree and returned as read-only arrays, so callers can share
them freely.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

NEWTON_TOL = 1e-14
NEWTON_MAXITER = 100


class ConvergenceError(RuntimeError):
    """Newton iteration for a node set did not converge."""


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule with ``order`` points on [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, values):
        """Apply the rule along the last axis of ``values``."""
        return np.asarray(values) @ self.weights


@dataclass(frozen=True)
class LobattoNodes:
    """Gauss-Lobatto points for degree ``degree``: -1, the roots of P_k', and 1."""

    degree: int
    nodes: np.ndarray


def legendre_eval(n, t):
    """Evaluate the Legendre polynomial P_n and its derivative at ``t``.

    Uses the Bonnet recurrence for the values and
    ``P'_{m+1} = P'_{m-1} + (2m+1) P_m`` for the derivatives, which stays
    well defined at the endpoints t = +-1.

    Parameters
    ----------
    n : int
        Degree, n >= 0.
    t : float or array_like
        Evaluation point(s).

    Returns
    -------
    value, derivative
        Same shape as ``t``.
    """
    if n < 0:
        raise ValueError(f"degree must be nonnegative, got {n}")
    t = np.asarray(t, dtype=float)
    p_prev, p = np.zeros_like(t), np.ones_like(t)
    dp_prev, dp = np.zeros_like(t), np.zeros_like(t)
    for m in range(n):
        p_next = ((2 * m + 1) * t * p - m * p_prev) / (m + 1)
        dp_next = dp_prev + (2 * m + 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    if t.ndim == 0:
        return float(p), float(dp)
    return p, dp


def legendre_table(k, t):
    """Values and derivatives of P_0..P_k at points ``t``.

    Returns two arrays of shape ``(len(t), k + 1)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    vals = np.empty((t.size, k + 1))
    ders = np.empty((t.size, k + 1))
    vals[:, 0], ders[:, 0] = 1.0, 0.0
    if k >= 1:
        vals[:, 1], ders[:, 1] = t, 1.0
    for m in range(1, k):
        vals[:, m + 1] = ((2 * m + 1) * t * vals[:, m] - m * vals[:, m - 1]) / (m + 1)
        ders[:, m + 1] = ders[:, m - 1] + (2 * m + 1) * vals[:, m]
    return vals, ders


@lru_cache(maxsize=None)
def gauss_legendre(q):
    """Return the ``q``-point Gauss-Legendre rule.

    Nodes are Newton-refined roots of P_q started from Chebyshev points;
    weights are ``2 / ((1 - t^2) P_q'(t)^2)``.
    """
    if q < 1:
        raise ValueError(f"need at least one quadrature point, got {q}")
    i = np.arange(q)
    t = -np.cos(np.pi * (i + 0.5) / q)
    for _ in range(NEWTON_MAXITER):
        p, dp = legendre_eval(q, t)
        step = p / dp
        t = t - step
        if np.max(np.abs(step)) <= NEWTON_TOL:
            break
    else:
        raise ConvergenceError(f"Gauss-Legendre nodes for q={q} did not converge")
    # symmetrize: removes the last ulp of drift between mirrored nodes
    t = 0.5 * (t - t[::-1])
    if q % 2 == 1:
        t[q // 2] = 0.0
    _, dp = legendre_eval(q, t)
    w = 2.0 / ((1.0 - t**2) * dp**2)
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(nodes=_frozen(t), weights=_frozen(w), order=q)


@lru_cache(maxsize=None)
def gauss_lobatto_nodes(k):
    """Return the k+1 Gauss-Lobatto points for degree ``k``.

    The interior points are the zeros of P_k'. Newton's method is run on
    P_k' with P_k'' taken from the Legendre ODE,
    ``(1 - t^2) P'' = 2 t P' - k (k + 1) P``, starting from the Chebyshev
    extrema.
    """
    if k < 1:
        raise ValueError(f"degree must be >= 1, got {k}")
    nodes = np.empty(k + 1)
    nodes[0], nodes[-1] = -1.0, 1.0
    if k >= 2:
        t = -np.cos(np.pi * np.arange(1, k) / k)
        for _ in range(NEWTON_MAXITER):
            p, dp = legendre_eval(k, t)
            ddp = (2.0 * t * dp - k * (k + 1) * p) / (1.0 - t**2)
            step = dp / ddp
            t = t - step
            if np.max(np.abs(step)) <= NEWTON_TOL:
                break
        else:
            raise ConvergenceError(
                f"Gauss-Lobatto nodes for k={k} did not converge; "
                f"last step {np.max(np.abs(step)):.3e}"
            )
        t = 0.5 * (t - t[::-1])
        if (k - 1) % 2 == 1:
            t[(k - 1) // 2] = 0.0
        nodes[1:-1] = t
    return LobattoNodes(degree=k, nodes=_frozen(nodes))


@lru_cache(maxsize=None)
def lobatto_to_modal(k):
    """Matrix mapping values at the Lobatto points to Legendre coefficients."""
    vals, _ = legendre_table(k, gauss_lobatto_nodes(k).nodes)
    return _frozen(np.linalg.inv(vals))


def lagrange_interpolate(nodes, values, t):
    """Evaluate the Lagrange interpolant through ``(nodes, values)`` at ``t``."""
    nodes = np.asarray(nodes, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    for i, xi in enumerate(nodes):
        others = np.delete(nodes, i)
        basis = np.prod((t[:, None] - others) / (xi - others), axis=1)
        out += values[i] * basis
    return out
