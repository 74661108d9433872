"""Discontinuous piecewise polynomials in a Legendre modal basis.

On element ``e`` a function is ``sum_m coeffs[e, m] * P_m(t)`` where
``t in [-1, 1]`` is the reference coordinate of the affine map onto
``[x_e, x_{e+1}]``. Element indices start at 0.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .orthopoly import gauss_legendre, legendre_table


def endpoint_values(k):
    """P_m(-1), P_m(1), P_m'(-1), P_m'(1) for m = 0..k (reference derivatives)."""
    m = np.arange(k + 1)
    sign = (-1.0) ** m
    d = m * (m + 1) / 2.0
    return sign, np.ones(k + 1), -sign * d, d


@dataclass(frozen=True, eq=False)
class DgFunction:
    """Piecewise polynomial of degree ``degree`` over ``mesh``."""

    mesh: object
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        expected = (self.mesh.n_elements, self.degree + 1)
        if c.shape != expected:
            raise ValueError(f"coefficient table has shape {c.shape}, expected {expected}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, mesh, k):
        return cls(mesh, k, np.zeros((mesh.n_elements, k + 1)))

    @classmethod
    def from_vector(cls, mesh, k, vec):
        return cls(mesh, k, np.asarray(vec, dtype=float).reshape(mesh.n_elements, k + 1))

    @property
    def vector(self):
        return self.coeffs.ravel()

    def _check_element(self, e):
        if not 0 <= e < self.mesh.n_elements:
            raise IndexError(f"element {e} out of range 0..{self.mesh.n_elements - 1}")

    def evaluate(self, e, t):
        """Value on element ``e`` at reference coordinate(s) ``t``."""
        self._check_element(e)
        vals, _ = legendre_table(self.degree, t)
        out = vals @ self.coeffs[e]
        return float(out[0]) if np.ndim(t) == 0 else out

    def derivative_evaluate(self, e, t):
        """Physical derivative on element ``e`` (includes the 2/h factor)."""
        self._check_element(e)
        _, ders = legendre_table(self.degree, t)
        out = ders @ self.coeffs[e] * (2.0 / self.mesh.widths[e])
        return float(out[0]) if np.ndim(t) == 0 else out

    def at_reference(self, t):
        """Values and physical derivatives at reference points ``t`` on all elements.

        Returns two arrays of shape ``(n_elements, len(t))``.
        """
        vals, ders = legendre_table(self.degree, t)
        v = self.coeffs @ vals.T
        dv = (self.coeffs @ ders.T) * (2.0 / self.mesh.widths)[:, None]
        return v, dv

    def __call__(self, x):
        """Evaluate at physical points; nodes take the value from the right."""
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        e = self.mesh.element_of(flat)
        t = 2.0 * (flat - self.mesh.points[e]) / self.mesh.widths[e] - 1.0
        vals, _ = legendre_table(self.degree, t)
        out = np.einsum("ij,ij->i", vals, self.coeffs[e])
        return out.reshape(x.shape) if x.ndim else out

    def __add__(self, other):
        return DgFunction(self.mesh, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return DgFunction(self.mesh, self.degree, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return DgFunction(self.mesh, self.degree, self.coeffs * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class TraceValues:
    """One-sided limits, jumps and averages at the nodes x_0..x_N.

    ``left[0]`` and ``right[N]`` lie outside the domain and are stored as 0.
    Jumps and averages follow the boundary conventions
    ``[v(x_0)] = -v(x_0+)``, ``{v(x_0)} = v(x_0+)``,
    ``[v(x_N)] = v(x_N-)``, ``{v(x_N)} = v(x_N-)``.
    """

    left: np.ndarray
    right: np.ndarray
    jump: np.ndarray
    average: np.ndarray
    dleft: np.ndarray
    dright: np.ndarray
    djump: np.ndarray
    daverage: np.ndarray


def jump_and_average(left, right):
    """Apply the jump/average definitions including the boundary conventions."""
    jump = left - right
    avg = 0.5 * (left + right)
    avg[0] = right[0]
    avg[-1] = left[-1]
    jump[0] = -right[0]
    jump[-1] = left[-1]
    return jump, avg


def traces(f):
    """Collect the node traces of ``f`` and of its derivative."""
    k = f.degree
    pm1, pp1, dpm1, dpp1 = endpoint_values(k)
    scale = 2.0 / f.mesh.widths
    n = f.mesh.n_elements
    left = np.zeros(n + 1)
    right = np.zeros(n + 1)
    dleft = np.zeros(n + 1)
    dright = np.zeros(n + 1)
    left[1:] = f.coeffs @ pp1
    right[:-1] = f.coeffs @ pm1
    dleft[1:] = (f.coeffs @ dpp1) * scale
    dright[:-1] = (f.coeffs @ dpm1) * scale
    jump, avg = jump_and_average(left, right)
    djump, davg = jump_and_average(dleft, dright)
    return TraceValues(left, right, jump, avg, dleft, dright, djump, davg)


def project_function(g, mesh, k, quad_order=None):
    """Element-wise L2 projection of a vectorized callable ``g`` onto degree ``k``.

    ``quad_order`` defaults to ``k + 6`` Gauss points per element.
    """
    rule = gauss_legendre(quad_order or k + 6)
    vals, _ = legendre_table(k, rule.nodes)
    x = mesh.points[:-1, None] + 0.5 * mesh.widths[:, None] * (rule.nodes + 1.0)
    gx = np.asarray(g(x), dtype=float) * np.ones_like(x)
    moments = (gx * rule.weights) @ vals
    m = np.arange(k + 1)
    return DgFunction(mesh, k, moments * (2 * m + 1) / 2.0)


def write_samples_csv(f, fh, per_element=5):
    """Dump ``(x, value)`` at ``per_element`` uniform points inside every element."""
    t = np.linspace(-1.0, 1.0, per_element)
    v, _ = f.at_reference(t)
    writer = csv.writer(fh)
    writer.writerow(["x", "value"])
    for e in range(f.mesh.n_elements):
        for ti, vi in zip(f.mesh.to_physical(e, t), v[e]):
            writer.writerow([repr(float(ti)), repr(float(vi))])
