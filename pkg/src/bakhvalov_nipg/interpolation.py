"""Gauss-Lobatto, Gauss-Radau and composite interpolation into the DG space."""

import enum
from dataclasses import dataclass

import numpy as np

from .dgspace import DgFunction
from .orthopoly import gauss_legendre, gauss_lobatto_nodes, legendre_table, lobatto_to_modal


class Tag(enum.Enum):
    RADAU = "radau"
    LOBATTO = "lobatto"


@dataclass(frozen=True)
class CompositeAssignment:
    """Which operator was used on each element (0-based element indices)."""

    tags: tuple

    def elements(self, tag):
        return [e for e, t in enumerate(self.tags) if t is tag]


def _element_range(mesh, elements):
    if elements is None:
        return np.arange(mesh.n_elements)
    return np.asarray(list(elements), dtype=int)


def lobatto_coefficients(u, mesh, k, elements=None):
    """Modal coefficients of the Lobatto interpolant on the selected elements."""
    els = _element_range(mesh, elements)
    s = gauss_lobatto_nodes(k).nodes
    x = mesh.points[els, None] + 0.5 * mesh.widths[els, None] * (s + 1.0)
    # pin the end nodes to the mesh points so neighbours share them exactly
    x[:, 0] = mesh.points[els]
    x[:, -1] = mesh.points[els + 1]
    values = np.asarray(u(x), dtype=float) * np.ones_like(x)
    return els, values @ lobatto_to_modal(k).T


def radau_coefficients(u, mesh, k, elements=None, quad_order=None):
    """Modal coefficients of the right Gauss-Radau interpolant.

    Coefficients 0..k-1 are the Legendre moments of ``u`` (computed with
    ``quad_order`` Gauss points, default ``k + 6``); coefficient k closes the
    right-endpoint condition using P_m(1) = 1.
    """
    if k < 1:
        raise ValueError("Gauss-Radau interpolation needs k >= 1")
    els = _element_range(mesh, elements)
    rule = gauss_legendre(quad_order or k + 6)
    vals, _ = legendre_table(k - 1, rule.nodes)
    x = mesh.points[els, None] + 0.5 * mesh.widths[els, None] * (rule.nodes + 1.0)
    ux = np.asarray(u(x), dtype=float) * np.ones_like(x)
    m = np.arange(k)
    lower = (ux * rule.weights) @ vals * (2 * m + 1) / 2.0
    right = np.asarray(u(mesh.points[els + 1]), dtype=float) * np.ones(els.size)
    coeffs = np.empty((els.size, k + 1))
    coeffs[:, :k] = lower
    coeffs[:, k] = right - lower.sum(axis=1)
    return els, coeffs


def lobatto_interpolate(u, mesh, k, elements=None):
    """Lagrange interpolation at mapped Gauss-Lobatto points.

    Elements outside ``elements`` (default: all) are left zero.
    """
    c = np.zeros((mesh.n_elements, k + 1))
    els, rows = lobatto_coefficients(u, mesh, k, elements)
    c[els] = rows
    return DgFunction(mesh, k, c)


def radau_interpolate(u, mesh, k, elements=None, quad_order=None):
    """Gauss-Radau interpolation: moments against P_{k-1} plus the right endpoint value.

    Elements outside ``elements`` (default: all) are left zero.
    """
    c = np.zeros((mesh.n_elements, k + 1))
    els, rows = radau_coefficients(u, mesh, k, elements, quad_order)
    c[els] = rows
    return DgFunction(mesh, k, c)


def composite_assignment(mesh):
    """Radau on [0, x_{N/2+1}], Lobatto on [x_{N/2+1}, 1].

    With 0-based elements this is Radau for e <= N/2 and Lobatto above.
    """
    split = mesh.transition_index + 1
    tags = tuple(Tag.RADAU if e < split else Tag.LOBATTO for e in range(mesh.n_elements))
    return CompositeAssignment(tags)


def composite_interpolate(u, mesh, k, quad_order=None):
    """Composite interpolant of ``u`` on a layer mesh and the per-element tags."""
    assignment = composite_assignment(mesh)
    c = np.zeros((mesh.n_elements, k + 1))
    radau = assignment.elements(Tag.RADAU)
    lobatto = assignment.elements(Tag.LOBATTO)
    if radau:
        els, rows = radau_coefficients(u, mesh, k, radau, quad_order)
        c[els] = rows
    if lobatto:
        els, rows = lobatto_coefficients(u, mesh, k, lobatto)
        c[els] = rows
    return DgFunction(mesh, k, c), assignment
