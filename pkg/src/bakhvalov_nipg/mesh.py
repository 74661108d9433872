"""Bakhvalov-type layer-adapted meshes on [0, 1] for a layer at x = 1."""

import csv
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class MeshConfig:
    """Parameters of a Bakhvalov-type mesh.

    Raises ``ValueError`` on an odd or too small ``N``, nonpositive
    parameters, or a transition point below 1/2.
    """

    N: int
    sigma: float
    alpha: float
    epsilon: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 4, got {self.N}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.sigma <= 0 or self.alpha <= 0:
            raise ValueError("sigma and alpha must be positive")
        if self.tau < 0.5:
            raise ValueError(
                f"transition point tau={self.tau:.6g} < 1/2: epsilon={self.epsilon:g} "
                f"is too large for sigma={self.sigma:g}, alpha={self.alpha:g}"
            )

    @property
    def tau(self):
        return 1.0 + self.sigma * self.epsilon / self.alpha * math.log(self.epsilon)


@dataclass(frozen=True, eq=False)
class Mesh:
    """A partition 0 = x_0 < x_1 < ... < x_N = 1 of the unit interval.

    Elements are numbered from 0: element ``e`` is ``[x_e, x_{e+1}]``.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a mesh needs at least two points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("mesh points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_elements(self):
        return self.points.size - 1

    @property
    def widths(self):
        return np.diff(self.points)

    def to_physical(self, e, t):
        """Map reference coordinates ``t`` in [-1, 1] into element ``e``."""
        a, b = self.points[e], self.points[e + 1]
        return a + 0.5 * (b - a) * (np.asarray(t) + 1.0)

    def element_of(self, x):
        """Index of the element containing ``x`` (right-closed at x_N)."""
        e = np.searchsorted(self.points, x, side="right") - 1
        return np.clip(e, 0, self.n_elements - 1)


@dataclass(frozen=True, eq=False)
class LayerMesh(Mesh):
    """Mesh with a uniform coarse part on [0, tau] and a fine part on [tau, 1]."""

    tau: float = field(default=0.5)
    transition_index: int = field(default=-1)

    def __post_init__(self):
        super().__post_init__()
        if self.transition_index < 0:
            object.__setattr__(self, "transition_index", self.n_elements // 2)


def uniform_mesh(N):
    """Uniform mesh with ``N`` elements, typed as a LayerMesh for comparisons."""
    return LayerMesh(np.linspace(0.0, 1.0, N + 1), tau=0.5, transition_index=N // 2)


def generating_function(t, config):
    """The mesh generating function psi on [0, 1]."""
    t = np.asarray(t, dtype=float)
    eps, tau = config.epsilon, config.tau
    scale = config.sigma * eps / config.alpha
    # 1 + 2(1-eps)(t-1) written as log1p(-z) keeps resolution near t = 1
    z = 2.0 * (1.0 - eps) * (1.0 - np.maximum(t, 0.5))
    fine = 1.0 + scale * np.log1p(-z)
    return np.where(t < 0.5, 2.0 * tau * t, fine)


def bakhvalov_mesh(config):
    """Build the mesh ``x_j = psi(j / N)``.

    The transition point x_{N/2} is set to tau exactly and x_N to 1.
    """
    N = config.N
    j = np.arange(N + 1)
    x = generating_function(j / N, config)
    x[: N // 2] = 2.0 * config.tau * j[: N // 2] / N
    x[N // 2] = config.tau
    x[N] = 1.0
    return LayerMesh(x, tau=config.tau, transition_index=N // 2)


@dataclass
class LemmaReport:
    """Outcome of each mesh inequality, keyed by a short name."""

    checks: dict
    details: dict

    @property
    def ok(self):
        return all(self.checks.values())

    def failures(self):
        return [name for name, passed in self.checks.items() if not passed]


def check_mesh_lemma(mesh, config, rtol=1e-12):
    """Evaluate the constant-free width inequalities of a Bakhvalov mesh.

    Checks, with 1-based widths h_j = x_j - x_{j-1}:

    * ``monotone_fine``: h_{N/2+2} >= ... >= h_N
    * ``h_second_fine``: sigma eps / (4 alpha) <= h_{N/2+2} <= sigma eps / alpha
    * ``h_first_fine``: sigma eps / (2 alpha) <= h_{N/2+1} <= (2 sigma / alpha) / N
    * ``coarse_uniform``: 1/N <= h_j <= 2/N for j <= N/2
    * ``transition``: x_{N/2} == tau within 1e-14

    These bounds are only claimed when eps <= 1/N; the report is produced
    regardless and simply records violations. ``rtol`` absorbs round-off in
    the computed widths.
    """
    N = config.N
    eps, sigma, alpha = config.epsilon, config.sigma, config.alpha
    h = np.diff(mesh.points)
    h1 = np.concatenate([[np.nan], h])  # h1[j] = x_j - x_{j-1}, 1-based
    half = N // 2
    lo = 1.0 - rtol
    hi = 1.0 + rtol

    fine = h1[half + 2 :]
    checks = {
        "monotone_fine": bool(np.all(fine[1:] <= fine[:-1] * hi)),
        "h_second_fine": bool(
            sigma * eps / (4 * alpha) * lo <= h1[half + 2] <= sigma * eps / alpha * hi
        ),
        "h_first_fine": bool(
            sigma * eps / (2 * alpha) * lo <= h1[half + 1] <= 2 * sigma / alpha / N * hi
        ),
        "coarse_uniform": bool(
            np.all(h1[1 : half + 1] >= lo / N) and np.all(h1[1 : half + 1] <= 2 * hi / N)
        ),
        "transition": bool(abs(mesh.points[half] - config.tau) <= 1e-14),
    }
    details = {
        "h_first_fine": float(h1[half + 1]),
        "h_second_fine": float(h1[half + 2]),
        "coarse_min": float(np.min(h1[1 : half + 1])),
        "coarse_max": float(np.max(h1[1 : half + 1])),
        "assumption_holds": eps <= 1.0 / N,
    }
    return LemmaReport(checks, details)


def layer_weighted_widths(mesh, config, lam):
    """``h_j^lam * exp(-alpha (1 - x_j) / eps) / (eps / N)^lam`` on the fine part.

    Returns the values for j = N/2+2 .. N (1-based widths). Boundedness of
    this sequence in eps and N is the spot check for the layer estimate.
    """
    N, eps, alpha = config.N, config.epsilon, config.alpha
    x = mesh.points
    j = np.arange(N // 2 + 2, N + 1)
    h = x[j] - x[j - 1]
    weight = np.exp(-alpha * (1.0 - x[j]) / eps)
    return h**lam * weight / (eps / N) ** lam


def write_mesh_csv(mesh, fh):
    """Write columns ``j, x_j, h_j`` (h_0 left empty) to an open text file."""
    writer = csv.writer(fh)
    writer.writerow(["j", "x_j", "h_j"])
    for j, x in enumerate(mesh.points):
        h = "" if j == 0 else repr(float(x - mesh.points[j - 1]))
        writer.writerow([j, repr(float(x)), h])
