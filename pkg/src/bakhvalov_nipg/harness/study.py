"""Parameter sweeps over (k, eps, N), convergence rates and table output."""

import csv
import io
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from ..linalg import condition_estimate
from ..mesh import LayerMesh, MeshConfig, bakhvalov_mesh
from ..nipg import (
    ProblemSpec,
    assemble,
    constant_penalty,
    two_level_penalty,
    layer_test_problem,
    solve_system,
)
from ..norms import energy_error, interpolation_error, supercloseness_error
from .expr import Expression, differentiate, eval_expr

FLAG_THRESHOLD = 1e12
NORMS = ("supercloseness", "energy", "interp")
# "paper" is the command-line name for the built-in problem and penalty
PROBLEM_ALIASES = {"paper": "layer"}
PENALTY_ALIASES = {"paper": "two-level"}
UNIT_ROUNDOFF = np.finfo(float).eps


@dataclass
class SweepConfig:
    """Everything that defines a sweep; mirrors the JSON config file."""

    k: list = field(default_factory=lambda: [1])
    eps: list = field(default_factory=lambda: [1e-5, 1e-6, 1e-7, 1e-8, 1e-9])
    N: list = field(default_factory=lambda: [8, 16, 32, 64, 128, 256, 512, 1024])
    sigma: Optional[float] = None
    alpha: Optional[float] = None
    penalty: str = "two-level"
    norm: str = "supercloseness"
    problem: str = "layer"
    expressions: dict = field(default_factory=dict)
    quad_assembly: Optional[int] = None
    quad_error: Optional[int] = None
    roundoff_probes: int = 2
    jobs: int = 1

    def validate(self):
        """Raise ``ValueError`` on an unusable configuration."""
        if not self.k or any(int(k) != k or k < 1 for k in self.k):
            raise ValueError(f"k values must be integers >= 1, got {self.k}")
        if not self.N or any(int(n) != n or n < 8 or n % 2 for n in self.N):
            raise ValueError(f"N values must be even integers >= 8, got {self.N}")
        if not self.eps or any(not 0 < e < 1 for e in self.eps):
            raise ValueError(f"eps values must lie in (0, 1), got {self.eps}")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}, got {self.norm!r}")
        self.penalty = PENALTY_ALIASES.get(self.penalty, self.penalty)
        self.problem = PROBLEM_ALIASES.get(self.problem, self.problem)
        parse_penalty(self.penalty)
        if self.problem == "expr":
            missing = {"b", "c", "f"} - set(self.expressions)
            if missing:
                raise ValueError(f"expression problem needs {sorted(missing)}")
            if not {"u", "uprime"} <= set(self.expressions):
                raise ValueError("every error norm needs the exact solution: give u and uprime")
            for e in self.eps:
                build_problem(self, e)
        elif self.problem != "layer":
            raise ValueError(f"unknown problem {self.problem!r}")
        for k in self.k:
            for e in self.eps:
                sigma = self.sigma if self.sigma is not None else k + 1
                alpha = self.alpha if self.alpha is not None else build_problem(self, e).alpha
                for n in self.N:
                    MeshConfig(int(n), sigma, alpha, e)
        return self


def parse_penalty(text):
    """``"two-level"`` or ``"const:<value>"``; returns a factory ``N -> PenaltySchedule``."""
    text = PENALTY_ALIASES.get(text, text)
    if text == "two-level":
        return two_level_penalty
    if text.startswith("const:"):
        value = float(text.split(":", 1)[1])
        if value < 0:
            raise ValueError("penalty must be nonnegative")
        return lambda N: constant_penalty(N, value)
    raise ValueError(f"penalty must be 'two-level' or 'const:<v>', got {text!r}")


def build_problem(config, eps):
    if PROBLEM_ALIASES.get(config.problem, config.problem) == "layer":
        return layer_test_problem(eps)
    ex = config.expressions
    b = Expression(ex["b"], eps)
    bprime_ast = differentiate(b.ast)
    x = np.linspace(0.0, 1.0, 1000)
    alpha = config.alpha if config.alpha is not None else float(np.min(b(x)))
    return ProblemSpec(
        epsilon=eps,
        b=b,
        c=Expression(ex["c"], eps),
        f=Expression(ex["f"], eps),
        b_prime=lambda x: eval_expr(bprime_ast, x, eps),
        alpha=alpha,
        exact=Expression(ex["u"], eps) if "u" in ex else None,
        exact_prime=Expression(ex["uprime"], eps) if "uprime" in ex else None,
        name="expr",
    )


@dataclass
class Cell:
    k: int
    eps: float
    N: int
    error: Optional[float] = None
    rate: Optional[float] = None
    matrix_condition: Optional[float] = None
    roundoff_sensitivity: Optional[float] = None
    failure: Optional[str] = None

    @property
    def condition(self):
        """The larger of the matrix condition estimate and the round-off sensitivity."""
        vals = [v for v in (self.matrix_condition, self.roundoff_sensitivity) if v is not None]
        return max(vals) if vals else None

    @property
    def flagged(self):
        c = self.condition
        return c is not None and c > FLAG_THRESHOLD


def compute_rate(e_N, e_2N, ratio=2.0):
    """Observed order ``ln(e_N / e_2N) / ln(ratio)`` between two refinements."""
    if not (e_N > 0 and e_2N > 0):
        raise ValueError(f"errors must be positive, got {e_N}, {e_2N}")
    return (math.log(e_N) - math.log(e_2N)) / math.log(ratio)


def perturbed_mesh(mesh, seed):
    """Move every interior point by one ulp in a random direction."""
    rng = np.random.default_rng(seed)
    pts = mesh.points.copy()
    inner = pts[1:-1]
    pts[1:-1] = inner + rng.choice([-1.0, 1.0], inner.size) * np.spacing(inner)
    return LayerMesh(pts, tau=mesh.tau, transition_index=mesh.transition_index)


def _measure(config, problem, mesh, k, penalty):
    """Return (error, matrix condition or None) for one mesh."""
    if config.norm == "interp":
        return interpolation_error(problem, mesh, k, penalty, config.quad_error), None
    system = assemble(problem, mesh, k, penalty, config.quad_assembly)
    u_N, lu = solve_system(system)
    if config.norm == "energy":
        err = energy_error(problem, u_N, penalty, config.quad_error)
    else:
        err = supercloseness_error(problem, u_N, penalty, config.quad_error)
    return err, condition_estimate(system.matrix, lu)


def compute_cell(config, k, eps, N):
    """Build the mesh, solve and measure one (k, eps, N) cell.

    Failures are caught and stored on the cell. Besides the matrix
    condition estimate, the error is recomputed on ``roundoff_probes``
    meshes whose points are moved by one ulp; the largest relative change
    divided by the unit roundoff is the cell's round-off sensitivity.
    """
    cell = Cell(k, eps, N)
    try:
        problem = build_problem(config, eps)
        sigma = config.sigma if config.sigma is not None else k + 1
        alpha = config.alpha if config.alpha is not None else problem.alpha
        mesh = bakhvalov_mesh(MeshConfig(N, sigma, alpha, eps))
        penalty = parse_penalty(config.penalty)(N)
        cell.error, cell.matrix_condition = _measure(config, problem, mesh, k, penalty)
        seed = zlib.crc32(f"{k}:{eps!r}:{N}".encode())
        change = 0.0
        for probe in range(config.roundoff_probes):
            err, _ = _measure(config, problem, perturbed_mesh(mesh, seed + probe), k, penalty)
            change = max(change, abs(err - cell.error) / cell.error)
        if config.roundoff_probes:
            cell.roundoff_sensitivity = change / UNIT_ROUNDOFF
    except Exception as err:  # recorded per cell; the sweep goes on
        cell.failure = f"{type(err).__name__}: {err}"
    return cell


def _cell_job(args):
    return compute_cell(*args)


@dataclass
class ConvergenceTable:
    """Cells keyed by ``(k, eps, N)`` with rates filled along increasing N."""

    ks: list
    epsilons: list
    Ns: list
    cells: dict
    meta: dict = field(default_factory=dict)

    def cell(self, k, eps, N):
        return self.cells[(k, eps, N)]

    def fill_rates(self):
        for k in self.ks:
            for eps in self.epsilons:
                for n, n_next in zip(self.Ns, self.Ns[1:] + [None]):
                    c = self.cells[(k, eps, n)]
                    c.rate = None
                    if n_next is None:
                        continue
                    nxt = self.cells[(k, eps, n_next)]
                    if c.error and nxt.error:
                        c.rate = compute_rate(c.error, nxt.error, n_next / n)
        return self

    @property
    def failures(self):
        return [c for c in self.cells.values() if c.failure]


def run_study(config):
    """Run every cell of the sweep and return the filled table.

    Cells are independent; with ``jobs > 1`` they run in a process pool,
    and results are placed by cell index so the output does not depend on
    the degree of parallelism.
    """
    config.validate()
    Ns = sorted(int(n) for n in config.N)
    ks = [int(k) for k in config.k]
    jobs = [(config, k, eps, n) for k in ks for eps in config.eps for n in Ns]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_cell_job, jobs))
    else:
        results = [_cell_job(j) for j in jobs]
    cells = {(c.k, c.eps, c.N): c for c in results}
    meta = {"norm": config.norm, "penalty": config.penalty, "problem": config.problem}
    if config.problem == "layer":
        meta["gamma"] = 1.5
    return ConvergenceTable(ks, list(config.eps), Ns, cells, meta).fill_rates()


def format_sci3(value):
    """Three significant digits with a mantissa in [0.1, 1): 0.0695 -> '0.695E-1'."""
    if value is None or not np.isfinite(value):
        return "--"
    if value == 0:
        return "0.000E0"
    sign = "-" if value < 0 else ""
    value = abs(value)
    exp = math.floor(math.log10(value)) + 1
    mant = round(value / 10.0**exp, 3)
    if mant >= 1.0:
        mant, exp = round(mant / 10.0, 3), exp + 1
    elif mant < 0.1:
        mant, exp = round(mant * 10.0, 3), exp - 1
    return f"{sign}{mant:.3f}E{exp}"


def _eps_label(eps):
    return f"{eps:.0e}".replace("e-0", "e-")


def to_markdown(table):
    """Table layout: one row per N, paired e_N / r_N columns per eps.

    Flagged cells (condition above 1e12) carry a trailing ``*``; failed cells
    show ``fail``.
    """
    out = []
    for k in table.ks:
        out.append(f"k = {k}, norm = {table.meta.get('norm', '?')}")
        out.append("")
        head = ["N"]
        for eps in table.epsilons:
            head += [f"e_N (eps={_eps_label(eps)})", "r_N"]
        out.append("| " + " | ".join(head) + " |")
        out.append("|" + "---|" * len(head))
        for n in table.Ns:
            row = [str(n)]
            for eps in table.epsilons:
                c = table.cells.get((k, eps, n))
                if c is None or c.failure:
                    row += ["fail", "--"]
                    continue
                e = format_sci3(c.error) + ("*" if c.flagged else "")
                r = "--" if c.rate is None else f"{c.rate:.2f}"
                row += [e, r]
            out.append("| " + " | ".join(row) + " |")
        out.append("")
    if any(c.flagged for c in table.cells.values()):
        out.append(f"* condition estimate above {FLAG_THRESHOLD:.0e}: value not reliable")
    return "\n".join(out).rstrip() + "\n"


CSV_COLUMNS = ["k", "eps", "N", "error", "rate", "cond_flag", "error_full",
               "cond_estimate", "matrix_condition", "roundoff_sensitivity", "failure"]


def to_csv(table):
    """CSV with the 3-digit ``error`` plus full-precision columns.

    ``rate`` is written at full precision so it can be recomputed exactly
    from ``error_full``.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    full = lambda v: "" if v is None else repr(float(v))
    for (k, eps, n), c in sorted(table.cells.items()):
        w.writerow([
            k, repr(float(eps)), n,
            "" if c.error is None else format_sci3(c.error),
            full(c.rate),
            int(c.flagged),
            full(c.error),
            full(c.condition),
            full(c.matrix_condition),
            full(c.roundoff_sensitivity),
            c.failure or "",
        ])
    return buf.getvalue()


def emit_table(table, fmt="md"):
    if fmt in ("md", "markdown"):
        return to_markdown(table)
    if fmt == "csv":
        return to_csv(table)
    raise ValueError(f"unknown format {fmt!r}")


SMALL_EPS = [1e-5, 1e-6, 1e-7, 1e-8, 1e-9]
LARGE_EPS = [1e-1, 1e-2, 1e-3, 1e-4]
DEFAULT_N = [8, 16, 32, 64, 128, 256, 512, 1024]

PRESETS = {
    "table1": dict(k=[1], eps=SMALL_EPS),
    "table2": dict(k=[2], eps=SMALL_EPS),
    "table3": dict(k=[3], eps=SMALL_EPS),
    "table4": dict(k=[1], eps=LARGE_EPS),
    "table5": dict(k=[2], eps=LARGE_EPS),
    "table6": dict(k=[3], eps=LARGE_EPS),
}


def preset(name, **overrides):
    """SweepConfig for one of the preset sweeps (sigma = k + 1, alpha = 2)."""
    base = SweepConfig(N=list(DEFAULT_N), alpha=2.0, **PRESETS[name])
    return replace(base, **overrides)


def config_to_dict(config):
    return asdict(config)


def config_from_dict(data):
    known = set(SweepConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return SweepConfig(**data)
