"""Convergence studies on manufactured solutions and their CSV/SVG artifacts."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .grid import BlockGrid2D, GridFunction, build_grid_1d, build_grid_2d, norm, project
from .integrators import IntegratorConfig, integrate, rk4_default_dt, rk4_stable_dt
from .manufactured import get_problem
from .operator import OPTIMAL_C, assemble_1d, assemble_2d
from .postprocess import POLY, SPECTRAL, FilterSpec, apply_filter

CASES = {
    "periodic_1d": dict(exact="expcos_2pix_t", N=(16, 32, 64, 96), integrator="gl6", post="spectral"),
    "dirichlet_1d": dict(exact="expcos_x_t", N=(24, 36, 48, 72, 84), integrator="rk4", post="poly"),
    "periodic_2d": dict(exact="expcos_2pixy_t", N=(50, 60, 70, 80), integrator="rk4", post="spectral"),
    "dirichlet_2d": dict(exact="expcos_xy_t", N=(24, 36, 48, 60), integrator="rk4", post="poly"),
}
DEFAULT_C = (0.0, -0.25, OPTIMAL_C)
FILTERS = {"none": None, "spectral": SPECTRAL, "poly": POLY}
CSV_COLUMNS = ("case", "c", "N", "h", "err_l2", "err_linf", "err_post", "rate")


@dataclass(frozen=True)
class ExperimentSpec:
    case: str
    exact_solution: str | None = None
    N_list: tuple = ()
    c_list: tuple = DEFAULT_C
    integrator: str | None = None
    dt: float | None = None
    postprocess: str | None = None
    t_final: float = 1.0
    dt_check: bool | None = None
    workers: int = 1

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigurationError(f"unknown case {self.case!r}; known: {sorted(CASES)}")
        d = CASES[self.case]
        fill = {
            "exact_solution": self.exact_solution or d["exact"],
            "N_list": tuple(int(n) for n in (self.N_list or d["N"])),
            "c_list": tuple(float(c) for c in self.c_list),
            "integrator": (self.integrator or d["integrator"]).lower(),
            "postprocess": self.postprocess if self.postprocess is not None else d["post"],
        }
        for k, v in fill.items():
            object.__setattr__(self, k, v)
        if any(n < 3 for n in self.N_list):
            raise ConfigurationError("all N must be at least 3")
        if self.postprocess not in FILTERS:
            raise ConfigurationError(f"unknown postprocess {self.postprocess!r}")
        if self.integrator not in ("rk4", "gl6"):
            raise ConfigurationError(f"unknown integrator {self.integrator!r}")
        prob = get_problem(self.exact_solution)
        if (prob.dim == 2) != self.case.endswith("2d") or prob.bc != self.case.split("_")[0]:
            raise ConfigurationError(f"exact solution {prob.name} does not fit case {self.case}")
        if not self.t_final > 0:
            raise ConfigurationError("t_final must be positive")

    @property
    def filter(self) -> FilterSpec | None:
        return FILTERS[self.postprocess]


@dataclass(frozen=True)
class Row:
    N: int
    h: float
    err_l2: float
    err_linf: float
    err_post: float
    dt: float = math.nan


@dataclass
class ConvergenceTable:
    case: str
    c: float
    rows: list = field(default_factory=list)

    def _sorted(self):
        return sorted(self.rows, key=lambda r: r.N)

    @property
    def fitted_rate(self) -> float:
        rows = self._sorted()
        if len(rows) < 2:
            return math.nan
        return fit_rate([r.h for r in rows], [r.err_l2 for r in rows])

    @property
    def post_rate(self) -> float:
        rows = [r for r in self._sorted() if math.isfinite(r.err_post)]
        if len(rows) < 2:
            return math.nan
        return fit_rate([r.h for r in rows], [r.err_post for r in rows])

    @property
    def pair_rates(self) -> list[float]:
        rows = self._sorted()
        return [math.log(a.err_l2 / b.err_l2) / math.log(a.h / b.h) for a, b in zip(rows, rows[1:])]

    @property
    def monotone(self) -> bool:
        errs = [r.err_l2 for r in self._sorted()]
        return all(b < a for a, b in zip(errs, errs[1:]))

    @property
    def valid_fit(self) -> bool:
        return len(self.rows) >= 3 and self.monotone


def fit_rate(hs, errors) -> float:
    """Least-squares slope of ``log10(error)`` against ``log10(h)``."""
    hs, errors = np.asarray(hs, float), np.asarray(errors, float)
    if hs.size < 2 or hs.size != errors.size:
        raise ValueError("need at least two (h, error) pairs")
    if np.any(errors <= 0) or np.any(hs <= 0):
        raise ValueError("errors and h must be positive")
    return float(np.polyfit(np.log10(hs), np.log10(errors), 1)[0])


def _setup(spec: ExperimentSpec, c: float, N: int):
    prob = get_problem(spec.exact_solution)
    bc = prob.bc
    if prob.dim == 1:
        (a, b), = prob.domain
        grid = build_grid_1d(N, a, b)
        op = assemble_1d(c, grid, bc, prob.boundary_data() if bc == "dirichlet" else None)
        h, dim = grid.h, 1
    else:
        (ax, bx), (ay, by) = prob.domain
        grid = build_grid_2d(N, N, ax, bx, ay, by)
        bds = prob.boundary_data() if bc == "dirichlet" else (None, None)
        op = assemble_2d(c, grid, bc, *bds)
        h, dim = grid.gx.h, 2
    return prob, grid, op, h, dim


def _solve(spec, prob, grid, op, dt):
    u_exact, F = prob.u(), prob.forcing()
    if isinstance(grid, BlockGrid2D):
        X, Y = grid.mesh()
        pts = (X.ravel(), Y.ravel())
    else:
        pts = (grid.nodes,)

    def source(t):
        return op.source(t) + F(*pts, np.asarray(t, dtype=float)[..., None])

    u0 = u_exact(*pts, 0.0)
    cfg = IntegratorConfig(spec.integrator, dt, spec.t_final, growth_limit=10.0)
    u = integrate(op, np.array(u0, dtype=float), cfg, source)
    return GridFunction(grid, u), GridFunction(grid, np.asarray(u_exact(*pts, spec.t_final), dtype=float))


def default_dt(spec: ExperimentSpec, c: float, h: float, dim: int) -> float:
    """GL6: ``h``. RK4: the stability limit when periodic, the conservative step with walls.

    Time-dependent wall data drives the stiff modes, where RK4 loses order, so
    Dirichlet runs need the small step; periodic runs do not.
    """
    if spec.integrator == "gl6":
        return h if spec.dt is None else spec.dt
    periodic = spec.case.startswith("periodic")
    base = rk4_stable_dt(c, h, dim) if periodic else rk4_default_dt(c, h)
    return base if spec.dt is None else min(base, spec.dt)


def uses_dt_check(spec: ExperimentSpec) -> bool:
    """Refine dt by halving unless disabled; on by default except for Dirichlet RK4 (small step already)."""
    if spec.dt_check is not None:
        return spec.dt_check
    return spec.integrator == "gl6" or spec.case.startswith("periodic")


def run_single(spec: ExperimentSpec, c: float, N: int) -> Row:
    """One grid: integrate, then measure raw and filtered errors at ``t_final``.

    With ``dt_check`` the step is halved until halving changes the error by at
    most 10 percent.
    """
    prob, grid, op, h, dim = _setup(spec, c, N)
    dt = default_dt(spec, c, h, dim)
    check = uses_dt_check(spec)
    num, exact = _solve(spec, prob, grid, op, dt)
    err = norm(GridFunction(grid, exact.values - num.values))
    if check:
        for _ in range(8):
            num2, _ = _solve(spec, prob, grid, op, dt / 2)
            err2 = norm(GridFunction(grid, exact.values - num2.values))
            done = abs(err - err2) <= 0.1 * err2
            num, err, dt = num2, err2, dt / 2
            if done:
                break
    E = GridFunction(grid, exact.values - num.values)
    post = math.nan
    if spec.filter is not None:
        post = norm(GridFunction(grid, exact.values - apply_filter(num, spec.filter).values))
    return Row(N, h, norm(E), norm(E, "Linf"), post, dt)


def _run_job(args):
    spec, c, N = args
    return c, run_single(spec, c, N)


def run_experiment(spec: ExperimentSpec) -> list[ConvergenceTable]:
    jobs = [(spec, c, N) for c in spec.c_list for N in spec.N_list]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    tables = {c: ConvergenceTable(spec.case, c) for c in spec.c_list}
    for c, row in results:
        tables[c].rows.append(row)
    for tab in tables.values():
        tab.rows.sort(key=lambda r: r.N)
    return [tables[c] for c in spec.c_list]


def _fmt(v: float) -> str:
    return "nan" if not math.isfinite(v) else repr(float(v))


def tables_to_csv(tables) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for tab in sorted(tables, key=lambda t: (t.case, t.c)):
        rate = tab.fitted_rate
        for r in sorted(tab.rows, key=lambda r: r.N):
            w.writerow([tab.case, _fmt(tab.c), r.N, _fmt(r.h), _fmt(r.err_l2), _fmt(r.err_linf),
                        _fmt(r.err_post), _fmt(rate)])
    return buf.getvalue()


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def tables_to_svg(tables, title: str = "") -> str:
    """Log-log chart of error against h, one polyline per table."""
    W, H, m = 480, 360, 60
    pts = [(math.log10(r.h), math.log10(v)) for t in tables for r in t.rows
           for v in (r.err_l2, r.err_post) if math.isfinite(v) and v > 0]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1 = min(xs), max(xs) if max(xs) > min(xs) else min(xs) + 1
    y0, y1 = min(ys), max(ys) if max(ys) > min(ys) else min(ys) + 1

    def sx(v):
        return m + (v - x0) / (x1 - x0) * (W - 2 * m)

    def sy(v):
        return H - m - (v - y0) / (y1 - y0) * (H - 2 * m)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<line x1="{m}" y1="{H - m}" x2="{W - m}" y2="{H - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{H - m}" stroke="black"/>',
           f'<text x="{W / 2:.1f}" y="{H - 15}" text-anchor="middle" font-size="13">log10 h</text>',
           f'<text x="18" y="{H / 2:.1f}" text-anchor="middle" font-size="13" '
           f'transform="rotate(-90 18 {H / 2:.1f})">log10 error</text>',
           f'<text x="{W / 2:.1f}" y="25" text-anchor="middle" font-size="14">{title}</text>',
           f'<text x="{m}" y="{H - m + 18}" font-size="11">{x0:.2f}</text>',
           f'<text x="{W - m}" y="{H - m + 18}" text-anchor="end" font-size="11">{x1:.2f}</text>',
           f'<text x="{m - 5}" y="{H - m}" text-anchor="end" font-size="11">{y0:.1f}</text>',
           f'<text x="{m - 5}" y="{m + 4}" text-anchor="end" font-size="11">{y1:.1f}</text>']
    for i, tab in enumerate(sorted(tables, key=lambda t: t.c)):
        color = _COLORS[i % len(_COLORS)]
        for key, dash in (("err_l2", ""), ("err_post", ' stroke-dasharray="5,3"')):
            seq = [(math.log10(r.h), math.log10(getattr(r, key))) for r in sorted(tab.rows, key=lambda r: r.N)
                   if math.isfinite(getattr(r, key)) and getattr(r, key) > 0]
            if len(seq) < 2:
                continue
            line = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in seq)
            out.append(f'<polyline points="{line}" fill="none" stroke="{color}"{dash}/>')
        label = f"c={tab.c:.4g} rate={tab.fitted_rate:.2f}"
        out.append(f'<text x="{W - m - 150}" y="{m + 15 * (i + 1)}" font-size="11" fill="{color}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_artifacts(tables, path) -> list[Path]:
    """Write ``convergence.csv`` plus one ``<case>.svg`` per case into ``path``."""
    path = Path(path)
    written = []
    try:
        path.mkdir(parents=True, exist_ok=True)
        csv_path = path / "convergence.csv"
        csv_path.write_text(tables_to_csv(tables))
        written.append(csv_path)
        for case in sorted({t.case for t in tables}):
            svg = path / f"{case}.svg"
            svg.write_text(tables_to_svg([t for t in tables if t.case == case], case))
            written.append(svg)
    except OSError as exc:
        raise OSError(f"cannot write artifacts under {path}: {exc}") from exc
    return written


def with_overrides(spec: ExperimentSpec, **kw) -> ExperimentSpec:
    return replace(spec, **{k: v for k, v in kw.items() if v is not None})
