"""Command line entry point ``bfd-heat``."""
from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys

import numpy as np

from .errors import BFDError, ConfigurationError
from .experiments import CASES, ExperimentSpec, emit_artifacts, run_experiment
from .grid import build_grid_1d
from .operator import OPTIMAL_C
from .stability import certify_c
from .symbols import frequencies, order_prediction, spectrum_mismatch, symbols

log = logging.getLogger("bfd_heat")

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2
RUN_KEYS = ("case", "exact", "c", "n", "integrator", "dt", "postprocess", "t_final", "out", "workers")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. Dashes in keys become underscores."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            parser.read_string("[run]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    out = {k.replace("-", "_"): v for k, v in parser["run"].items()}
    unknown = set(out) - set(RUN_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown config keys in {path}: {sorted(unknown)}")
    return out


def _run_settings(args) -> dict:
    settings = read_config(args.config) if args.config else {}
    for key in RUN_KEYS:
        val = getattr(args, key)
        if val is not None:
            settings[key] = val
    if "case" not in settings:
        raise ConfigurationError("--case is required (or 'case' in the config file)")
    return settings


def cmd_run(args) -> int:
    s = _run_settings(args)
    post = s.get("postprocess")
    spec = ExperimentSpec(
        case=s["case"],
        exact_solution=s.get("exact"),
        N_list=_ints(s["n"]) if "n" in s else (),
        c_list=_floats(s["c"]) if "c" in s else ExperimentSpec.__dataclass_fields__["c_list"].default,
        integrator=s.get("integrator"),
        dt=float(s["dt"]) if "dt" in s else None,
        postprocess=post,
        t_final=float(s.get("t_final", 1.0)),
        workers=int(s.get("workers", 1)),
    )
    tables = run_experiment(spec)
    print(f"{'c':>10} {'N':>5} {'h':>10} {'err_l2':>11} {'err_linf':>11} {'err_post':>11}")
    for tab in tables:
        for r in tab.rows:
            print(f"{tab.c:>10.5g} {r.N:>5d} {r.h:>10.4g} {r.err_l2:>11.4e} {r.err_linf:>11.4e} {r.err_post:>11.4e}")
        print(f"{'':>10} fitted rate {tab.fitted_rate:.3f}, post-processed {tab.post_rate:.3f}"
              + ("" if tab.monotone else "  (errors not monotone: fit invalid)"))
    if "out" in s:
        for p in emit_artifacts(tables, s["out"]):
            print(f"wrote {p}")
    return EXIT_OK if all(t.valid_fit or len(t.rows) < 3 for t in tables) else EXIT_FAILED


def cmd_symbol(args) -> int:
    N, c = args.n, args.c
    pred = order_prediction(c)
    print(f"N={N} c={c:.6g}: predicted order {pred.generic_order}, "
          f"low-mode h^4 coefficient {pred.h4_coefficient:.6g}")
    print(f"{'omega':>6} {'nu':>6} {'qhat1':>24} {'qhat2':>24} {'|r1|':>11} {'|r2|':>11}")
    for w in frequencies(N):
        s = symbols(w, N, c, args.length)
        nu = w + N if w < 0 else w - N
        print(f"{w:>6d} {nu:>6d} {s.qhat1.real:>24.15g} {s.qhat2.real:>24.15g} "
              f"{abs(s.r1):>11.4e} {abs(s.r2):>11.4e}")
    return EXIT_OK


def cmd_stability(args) -> int:
    cs = np.linspace(-args.c_max, args.c_max, args.c_grid)
    ok = True
    print(f"{'c':>9} {'det':>10} {'interior':>9} {'truncated':>10} {'theta_1/2':>10} {'theta_3/2':>10} {'pass':>5}")
    for c in cs:
        r = certify_c(float(c))
        ok &= r.passed
        print(f"{c:>9.4f} {r.interior_det:>10.2e} {str(r.interior.inertia):>9} {str(r.truncated.inertia):>10} "
              f"{str(r.half.inertia):>10} {str(r.three_halves.inertia):>10} {str(r.passed):>5}")
    print("inertia triples are (negative, zero, positive) counts")
    print("all certified" if ok else "certification FAILED")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_verify(args) -> int:
    ok = True
    for N in (8, 16, 32):
        grid = build_grid_1d(N, 0.0, 2 * math.pi)
        for c in (0.0, -0.25, OPTIMAL_C, 0.5):
            m = spectrum_mismatch(c, grid)
            good = m <= 1e-9
            ok &= good
            print(f"symbol vs operator N={N:>3} c={c:>8.4f}: mismatch {m:.2e} {'ok' if good else 'FAIL'}")
    for c in np.linspace(-0.97, 0.97, 33):
        r = certify_c(float(c))
        ok &= r.passed
        if not r.passed:
            print(f"energy certificate FAILED at c={c:.4f}")
    print("energy certificates checked on 33 values of c in [-0.97, 0.97]")
    print("verify passed" if ok else "verify FAILED")
    return EXIT_OK if ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bfd-heat", description="Two-point block finite differences for the heat equation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="convergence study on a manufactured solution")
    r.add_argument("--case", choices=sorted(CASES))
    r.add_argument("--exact", help="manufactured solution name")
    r.add_argument("--c", help="comma separated c values")
    r.add_argument("--n", help="comma separated block counts")
    r.add_argument("--integrator", choices=("rk4", "gl6"))
    r.add_argument("--dt", type=float)
    r.add_argument("--postprocess", choices=("none", "spectral", "poly"))
    r.add_argument("--t-final", dest="t_final", type=float)
    r.add_argument("--workers", type=int)
    r.add_argument("--out", help="directory for convergence.csv and SVG plots")
    r.add_argument("--config", help="flat key = value file; flags override it")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("symbol", help="print the symbol pair for every frequency")
    s.add_argument("--n", type=int, default=32)
    s.add_argument("--c", type=float, default=OPTIMAL_C)
    s.add_argument("--length", type=float, default=2 * math.pi)
    s.set_defaults(func=cmd_symbol)

    st = sub.add_parser("stability", help="certify the interface energy forms on a grid of c")
    st.add_argument("--c-grid", dest="c_grid", type=int, default=33)
    st.add_argument("--c-max", dest="c_max", type=float, default=0.97)
    st.set_defaults(func=cmd_stability)

    v = sub.add_parser("verify", help="symbol/operator agreement and energy certificates")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors must not look like an acceptance failure
        return EXIT_ERROR if exc.code == 2 else (exc.code or EXIT_OK)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (BFDError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
