"""Command-line front end: ``patrec {surface,envelope,simulate,verify}``.

Data files carry no timestamps; each gets a ``<out>.meta.json`` sidecar with
the arguments, seed, versions and wall-clock times. Exit codes: 0 success,
1 verification failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import binary_region as br
from . import gaussian_region as gr
from . import lemma_lab
from .envelope import check_simplification, product_field, ray_envelope, two_point_envelope
from .errors import DegenerateInputError
from .surface import GridSpec, SurfaceGrid

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_FAIL", "EXIT_USAGE", "EXIT_IO"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "PATREC_SEED"


class UsageError(Exception):
    pass


class _Help(argparse.HelpFormatter):
    """Append ``(default: X)`` unless the default is ``None`` or already described."""

    def _get_help_string(self, action):
        text = action.help or ""
        if action.default in (None, argparse.SUPPRESS) or "default" in text or action.required:
            return text
        return f"{text} (default: %(default)s)"


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kw):
        kw.setdefault("allow_abbrev", False)
        kw.setdefault("formatter_class", _Help)
        super().__init__(*args, **kw)


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _common(p: argparse.ArgumentParser, out_required: bool = True):
    p.add_argument("--out", required=out_required, default=None, help="output file path")
    p.add_argument("--seed", type=int, default=None, help=f"integer seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--threads", type=_positive_int, default=1, help="cap on worker threads (>= 1)")


def _grid_args(p: argparse.ArgumentParser):
    p.add_argument("--nx", type=_positive_int, default=41, help="grid points along r_x (>= 1)")
    p.add_argument("--ny", type=_positive_int, default=41, help="grid points along r_y (>= 1)")
    p.add_argument("--x-max", type=float, default=None,
                   help="largest r_x; binary default 1 (domain [0,1]), gaussian default 3")
    p.add_argument("--y-max", type=float, default=None, help="largest r_y; same defaults as --x-max")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="patrec", description="Rate-region surfaces and envelopes, scheme simulation, identity checks.")
    parser.add_argument("--version", action="version", version=f"patrec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("surface", help="sample a rate-region surface to CSV r_x,r_y,z")
    s.add_argument("--case", choices=("binary", "gaussian"), required=True, help="source model")
    s.add_argument("--which", default=None,
                   help=f"binary: one of {br.SURFACES} (default g); gaussian: one of {gr.SURFACES} (default G)")
    s.add_argument("--q", type=float, default=0.2, help="binary channel crossover in [0, 1/2]")
    s.add_argument("--rho-xy", type=float, default=0.8, help="gaussian correlation in (0, 1)")
    s.add_argument("--envelope-max", type=float, default=None,
                   help="gaussian hull_gap: square side on which the hull is taken (default grid extent)")
    _grid_args(s)
    _common(s)

    e = sub.add_parser("envelope", help="upper concave envelope of a surface")
    e.add_argument("--case", choices=("binary", "gaussian", "product"), required=True,
                   help="binary g, gaussian G, or the separable product test field")
    e.add_argument("--method", choices=("ray", "two_point", "compare"), default="ray",
                   help="ray or two_point writes a CSV; compare writes a JSON report and exits 1 on mismatch")
    e.add_argument("--q", type=float, default=0.2, help="binary channel crossover in [0, 1/2]")
    e.add_argument("--rho-xy", type=float, default=0.8, help="gaussian correlation in (0, 1)")
    e.add_argument("--domain", type=float, default=3.0, help="gaussian domain side (> 0, at most 8)")
    e.add_argument("--n", type=_positive_int, default=21, help="grid points per axis")
    e.add_argument("--tol", type=float, default=1e-6, help="compare: largest allowed gap (> 0)")
    _common(e)

    m = sub.add_parser("simulate", help="Monte Carlo sweep of the binary recognition scheme")
    m.add_argument("--q", type=float, default=0.2, help="observation crossover in [0, 1/2]")
    m.add_argument("--r-x", type=float, default=0.8, help="pattern compression rate in [0, 1]")
    m.add_argument("--r-y", type=float, default=0.8, help="observation compression rate in [0, 1]")
    m.add_argument("--r-c", type=float, default=0.1, help="pattern rate (>= 0, n*r_c <= 24)")
    m.add_argument("--n", type=_int_list, default=[8, 12, 16, 20], help="comma-separated block lengths in 4..24")
    m.add_argument("--trials", type=_positive_int, default=2000, help="trials per block length")
    m.add_argument("--delta", type=float, default=None,
                   help="typicality slack in (0, 1/2); default 0.1 for n <= 12, else 0.05")
    m.add_argument("--csv", default=None, help="sweep CSV n,pe_hat,ci95 (default: --out with .csv suffix)")
    _common(m)

    v = sub.add_parser("verify", help="brute-force lemma checks; exit 1 if any fails")
    v.add_argument("--suite", action="append", default=None,
                   help=f"suite name, repeatable; one of {sorted(lemma_lab.SUITES)} (default all)")
    v.add_argument("--cases", type=int, default=None, help="cases per suite (>= 1; default per suite)")
    _common(v, out_required=False)
    return parser


def _write(path, text: str):
    Path(path).write_text(text)


def _write_meta(out, args, seed: int, started: float, extra: dict | None = None):
    meta = {
        "command": args.command,
        "args": {k: v for k, v in sorted(vars(args).items()) if k != "command"},
        "seed": seed,
        "patrec": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
        "elapsed_s": round(time.time() - started, 3),
    }
    if extra:
        meta.update(extra)
    _write(f"{out}.meta.json", json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")


def _say(msg: str):
    print(msg, file=sys.stderr)


def _surface(args, seed, started) -> int:
    if args.case == "binary":
        which = args.which or "g"
        grid = GridSpec(args.nx, args.ny, args.x_max or 1.0, args.y_max or 1.0)
        surf = br.surface(br.BinaryEnv(args.q), grid, which)
    else:
        which = args.which or "G"
        grid = GridSpec(args.nx, args.ny, args.x_max or 3.0, args.y_max or 3.0)
        surf = gr.surface(args.rho_xy, grid, which, envelope_max=args.envelope_max)
    surf.to_csv(args.out)
    rx, ry, z = surf.argmax()
    _say(f"{args.case} {which}: {surf.z.size} rows, max {z:.6g} at r_x={rx:.6g} r_y={ry:.6g}")
    _write_meta(args.out, args, seed, started, {"surface_meta": surf.meta})
    return EXIT_OK


def _envelope_field(args):
    if args.case == "binary":
        return br.BinaryEnv(args.q).field()
    if args.case == "gaussian":
        if not 0.0 < args.domain <= gr.R_MAX:
            raise ValueError(f"--domain must lie in (0, {gr.R_MAX}]")
        return gr.inner_field(args.rho_xy, args.domain)
    return product_field()


def _envelope(args, seed, started) -> int:
    field = _envelope_field(args)
    grid = GridSpec(args.n, args.n, field.x_max, field.y_max)
    if args.method == "compare":
        if not args.tol > 0:
            raise ValueError("--tol must be positive")
        report = check_simplification(field, grid, tol=args.tol, seed=seed)
        _write(args.out, report.to_json() + "\n")
        _say(f"{report.field_name}: max gap {report.max_gap:.3g} ({'PASS' if report.passed else 'FAIL'})")
        _write_meta(args.out, args, seed, started)
        return EXIT_OK if report.passed else EXIT_FAIL
    gx, gy = grid.mesh()
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    fn = ray_envelope if args.method == "ray" else two_point_envelope
    z = np.asarray(fn(field, pts)).reshape(gx.shape)
    xs, ys = grid.axes()
    surf = SurfaceGrid(xs, ys, z, f"{args.method}_envelope", {"field": field.name})
    surf.to_csv(args.out)
    _say(f"{field.name} {args.method} envelope: {z.size} rows, max {z.max():.6g}")
    _write_meta(args.out, args, seed, started)
    return EXIT_OK


def _simulate(args, seed, started) -> int:
    from .sim import CodeConfig, sweep, trend_ok

    if not args.n:
        raise ValueError("--n needs at least one block length")
    base = CodeConfig.from_rates(args.n[0], args.q, args.r_x, args.r_y, args.r_c, delta=args.delta, seed=seed)
    # validate every block length before running anything
    for n in args.n:
        CodeConfig.from_rates(n, args.q, args.r_x, args.r_y, args.r_c, delta=args.delta, seed=seed)
    results = sweep(base, args.n, args.trials, delta=args.delta, threads=args.threads)
    csv_path = args.csv or str(Path(args.out).with_suffix(".csv"))
    _write(args.out, "".join(r.to_json() + "\n" for r in results))
    rows = ["n,pe_hat,ci95"] + [f"{r.cfg.n},{r.pe_hat:.12g},{r.ci95:.12g}" for r in results]
    _write(csv_path, "\n".join(rows) + "\n")
    trend = trend_ok(results)
    high = all(r.pe_hat > 0.3 for r in results)
    for r in results:
        _say(f"n={r.cfg.n}: pe_hat={r.pe_hat:.4f} +/- {r.ci95:.4f}")
    _say(f"nonincreasing_trend={trend} all_pe_above_0.3={high}")
    _write_meta(args.out, args, seed, started, {"csv": csv_path, "trend_nonincreasing": trend, "all_pe_above_0.3": high})
    return EXIT_OK


def _verify(args, seed, started) -> int:
    names = args.suite or list(lemma_lab.SUITES)
    unknown = [s for s in names if s not in lemma_lab.SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s) {unknown}; choose from {sorted(lemma_lab.SUITES)}")
    if args.cases is not None and args.cases < 1:
        raise UsageError("--cases must be at least 1")
    reports = [lemma_lab.run_suite(s, seed=seed, cases=args.cases) for s in names]
    passed = all(r.passed for r in reports)
    doc = {"passed": passed, "seed": seed, "reports": [r.to_dict() for r in reports]}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    for r in reports:
        _say(f"{r.lemma_id}: {r.cases_run} cases, max violation {r.max_violation:.3g} ({'PASS' if r.passed else 'FAIL'})")
    if args.out:
        _write(args.out, text)
        _write_meta(args.out, args, seed, started)
    else:
        sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_FAIL


_COMMANDS = {"surface": _surface, "envelope": _envelope, "simulate": _simulate, "verify": _verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.time()
    try:
        seed = _seed(args)
        return _COMMANDS[args.command](args, seed, started)
    except (UsageError, ValueError, DegenerateInputError) as exc:
        _say(f"patrec {args.command}: error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _say(f"patrec {args.command}: I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
