"""Command-line front end.

Subcommands: eval, sweep, search, verify, chain.  Options may also come from
a ``key = value`` config file (``--config``); flags on the command line win.
Angles are radians unless ``--degrees`` is given.  Exit codes: 0 success,
1 verification failure, 2 usage or input error.
"""

import argparse
import csv
import logging
import math
import sys

from . import __version__
from .analysis import (
    DEFAULT_GRID,
    ZETA_SAMPLES,
    BelowFloorError,
    ChainCollisionError,
    ErrorBox,
    check_grid,
    fit_slope,
    geometric_grid,
    uniform_chain_dop,
    worst_case_dop,
)
from .cascade import HALF, QUARTER, XI_SANITY, CascadeSpec
from .search import (
    MAX_M_LIMIT,
    TABLE1,
    Arrangement,
    QuadraticCriteria,
    enumerate_combos,
)
from .stokes import CARDINAL_INPUTS, dop_for_input
from .verify import GROUPS, fmt, fmt_m, render_report, run_checks

log = logging.getLogger("depolsim")

KIND_LETTERS = {"H": HALF, "Q": QUARTER}


class UsageError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


# --- value parsers -------------------------------------------------------------

def int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def parse_grid(text):
    """``lo:hi:points`` -> geometric grid of ``points`` values from lo to hi."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like lo:hi:points, got {text!r}")
    try:
        lo, hi, points = float(parts[0]), float(parts[1]), int(parts[2])
        return tuple(geometric_grid(lo, hi, points))
    except ValueError as exc:
        raise UsageError(f"malformed grid {text!r}: {exc}") from None


def parse_bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def parse_kinds(text):
    letters = str(text).strip().upper()
    if not letters or any(c not in KIND_LETTERS for c in letters):
        raise UsageError(f"arrangement must be a sequence of H/Q letters (e.g. hqq), got {text!r}")
    return [KIND_LETTERS[c] for c in letters]


# name -> (parser, default); argparse defaults stay None so config values can fill in
OPTIONS = {
    "arrangement": (str, "hqq"),
    "m": (int_list, None),
    "xi": (float_list, None),
    "xi_max": (float, None),
    "zeta": (float_list, None),
    "zeta_samples": (int, ZETA_SAMPLES),
    "grid": (parse_grid, DEFAULT_GRID),
    "max_m": (int, 3),
    "seed": (int, 0),
    "out": (str, None),
    "degrees": (parse_bool, False),
    "workers": (int, 1),
    "expect_table1": (parse_bool, False),
    "only": (str, None),
    "slope_band": (float_list, None),
    "allow_collision": (parse_bool, False),
}


def read_config(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in OPTIONS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def resolve(args):
    """Merge flags over config-file values over built-in defaults."""
    file_values = read_config(args.config) if args.config else {}
    for key, (parse, default) in OPTIONS.items():
        value = getattr(args, key, None)
        if value is None and key in file_values:
            value = parse(file_values[key])
        if value is None:
            value = default
        setattr(args, key, value)
    if args.degrees:
        for key in ("xi", "zeta"):
            if getattr(args, key) is not None:
                setattr(args, key, [math.radians(v) for v in getattr(args, key)])
        if args.xi_max is not None:
            args.xi_max = math.radians(args.xi_max)
        args.grid = tuple(math.radians(v) for v in args.grid)
    return args


# --- helpers -----------------------------------------------------------------

def build_template(args):
    kinds = parse_kinds(args.arrangement)
    if args.m is None:
        raise UsageError("--m is required")
    if len(args.m) != len(kinds):
        raise UsageError(f"--m has {len(args.m)} values for {len(kinds)} plates ({args.arrangement})")
    for i, m in enumerate(args.m, 1):
        if m == 0:
            raise UsageError(f"zero drive frequency m{i} = 0 in --m {','.join(map(str, args.m))}")
    return CascadeSpec.build(kinds, args.m)


def make_box(xi_max):
    try:
        return ErrorBox(xi_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def criteria_from(args):
    kwargs = {"zeta_samples": args.zeta_samples, "seed": args.seed}
    if args.slope_band is not None:
        if len(args.slope_band) != 2 or args.slope_band[0] > args.slope_band[1]:
            raise UsageError("--slope-band must be lo,hi with lo <= hi")
        kwargs["slope_lo"], kwargs["slope_hi"] = args.slope_band
    return QuadraticCriteria(**kwargs)


# --- subcommands ---------------------------------------------------------------

def cmd_eval(args):
    template = build_template(args)
    p = len(template)
    if args.xi is not None:
        if len(args.xi) != p:
            raise UsageError(f"--xi has {len(args.xi)} values for {p} plates")
        if any(abs(x) > XI_SANITY for x in args.xi):
            raise UsageError(f"retardation errors must satisfy |xi| <= {XI_SANITY}")
        box, xi_plan = None, [args.xi]
    else:
        box, xi_plan = make_box(args.xi_max if args.xi_max is not None else 0.0), None
    phases = None
    if args.zeta is not None:
        if len(args.zeta) != p:
            raise UsageError(f"--zeta has {len(args.zeta)} values for {p} plates")
        phases = [args.zeta]

    rep = worst_case_dop(template, box, args.zeta_samples, xi_plan=xi_plan, seed=args.seed,
                         phases=phases)
    print(f"arrangement = {args.arrangement.upper()}")
    print(f"m = {fmt_m(template.ms)}")
    for i, row in enumerate(rep.mean_matrix, 1):
        print(f"mean_row{i} = " + " ".join(fmt(v) for v in row))
    print("sigma = " + " ".join(fmt(v) for v in rep.sigma))
    print(f"dop_max = {fmt(rep.dop_max)}")
    print(f"dop_first_phase = {fmt(rep.dop_zero_phase)}")
    print("worst_xi = " + " ".join(fmt(v) for v in rep.worst_xi))
    print("worst_zeta = " + " ".join(fmt(v) for v in rep.worst_zeta))
    print(f"samples = {rep.n_xi}x{rep.n_zeta}")
    per_input = {k: dop_for_input(rep.mean_matrix, s) for k, s in CARDINAL_INPUTS.items()}
    for k, v in per_input.items():
        print(f"dop[{k}] = {fmt(v)}")

    if args.out:
        fh, _ = open_out(args.out)
        with fh:
            w = csv_writer(fh)
            w.writerow(["input", "s1", "s2", "s3", "dop"])
            for k, s in CARDINAL_INPUTS.items():
                w.writerow([k, *(fmt(v) for v in s), fmt(per_input[k])])
    return 0


def sweep_rows(template, grid, zeta_samples, seed):
    rows, dops = [], []
    for x in grid:
        dops.append(worst_case_dop(template, ErrorBox(float(x)), zeta_samples, seed=seed).dop_max)
        try:
            running = fit_slope(grid[: len(dops)], dops) if len(dops) >= 2 else math.nan
        except BelowFloorError:
            running = math.nan
        rows.append((float(x), dops[-1], running))
    return rows


def cmd_sweep(args):
    template = build_template(args)
    try:
        grid = check_grid(args.grid)
    except ValueError as exc:
        raise UsageError(f"bad grid: {exc}") from None
    rows = sweep_rows(template, grid, args.zeta_samples, args.seed)
    try:
        slope = fit_slope(grid, [r[1] for r in rows])
    except BelowFloorError as exc:
        log.warning("%s", exc)
        slope = math.nan

    fh, close = open_out(args.out)
    try:
        w = csv_writer(fh)
        w.writerow(["xi_max", "dop_max", "slope_running"])
        for row in rows:
            w.writerow([fmt(v) for v in row])
        fh.write(f"# slope={fmt(slope)}\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_search(args):
    try:
        arrangement = Arrangement.parse(args.arrangement)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 1 <= args.max_m <= MAX_M_LIMIT:
        raise UsageError(f"--max-m must lie in [1, {MAX_M_LIMIT}], got {args.max_m}")
    box = make_box(args.xi_max if args.xi_max is not None else 0.02)
    results = enumerate_combos(arrangement, args.max_m, box, criteria_from(args), args.workers)

    fh, close = open_out(args.out)
    try:
        w = csv_writer(fh)
        w.writerow(["arrangement", "m1", "m2", "m3", "max_abs_m", "sum_abs_m", "slope",
                    f"dop_at_{box.xi_max:g}", "quadratic"])
        for r in results:
            w.writerow([arrangement.name.lower(), *r.m, r.max_abs_m, r.sum_abs_m, fmt(r.slope),
                        fmt(r.dop_box), str(r.quadratic).lower()])
    finally:
        if close:
            fh.close()

    quadratic = [r for r in results if r.quadratic]
    summary = f"# {arrangement.name}: {len(results)} combos, {len(quadratic)} quadratic (max_m={args.max_m})"
    status = 0
    if args.expect_table1:
        found = {r.m for r in quadratic}
        expected = [m for m in TABLE1[arrangement] if max(map(abs, m)) <= args.max_m]
        missing = [m for m in expected if m not in found]
        summary += f"; table rows found {len(expected) - len(missing)}/{len(expected)}"
        if missing:
            summary += "; missing " + " ".join(fmt_m(m) for m in missing)
            status = 1
    print(summary, file=sys.stderr)
    return status


def cmd_verify(args):
    only = GROUPS if not args.only else tuple(s.strip() for s in args.only.split(",") if s.strip())
    box = make_box(args.xi_max if args.xi_max is not None else 0.02)
    try:
        checks = run_checks(only, box, criteria_from(args), args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = render_report(checks)
    sys.stdout.write(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(report)
    return 0 if all(c.passed for c in checks) else 1


def cmd_chain(args):
    if not args.m:
        raise UsageError("--m is required")
    if 0 in args.m:
        raise UsageError(f"zero drive frequency in --m {','.join(map(str, args.m))}")
    n = len(args.m)
    target = 3.0**-n
    try:
        dop = uniform_chain_dop(n, args.m, allow_collision=args.allow_collision)
    except ChainCollisionError as exc:
        print(f"n={n} dop={fmt(exc.dop)} target={fmt(target)} collision={fmt_m(exc.collision)}")
        return 1
    print(f"n={n} dop={fmt(dop)} target={fmt(target)} deviation={dop - target:.3e}")
    return 0


# --- parser ------------------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--seed", type=int, help="seed for random phase and interior samples")
    p.add_argument("--out", help="output file (CSV or report)")
    p.add_argument("--degrees", action="store_const", const=True,
                   help="angle inputs (xi, zeta, xi-max, grid) are in degrees")
    p.add_argument("-v", "--verbose", action="store_true")


def _wrap(parse):
    def inner(text):
        try:
            return parse(text)
        except UsageError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    inner.__name__ = parse.__name__
    return inner


def build_parser():
    parser = argparse.ArgumentParser(prog="depolsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="mean matrix and residual DOP of one cascade")
    sw = sub.add_parser("sweep", help="worst-case DOP over a geometric xi_max grid (CSV)")
    se = sub.add_parser("search", help="enumerate frequency triples (CSV)")
    ve = sub.add_parser("verify", help="table, symmetry and chain checks")
    ch = sub.add_parser("chain", help="uniform arccos(-1/3) retarder chain")

    for p in (ev, sw, se, ve, ch):
        _common(p)
    for p in (ev, sw, se):
        p.add_argument("--arrangement", help="plate sequence, e.g. hqq, qhq, hq (default hqq)")
    for p in (ev, sw, ch):
        p.add_argument("--m", type=_wrap(int_list), help="comma-separated drive frequencies")
    for p in (ev, sw, se, ve):
        p.add_argument("--zeta-samples", type=int, help=f"random phase tuples (default {ZETA_SAMPLES})")
    ev.add_argument("--xi", type=_wrap(float_list), help="comma-separated retardation errors")
    ev.add_argument("--zeta", type=_wrap(float_list), help="comma-separated start phases")
    for p in (ev, se, ve):
        p.add_argument("--xi-max", type=float, help="error box half-width")
    sw.add_argument("--grid", type=_wrap(parse_grid), help="lo:hi:points geometric xi_max grid")
    se.add_argument("--max-m", type=int, help="largest |m_i| to enumerate (default 3)")
    se.add_argument("--expect-table1", action="store_const", const=True,
                    help="exit 1 unless every published row within max-m is quadratic")
    for p in (se, ve):
        p.add_argument("--workers", type=int, help="worker processes (results are order-independent)")
        p.add_argument("--slope-band", type=_wrap(float_list), help="quadratic slope band lo,hi")
    ve.add_argument("--only", help=f"comma-separated subset of: {', '.join(GROUPS)}")
    ch.add_argument("--allow-collision", action="store_const", const=True,
                    help="report colliding frequencies instead of failing")
    return parser


COMMANDS = {"eval": cmd_eval, "sweep": cmd_sweep, "search": cmd_search,
            "verify": cmd_verify, "chain": cmd_chain}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        resolve(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"depolsim {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"depolsim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
