"""Plain-text verification report: published table, symmetries, uniform chains."""

from dataclasses import dataclass

from .analysis import ChainCollisionError, ErrorBox, resolve_half_harmonic, uniform_chain_dop
from .search import TABLE1, QuadraticCriteria, equivalence_check, verify_table1

GROUPS = ("table1", "equivalence", "phase", "half-harmonic", "chain")
CHAIN_FREQUENCIES = ((1,), (1, 3), (1, 3, 9))
CHAIN_TOL = 1e-9


def fmt(x):
    return f"{x:.12g}"


def fmt_m(m):
    return "[" + ",".join(str(v) for v in m) + "]"


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    passed: bool
    detail: str

    def render(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.group:<13} {self.name:<18} {self.detail}"


def table1_checks(box, criteria, workers=1):
    report = verify_table1(box, criteria, workers)
    level = criteria.level_factor * box.xi_max**2
    for r in report.results:
        yield Check(
            "table1", f"{r.arrangement.name} {fmt_m(r.m)}", r.quadratic,
            f"slope={fmt(r.slope)} dop@{box.xi_max:g}={fmt(r.dop_box)} (<= {fmt(level)}) "
            f"ideal={fmt(r.dop_ideal)}" + (f" reason={r.reason}" if r.reason else ""),
        )


def _equivalence_reports(box, seed):
    return [equivalence_check(m, arr, box, seed=seed) for arr, rows in TABLE1.items() for m in rows]


def equivalence_checks(reports):
    for r in reports:
        ok = r.negation_diff < r.tol and r.inversion_diff < r.tol
        yield Check(
            "equivalence", f"{r.arrangement.name} {fmt_m(r.m)}", ok,
            f"negation_diff={r.negation_diff:.3e} inversion_diff={r.inversion_diff:.3e} (< {r.tol:g})",
        )


def phase_checks(reports):
    for r in reports:
        yield Check(
            "phase", f"{r.arrangement.name} {fmt_m(r.m)}", r.phase_spread < r.phase_tol,
            f"relative_spread={fmt(r.phase_spread)} (< {r.phase_tol:g})",
        )


def half_harmonic_checks(xi1=0.01, xi2=0.01):
    res = resolve_half_harmonic(xi1, xi2)
    detail = (
        f"xi=({xi1:g},{xi2:g}) numeric={fmt(res.numeric)} "
        + " ".join(f"{k}={fmt(v)} (rel {res.rel_errors[k]:.4f})" for k, v in res.candidates.items())
        + f" within_10%={','.join(res.matching) or 'none'} winner={res.winner}"
    )
    yield Check("half-harmonic", "(2,1)", res.rel_errors[res.winner] <= 0.10, detail)


def chain_checks():
    for ms in CHAIN_FREQUENCIES:
        n = len(ms)
        target = 3.0**-n
        try:
            dop = uniform_chain_dop(n, ms)
            ok = abs(dop - target) <= CHAIN_TOL
            note = ""
        except ChainCollisionError as exc:
            dop, ok, note = exc.dop, False, f" collision={fmt_m(exc.collision)}"
        yield Check("chain", fmt_m(ms), ok, f"n={n} dop={fmt(dop)} target={fmt(target)}{note}")


def run_checks(only=GROUPS, box=ErrorBox(0.02), criteria=QuadraticCriteria(), workers=1):
    """Run the selected check groups; returns a list of :class:`Check`."""
    unknown = set(only) - set(GROUPS)
    if unknown:
        raise ValueError(f"unknown check group(s): {', '.join(sorted(unknown))}")
    checks = []
    if "table1" in only:
        checks += table1_checks(box, criteria, workers)
    if "equivalence" in only or "phase" in only:
        reports = _equivalence_reports(box, criteria.seed)
        if "equivalence" in only:
            checks += equivalence_checks(reports)
        if "phase" in only:
            checks += phase_checks(reports)
    if "half-harmonic" in only:
        checks += half_harmonic_checks()
    if "chain" in only:
        checks += chain_checks()
    return checks


def render_report(checks):
    lines = [c.render() for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"# {len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
