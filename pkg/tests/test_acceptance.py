"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import numpy as np
import pytest

from depolsim.analysis import (
    ChainCollisionError,
    ErrorBox,
    grid_dop_max,
    resolve_half_harmonic,
    scaling_exponent,
    uniform_chain_dop,
    worst_case_dop,
    zeta_plan,
)
from depolsim.cascade import HALF, QUARTER, CascadeSpec, PlateKind, time_average
from depolsim.cli import main
from depolsim.search import (
    TABLE1,
    Arrangement,
    enumerate_combos,
    equivalence_check,
    verify_table1,
)
from depolsim.stokes import singular_values
from oracles import dense_average, power_iteration_sigma, random_unit_vectors

BOX = ErrorBox(0.02)
SWEEP_GRID = np.geomspace(1e-3, 10**-1.5, 6)


def pair(m1, m2):
    return CascadeSpec.build([HALF, QUARTER], [m1, m2])


def rel_err(value, target):
    return abs(value - target) / target


def test_c01_ideal_pair_zero_mean(criterion):
    sigma1 = singular_values(time_average(pair(1, 3)))[0]
    criterion(1, "ideal HWP(1)+QWP(3) averages to zero", sigma1 < 1e-12, f"dop_max={sigma1:.3e}")


def test_c02_two_plate_linear_law(criterion):
    template = pair(1, 3)
    zetas = zeta_plan(2, 32, seed=0)
    worst = 0.0
    for xi2 in (0.005, 0.01, 0.02):
        for xi1 in (0.0, 0.02, -0.02):
            dop = grid_dop_max(template, np.array([[xi1, xi2]]), zetas).max()
            worst = max(worst, rel_err(dop, xi2))
    slope = scaling_exponent(template, SWEEP_GRID)
    ok = worst <= 0.15 and 0.9 <= slope <= 1.1
    criterion(2, "GENERIC pair tracks |xi2| linearly", ok, f"max rel err={worst:.4f} slope={slope:.4f}")


def test_c03_counter_rotating_law(criterion):
    template = pair(1, -1)
    rng = np.random.default_rng(3)
    worst = 0.0
    for xi1, xi2 in ((0.02, 0.005), (0.01, 0.02), (0.02, 0.01)):
        zetas = rng.uniform(0, 2 * np.pi, (8, 2))
        dops = grid_dop_max(template, np.array([[xi1, xi2]]), zetas)[0]
        worst = max(worst, max(rel_err(d, max(abs(xi1) / 2, abs(xi2))) for d in dops))
    criterion(3, "counter-rotating pair follows max(|xi1|/2, |xi2|)", worst <= 0.15, f"max rel err={worst:.4f}")


def test_c04_half_harmonic_single_candidate(criterion):
    # Both candidates sit within 10% of the numeric value at this error point,
    # so "exactly one matches" cannot hold; the test stays faithful and reports it.
    res = resolve_half_harmonic(0.01, 0.01)
    detail = (f"numeric={res.numeric:.7f} "
              + " ".join(f"{k}={res.candidates[k]:.7f} ({res.rel_errors[k]:.2%})" for k in sorted(res.candidates))
              + f" matching={sorted(res.matching)} winner={res.winner}")
    criterion(4, "half-harmonic pair matches exactly one candidate within 10%", len(res.matching) == 1, detail)


@pytest.fixture(scope="module")
def table1_report():
    return verify_table1(BOX)


def test_c05_quadratic_law_table_rows(criterion, table1_report):
    bad = []
    for r in table1_report.results:
        ideal = worst_case_dop(r.arrangement.template(r.m), ErrorBox(0.0), zeta_samples=32).dop_max
        ok = r.dop_box <= 3 * 0.02**2 and ideal < 1e-10 and 1.8 <= r.slope <= 2.2
        if not ok:
            bad.append(f"{r.arrangement.name}{list(r.m)} dop={r.dop_box:.3e} ideal={ideal:.1e} slope={r.slope:.3f}")
    slopes = [r.slope for r in table1_report.results]
    detail = f"{len(table1_report.results) - len(bad)}/25 rows, slopes {min(slopes):.4f}..{max(slopes):.4f}"
    criterion(5, "every table row obeys the quadratic law", not bad and len(table1_report.results) == 25,
              detail + ("; " + ", ".join(bad) if bad else ""))


def test_c06_minimal_frequency_claims(criterion):
    notes = []
    none_at_two = all(not any(r.quadratic for r in enumerate_combos(a, 2, BOX)) for a in Arrangement)
    notes.append(f"none at max_m=2: {none_at_two}")
    hqq3 = {r.m for r in enumerate_combos(Arrangement.HQQ, 3, BOX) if r.quadratic}
    qhq3 = {r.m for r in enumerate_combos(Arrangement.QHQ, 3, BOX) if r.quadratic}
    found3 = (2, 3, -2) in hqq3 and (1, -3, 2) in qhq3
    notes.append(f"[2,3,-2] and [1,-3,2] at max_m=3: {found3}")
    min_sum = min(r.sum_abs_m for a in Arrangement for r in enumerate_combos(a, 5, BOX) if r.quadratic)
    notes.append(f"min sum |m| at max_m=5: {min_sum}")
    criterion(6, "minimal-frequency claims", none_at_two and found3 and min_sum == 6, "; ".join(notes))


def test_c07_symmetries(criterion):
    reports = [equivalence_check(m, a, BOX, phase_tuples=32) for a, rows in TABLE1.items() for m in rows]
    neg = max(r.negation_diff for r in reports)
    inv = max(r.inversion_diff for r in reports)
    spread = max(r.phase_spread for r in reports)
    ok = neg < 1e-10 and inv < 1e-10 and spread < 0.10
    criterion(7, "negation, inversion and phase invariance on table rows", ok,
              f"negation={neg:.1e} inversion={inv:.1e} phase spread={spread:.4f}")


def test_c08_nyquist_averaging_exact(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 5))
        nominals = [[np.pi, np.pi / 2, rng.uniform(0, 2 * np.pi)][rng.integers(3)] for _ in range(p)]
        ms = [int(v) * int(rng.choice([-1, 1])) for v in rng.integers(1, 7, p)]
        xis, zetas = rng.uniform(-0.3, 0.3, p), rng.uniform(0, 2 * np.pi, p)
        spec = CascadeSpec.build([PlateKind.custom(d) for d in nominals], ms, xis, zetas)
        n = 2 * sum(map(abs, ms)) * 2 + 2
        worst = max(worst, np.abs(time_average(spec, n_samples=n) - dense_average(nominals, ms, xis, zetas)).max())
    criterion(8, "Nyquist average equals dense 10^4-point average", worst < 1e-12, f"max entry diff={worst:.2e}")


def test_c09_singular_value_oracle(criterion):
    rng = np.random.default_rng(9)
    m = rng.uniform(-1, 1, (1000, 3, 3))
    sv = singular_values(m)
    diff = np.abs(sv - power_iteration_sigma(m)).max()
    s = random_unit_vectors(rng, 1000)
    excess = (np.linalg.norm(np.einsum("kij,nj->kni", m, s), axis=-1) - sv[:, :1]).max()
    ok = diff < 1e-8 and excess <= 1e-12
    criterion(9, "singular values match power iteration and bound |M s|", ok,
              f"max sigma diff={diff:.2e} max(|Ms|-sigma1)={excess:.2e}")


def test_c10_uniform_chain(criterion):
    errs = [abs(uniform_chain_dop(n, ms) - 3.0**-n) for n, ms in ((1, [1]), (2, [1, 3]), (3, [1, 3, 9]))]
    try:
        uniform_chain_dop(2, [1, 2])
        flagged, deviation = False, 0.0
    except ChainCollisionError as exc:
        flagged, deviation = True, abs(exc.dop - 1 / 9)
    ok = max(errs) < 1e-9 and flagged and deviation > 1e-6
    criterion(10, "uniform chain reaches 3^-n and flags collisions", ok,
              f"max err={max(errs):.1e} [1,2] flagged={flagged} deviation={deviation:.4f}")


def test_c11_verify_deterministic(criterion, tmp_path, capsys):
    a, b = tmp_path / "first.txt", tmp_path / "second.txt"
    codes = (main(["verify", "--seed", "11", "--out", str(a)]), main(["verify", "--seed", "11", "--out", str(b)]))
    capsys.readouterr()
    same = a.read_bytes() == b.read_bytes()
    criterion(11, "verify report is byte-identical across runs", same and codes == (0, 0),
              f"exit codes={codes} identical={same}")
