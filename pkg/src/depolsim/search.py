"""Exhaustive search over integer drive-frequency triples for three-plate depolarizers."""

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from math import nan

import numpy as np

from .analysis import (
    DEFAULT_GRID,
    ZETA_SAMPLES,
    BelowFloorError,
    ErrorBox,
    fit_slope,
    grid_dop_max,
    unit_xi_plan,
    worst_case_dop,
    zeta_plan,
)
from .cascade import HALF, QUARTER, CascadeSpec

MAX_M_LIMIT = 12


class Arrangement(Enum):
    HQQ = (HALF, QUARTER, QUARTER)
    QHQ = (QUARTER, HALF, QUARTER)

    @property
    def kinds(self):
        return self.value

    @property
    def hwp_index(self):
        return self.value.index(HALF)

    def template(self, m):
        return CascadeSpec.build(self.kinds, m)

    @classmethod
    def parse(cls, text):
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown arrangement {text!r}; expected hqq or qhq") from None


TABLE1 = {
    Arrangement.HQQ: (
        (1, -3, 3), (1, 3, -3), (2, 3, -2), (2, -3, -2), (3, 1, -3),
        (3, -1, -3), (3, -2, 2), (3, 2, -3), (3, -2, -3), (1, 4, -1),
        (4, -1, 1), (3, -4, -3), (1, 5, -1), (5, -1, 1), (4, -5, -4),
    ),
    Arrangement.QHQ: (
        (1, -3, 2), (1, -4, 2), (1, -4, 3), (2, -4, 3), (2, -1, 4),
        (2, -3, 4), (3, -2, 4), (4, 1, -5), (1, -5, 2), (4, -5, 3),
    ),
}


@dataclass(frozen=True)
class QuadraticCriteria:
    """Thresholds for calling a combination 'quadratic'.

    The level check is ``dop <= level_factor * xi_max**2`` at the search box.
    """

    slope_lo: float = 1.8
    slope_hi: float = 2.2
    ideal_floor: float = 1e-10
    level_factor: float = 3.0
    grid: tuple = DEFAULT_GRID
    zeta_samples: int = ZETA_SAMPLES
    ideal_zeta_samples: int = 4
    seed: int = 0


@dataclass(frozen=True)
class ComboResult:
    arrangement: Arrangement
    m: tuple
    dop_ideal: float
    dop_box: float
    xi_box: float
    slope: float
    quadratic: bool
    dop_at: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def max_abs_m(self):
        return max(abs(x) for x in self.m)

    @property
    def sum_abs_m(self):
        return sum(abs(x) for x in self.m)

    @property
    def hwp_abs_m(self):
        return abs(self.m[self.arrangement.hwp_index])


def canonical(m):
    """Representative under global negation: first nonzero entry positive."""
    m = tuple(int(x) for x in m)
    first = next((x for x in m if x), 0)
    return tuple(-x for x in m) if first < 0 else m


def sort_key(m):
    return (max(abs(x) for x in m), sum(abs(x) for x in m), tuple(m))


def candidate_triples(max_m):
    values = [v for v in range(-max_m, max_m + 1) if v]
    triples = {canonical(m) for m in itertools.product(values, repeat=3)}
    return sorted(triples, key=sort_key)


def evaluate_combo(arrangement, m, box, criteria=QuadraticCriteria(), full=False):
    """Quadratic verdict for one frequency triple.

    Stages short-circuit: a triple that fails to depolarize ideal plates, or
    whose worst case at ``box`` already exceeds the level bound, is rejected
    without the slope fit (its slope is reported as NaN) unless ``full``.
    """
    m = tuple(int(x) for x in m)
    template = arrangement.template(m)
    zetas = zeta_plan(3, criteria.ideal_zeta_samples, criteria.seed)
    dop_ideal = float(grid_dop_max(template, np.zeros((1, 3)), zetas).max())
    if dop_ideal >= criteria.ideal_floor and not full:
        return ComboResult(arrangement, m, dop_ideal, nan, box.xi_max, nan, False,
                           reason="nonzero ideal mean")

    dop_box = worst_case_dop(template, box, criteria.zeta_samples, seed=criteria.seed).dop_max
    level = criteria.level_factor * box.xi_max**2
    if dop_box > level and not full:
        return ComboResult(arrangement, m, dop_ideal, dop_box, box.xi_max, nan, False,
                           reason="level above bound")

    dop_at = {}
    for x in criteria.grid:
        dop_at[float(x)] = worst_case_dop(template, ErrorBox(float(x)), criteria.zeta_samples,
                                          seed=criteria.seed).dop_max
    try:
        slope = fit_slope(list(dop_at), list(dop_at.values()))
    except BelowFloorError:
        slope = nan
    reasons = []
    if dop_ideal >= criteria.ideal_floor:
        reasons.append("nonzero ideal mean")
    if dop_box > level:
        reasons.append("level above bound")
    if not criteria.slope_lo <= slope <= criteria.slope_hi:
        reasons.append("slope outside band")
    return ComboResult(arrangement, m, dop_ideal, dop_box, box.xi_max, slope,
                       not reasons, dop_at, "; ".join(reasons))


def _evaluate_star(args):
    return evaluate_combo(*args)


def _check_max_m(max_m):
    if not 1 <= max_m <= MAX_M_LIMIT:
        raise ValueError(f"max_m must lie in [1, {MAX_M_LIMIT}], got {max_m}")


def enumerate_combos(arrangement, max_m, box=ErrorBox(0.02), criteria=QuadraticCriteria(),
                     workers=1):
    """Evaluate every canonical triple with 1 <= |m_i| <= max_m.

    Results come back sorted by (max|m|, sum|m|, m) regardless of ``workers``.
    """
    _check_max_m(max_m)
    jobs = [(arrangement, m, box, criteria) for m in candidate_triples(max_m)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_star, jobs, chunksize=8))
    else:
        results = [_evaluate_star(j) for j in jobs]
    return sorted(results, key=lambda r: sort_key(r.m))


@dataclass(frozen=True)
class Table1Report:
    results: tuple
    xi_max: float

    @property
    def failures(self):
        return tuple(r for r in self.results if not r.quadratic)

    @property
    def passed(self):
        return not self.failures


def verify_table1(box=ErrorBox(0.02), criteria=QuadraticCriteria(), workers=1):
    """Full quadratic evaluation of every published table row (15 HQQ + 10 QHQ)."""
    if not 0.005 <= box.xi_max <= 0.05:
        raise ValueError("table verification expects xi_max in [0.005, 0.05]")
    jobs = [(arr, m, box, criteria, True) for arr, rows in TABLE1.items() for m in rows]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_star, jobs))
    else:
        results = [_evaluate_star(j) for j in jobs]
    return Table1Report(tuple(results), box.xi_max)


@dataclass(frozen=True)
class EquivalenceReport:
    arrangement: Arrangement
    m: tuple
    dop: float
    negation_diff: float
    inversion_diff: float
    phase_spread: float
    tol: float
    phase_tol: float

    @property
    def passed(self):
        return (self.negation_diff < self.tol and self.inversion_diff < self.tol
                and self.phase_spread < self.phase_tol)


def equivalence_check(m, arrangement, box=ErrorBox(0.02), phase_tuples=32, seed=0,
                      tol=1e-10, phase_tol=0.10):
    """Check negation, order inversion and start-phase insensitivity of a combo.

    Negation and inversion are compared configuration by configuration on the
    same error/phase plan (inversion reverses each plan row so every plate
    keeps its own xi and zeta); the reported diffs are maxima over the plan.
    ``phase_spread`` is the relative spread, (max - min) / max, of the
    worst case over errors when the start phases are fixed to each of
    ``phase_tuples`` random tuples.
    """
    template = arrangement.template(m)
    xis = box.xi_max * unit_xi_plan(3, seed=seed)
    zetas = zeta_plan(3, phase_tuples, seed)

    base = grid_dop_max(template, xis, zetas)
    neg = grid_dop_max(template.negated(), xis, zetas)
    inv = grid_dop_max(template.reversed(), xis[:, ::-1], zetas[:, ::-1])

    per_phase = base[:, 1:].max(axis=0)
    spread = float((per_phase.max() - per_phase.min()) / per_phase.max()) if per_phase.max() > 0 else 0.0
    return EquivalenceReport(
        arrangement, tuple(m), float(base.max()),
        float(np.abs(base - neg).max()), float(np.abs(base - inv).max()),
        spread, tol, phase_tol,
    )
