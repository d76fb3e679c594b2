"""Error analysis: two-plate closed forms, worst-case DOP, scaling laws, uniform chains."""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from math import acos, cos, sin, sqrt

import numpy as np

from .cascade import HALF, QUARTER, CascadeSpec, PlateKind, batch_mean_grid, residual_dop_max
from .stokes import singular_values

log = logging.getLogger(__name__)

XI_BOX_LIMIT = 0.3
SLOPE_XI_LIMIT = 0.1
DOP_FLOOR = 1e-14
N_INTERIOR = 64
ZETA_SAMPLES = 32


class ComboClass(Enum):
    DEGENERATE = "degenerate"
    GENERIC = "generic"
    HALF_HARMONIC = "half_harmonic"
    COUNTER_ROTATING = "counter_rotating"


class BelowFloorError(ValueError):
    """Worst-case DOP too small for a meaningful log-log fit."""


class ChainCollisionError(ValueError):
    """Uniform-chain frequencies admit a harmonic collision.

    ``collision`` is the offending integer weight vector and ``dop`` the
    residual DOP actually obtained with the colliding frequencies.
    """

    def __init__(self, ms, collision, dop):
        self.ms = tuple(ms)
        self.collision = tuple(collision)
        self.dop = dop
        super().__init__(
            f"frequencies {list(self.ms)} collide: weights {list(self.collision)} "
            f"sum to zero; residual DOP = {dop:.12g} instead of {3.0 ** -len(self.ms):.12g}"
        )


@dataclass(frozen=True)
class ErrorBox:
    """Symmetric retardation-error bound |xi_i| <= xi_max for every plate."""

    xi_max: float

    def __post_init__(self):
        if not 0 <= self.xi_max <= XI_BOX_LIMIT:
            raise ValueError(f"xi_max must lie in [0, {XI_BOX_LIMIT}], got {self.xi_max!r}")


@dataclass(frozen=True)
class DopReport:
    mean_matrix: np.ndarray
    sigma: np.ndarray
    dop_max: float
    worst_xi: tuple
    worst_zeta: tuple
    dop_zero_phase: float
    n_xi: int
    n_zeta: int

    @property
    def samples_used(self):
        return self.n_xi * self.n_zeta


# --- two-plate closed forms (HWP first, QWP second) -------------------------

def classify_two_plate(m1, m2):
    """Classify a HWP->QWP frequency pair by its first-order mean-matrix form."""
    if m1 == 0 or m2 == 0:
        raise ValueError(f"frequencies must be nonzero, got ({m1}, {m2})")
    if m2 == m1 or m2 == 2 * m1:
        return ComboClass.DEGENERATE
    if m1 == -m2:
        return ComboClass.COUNTER_ROTATING
    if 2 * m2 == m1:
        return ComboClass.HALF_HARMONIC
    return ComboClass.GENERIC


def _reject_degenerate(combo_class):
    if combo_class is ComboClass.DEGENERATE:
        raise ValueError("no closed form exists for a degenerate frequency pair")


def two_plate_mean_approx(combo_class, xi1, xi2, zeta1=0.0, zeta2=0.0):
    """First-order time-averaged matrix of a HWP->QWP pair for its class."""
    _reject_degenerate(combo_class)
    mean = np.zeros((3, 3))
    mean[2, 2] = xi2
    if combo_class is ComboClass.HALF_HARMONIC:
        phase = 2 * zeta2 - zeta1
        mean[0, 2] = xi1 / 2 * sin(phase)
        mean[1, 2] = -xi1 / 2 * cos(phase)
    elif combo_class is ComboClass.COUNTER_ROTATING:
        phase = zeta2 + zeta1
        mean[0, 0] = -xi1 / 2 * cos(phase)
        mean[0, 1] = -xi1 / 2 * sin(phase)
        mean[1, 0] = -xi1 / 2 * sin(phase)
        mean[1, 1] = xi1 / 2 * cos(phase)
    return mean


def half_harmonic_candidates(xi1, xi2):
    """Both candidate closed forms for the half-harmonic pair.

    ``printed`` is sqrt(xi1^2/2 + xi2^2) as published; ``column_norm`` is the
    norm of the published mean-matrix column, sqrt(xi1^2/4 + xi2^2).
    """
    return {
        "printed": sqrt(xi1**2 / 2 + xi2**2),
        "column_norm": sqrt(xi1**2 / 4 + xi2**2),
    }


def two_plate_dop_approx(combo_class, xi1, xi2, variant="printed"):
    """First-order worst-case DOP of a HWP->QWP pair.

    ``variant`` only matters for HALF_HARMONIC and picks one of
    :func:`half_harmonic_candidates`.
    """
    _reject_degenerate(combo_class)
    if combo_class is ComboClass.GENERIC:
        return abs(xi2)
    if combo_class is ComboClass.COUNTER_ROTATING:
        return max(abs(xi1 / 2), abs(xi2))
    return half_harmonic_candidates(xi1, xi2)[variant]


@dataclass(frozen=True)
class HalfHarmonicResolution:
    numeric: float
    candidates: dict
    rel_errors: dict
    matching: tuple
    winner: str


def resolve_half_harmonic(xi1, xi2, m1=2, m2=1, zeta1=0.0, zeta2=0.0, rel_tol=0.10):
    """Compare both half-harmonic closed forms against exact numeric averaging.

    ``matching`` lists every candidate within ``rel_tol`` of the numeric value
    (relative to the numeric value); ``winner`` is the closest candidate.
    """
    if classify_two_plate(m1, m2) is not ComboClass.HALF_HARMONIC:
        raise ValueError(f"({m1}, {m2}) is not a half-harmonic pair")
    spec = CascadeSpec.build(
        [HALF, QUARTER],
        [m1, m2], [xi1, xi2], [zeta1, zeta2],
    )
    numeric = residual_dop_max(spec)
    cands = half_harmonic_candidates(xi1, xi2)
    rel = {k: abs(v - numeric) / numeric for k, v in cands.items()}
    matching = tuple(k for k in cands if rel[k] <= rel_tol)
    winner = min(rel, key=rel.get)
    return HalfHarmonicResolution(numeric, cands, rel, matching, winner)


# --- worst case over an error box ----------------------------------------

def _rngs(seed):
    xi_seq, zeta_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(xi_seq), np.random.default_rng(zeta_seq)


def unit_xi_plan(n_plates, n_random=N_INTERIOR, seed=0):
    """Error directions in the unit box: sign corners, axis points, random interior.

    Scale by ``xi_max`` to get the actual plan, so a sweep reuses the same
    directions at every grid point.
    """
    corners = np.array(list(itertools.product((-1.0, 1.0), repeat=n_plates)))
    axes = np.concatenate([np.eye(n_plates), -np.eye(n_plates)])
    axes = axes[np.lexsort(axes.T[::-1])]
    xi_rng, _ = _rngs(seed)
    interior = xi_rng.uniform(-1.0, 1.0, size=(n_random, n_plates))
    return np.concatenate([corners, axes, interior])


def zeta_plan(n_plates, zeta_samples=ZETA_SAMPLES, seed=0):
    """All-zero phase tuple followed by ``zeta_samples`` random tuples."""
    _, zeta_rng = _rngs(seed)
    rand = zeta_rng.uniform(0.0, 2 * np.pi, size=(zeta_samples, n_plates))
    return np.concatenate([np.zeros((1, n_plates)), rand])


def grid_means(template, xis, zetas):
    """Exact mean matrices for every (error vector, phase tuple) pair, shape (nx, nz, 3, 3)."""
    nominals = [k.nominal for k in template.kinds]
    return batch_mean_grid(nominals, template.ms, xis, zetas)


def grid_dop_max(template, xis, zetas):
    """Largest singular value of the mean matrix over an error x phase grid, shape (nx, nz)."""
    return singular_values(grid_means(template, xis, zetas))[..., 0]


def worst_case_dop(template, box, zeta_samples=ZETA_SAMPLES, xi_plan=None, seed=0,
                   n_random=N_INTERIOR, phases=None):
    """Worst residual DOP over sampled retardation errors and start phases.

    Parameters
    ----------
    template : CascadeSpec
        Plate kinds and frequencies; its own xi and zeta values are ignored.
    box : ErrorBox
    zeta_samples : int
        Random phase tuples evaluated in addition to the all-zero tuple.
    xi_plan : array_like, optional
        Explicit error vectors, shape (k, p), in radians.  Defaults to
        ``box.xi_max * unit_xi_plan(p)``.
    phases : array_like, optional
        Explicit start-phase tuples, shape (k, p); overrides ``zeta_samples``.
    seed : int
        Seed for the random interior errors and phase tuples.

    Returns
    -------
    DopReport
        The maximum and its arg-max.  Ties resolve to the first (xi, zeta)
        pair in plan order.
    """
    if zeta_samples < 0:
        raise ValueError("zeta_samples must be non-negative")
    p = len(template)
    if xi_plan is None:
        xi_plan = box.xi_max * unit_xi_plan(p, n_random, seed)
    xi_plan = np.atleast_2d(np.asarray(xi_plan, float))
    if xi_plan.size == 0:
        raise ValueError("empty retardation-error plan")
    if xi_plan.shape[1] != p:
        raise ValueError(f"error plan has {xi_plan.shape[1]} columns for {p} plates")
    if phases is None:
        zetas = zeta_plan(p, zeta_samples, seed)
    else:
        zetas = np.atleast_2d(np.asarray(phases, float))
        if zetas.size == 0 or zetas.shape[1] != p:
            raise ValueError(f"phase plan must have {p} columns")

    means = grid_means(template, xi_plan, zetas)
    dops = singular_values(means)[..., 0]

    ix, iz = np.unravel_index(int(np.argmax(dops)), dops.shape)
    worst_xi, worst_zeta = xi_plan[ix], zetas[iz]
    mean = means[ix, iz]
    sigma = singular_values(mean)
    return DopReport(
        mean_matrix=mean,
        sigma=sigma,
        dop_max=float(sigma[0]),
        worst_xi=tuple(float(x) for x in worst_xi),
        worst_zeta=tuple(float(z) for z in worst_zeta),
        dop_zero_phase=float(dops[:, 0].max()),
        n_xi=len(xi_plan),
        n_zeta=len(zetas),
    )


# --- scaling laws -----------------------------------------------------------

def geometric_grid(lo, hi, points):
    if points < 2 or not 0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi and >= 2 points, got lo={lo}, hi={hi}, points={points}")
    return np.geomspace(lo, hi, int(points))


DEFAULT_GRID = tuple(geometric_grid(1e-3, 10**-1.5, 6))


def check_grid(grid):
    grid = np.asarray(grid, float)
    if grid.ndim != 1 or grid.size < 4:
        raise ValueError("scaling fit needs at least 4 grid points")
    if np.any(grid <= 0) or np.any(grid > SLOPE_XI_LIMIT):
        raise ValueError(f"grid values must lie in (0, {SLOPE_XI_LIMIT}]")
    if grid.max() / grid.min() < 10 * (1 - 1e-9):
        raise ValueError("grid must span at least one decade")
    return grid


def fit_slope(xs, ys):
    """Least-squares slope of log(ys) against log(xs)."""
    ys = np.asarray(ys, float)
    if np.any(ys < DOP_FLOOR):
        raise BelowFloorError(f"DOP below floor {DOP_FLOOR:g}; slope undefined")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def sweep(template, grid=DEFAULT_GRID, zeta_samples=ZETA_SAMPLES, seed=0):
    """Worst-case DOP at each ``xi_max`` of ``grid``; returns a list of DopReport."""
    return [worst_case_dop(template, ErrorBox(float(x)), zeta_samples, seed=seed) for x in grid]


def scaling_exponent(template, grid=DEFAULT_GRID, zeta_samples=ZETA_SAMPLES, seed=0):
    """Exponent k in worst-case DOP ~ xi_max**k, fitted on a geometric grid."""
    grid = check_grid(grid)
    reports = sweep(template, grid, zeta_samples, seed)
    return fit_slope(grid, [r.dop_max for r in reports])


# --- uniform retarder chain ---------------------------------------------------

CHAIN_RETARDATION = acos(-1 / 3)
CHAIN_KIND = PlateKind.custom(CHAIN_RETARDATION)


def find_collision(ms, weights=(-2, -1, 0, 1, 2)):
    """First weight vector k (not all zero) with sum(k_i * m_i) == 0, else None.

    A single retarder matrix carries harmonics 0, +-1, +-2 of its rotation,
    so such a k means two plates' harmonics can beat down to DC.
    """
    for k in itertools.product(weights, repeat=len(ms)):
        if any(k) and sum(ki * mi for ki, mi in zip(k, ms)) == 0:
            return k
    return None


def uniform_chain_dop(n, ms, allow_collision=False):
    """Residual DOP of ``n`` plates of retardation arccos(-1/3) driven at ``ms``.

    With collision-free frequencies the mean of the product factorizes into
    the product of single-plate means diag(1/3, 1/3, -1/3), giving 3**-n.

    Raises
    ------
    ChainCollisionError
        If ``ms`` admits a harmonic collision and ``allow_collision`` is false.
    """
    ms = [int(m) for m in ms]
    if n < 1 or len(ms) != n:
        raise ValueError(f"need n >= 1 frequencies, got n={n}, ms={ms}")
    spec = CascadeSpec.build([CHAIN_KIND] * n, ms)
    dop = residual_dop_max(spec)
    collision = find_collision(ms)
    if collision is not None:
        log.warning("uniform chain %s has harmonic collision %s", ms, collision)
        if not allow_collision:
            raise ChainCollisionError(ms, collision, dop)
    return dop
