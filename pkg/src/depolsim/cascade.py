"""Rotating-waveplate cascades and their exact time-averaged rotation matrix.

Each plate's eigenmode azimuth advances as ``psi = 2*pi*m*tau + zeta`` with
normalized time ``tau = t/T``.  Plates are listed in light-path order; the
cascade matrix puts the last plate leftmost.
"""

import itertools
from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import isfinite, pi

import numpy as np

from .stokes import dop_for_input, retarder_matrix, singular_values

XI_SANITY = 0.5


@dataclass(frozen=True)
class PlateKind:
    """Nominal retardation of a plate.  Use HALF, QUARTER or ``PlateKind.custom``."""

    name: str
    nominal: float

    @classmethod
    def custom(cls, delta0):
        if not isfinite(delta0):
            raise ValueError(f"custom retardation must be finite, got {delta0!r}")
        return cls("CUSTOM", float(delta0))

    @property
    def short(self):
        return {"HALF": "H", "QUARTER": "Q"}.get(self.name, "C")


HALF = PlateKind("HALF", pi)
QUARTER = PlateKind("QUARTER", pi / 2)


@dataclass(frozen=True)
class PlateSpec:
    kind: PlateKind
    m: int
    xi: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m == 0:
            raise ValueError(f"drive frequency m must be a nonzero integer, got {self.m!r}")
        if not abs(self.xi) <= XI_SANITY:
            raise ValueError(f"retardation error |xi| must be <= {XI_SANITY}, got {self.xi!r}")
        if not isfinite(self.zeta):
            raise ValueError(f"start phase must be finite, got {self.zeta!r}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def delta(self):
        return self.kind.nominal + self.xi


@dataclass(frozen=True)
class CascadeSpec:
    plates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "plates", tuple(self.plates))
        if not self.plates:
            raise ValueError("a cascade needs at least one plate")

    @classmethod
    def build(cls, kinds, ms, xis=None, zetas=None):
        """Convenience constructor from parallel per-plate sequences."""
        n = len(kinds)
        xis = [0.0] * n if xis is None else list(xis)
        zetas = [0.0] * n if zetas is None else list(zetas)
        if not (len(ms) == len(xis) == len(zetas) == n):
            raise ValueError("kinds, ms, xis and zetas must have equal length")
        return cls(tuple(PlateSpec(k, m, x, z) for k, m, x, z in zip(kinds, ms, xis, zetas)))

    def __len__(self):
        return len(self.plates)

    @property
    def kinds(self):
        return tuple(p.kind for p in self.plates)

    @property
    def ms(self):
        return tuple(p.m for p in self.plates)

    @property
    def xis(self):
        return tuple(p.xi for p in self.plates)

    @property
    def zetas(self):
        return tuple(p.zeta for p in self.plates)

    @property
    def max_harmonic(self):
        """Highest harmonic of 1/T present in any cascade-matrix entry."""
        return 2 * sum(abs(m) for m in self.ms)

    def with_errors(self, xis):
        return CascadeSpec(tuple(replace(p, xi=float(x)) for p, x in zip(self.plates, xis)))

    def with_phases(self, zetas):
        return CascadeSpec(tuple(replace(p, zeta=float(z)) for p, z in zip(self.plates, zetas)))

    def negated(self):
        return CascadeSpec(tuple(replace(p, m=-p.m) for p in self.plates))

    def reversed(self):
        return CascadeSpec(self.plates[::-1])


def default_samples(ms):
    return 2 * (2 * sum(abs(int(m)) for m in ms)) + 2


def batch_cascade_matrix(nominals, ms, xis, zetas, taus):
    """Cascade matrices for many error/phase configurations and times.

    Parameters
    ----------
    nominals, ms : sequence, length p
    xis, zetas : array_like, shape (B, p)
    taus : array_like, shape (N,)

    Returns
    -------
    numpy.ndarray
        Shape (B, N, 3, 3).
    """
    xis = np.atleast_2d(np.asarray(xis, float))
    zetas = np.atleast_2d(np.asarray(zetas, float))
    taus = np.asarray(taus, float)
    b = max(xis.shape[0], zetas.shape[0])
    out = np.broadcast_to(np.eye(3), (b, taus.size, 3, 3))
    for i, (nominal, m) in enumerate(zip(nominals, ms)):
        delta = (nominal + xis[:, i])[:, None]
        psi = 2 * pi * m * taus[None, :] + zetas[:, i][:, None]
        out = retarder_matrix(delta, psi) @ out
    return out


def batch_time_average(nominals, ms, xis, zetas, n_samples=None):
    """Time-averaged cascade matrices, shape (B, 3, 3).

    Entries are trigonometric polynomials in tau with harmonics up to
    ``H = 2*sum|m|``, so uniform sampling with ``N > H`` points returns the
    exact mean (no nonzero harmonic aliases onto DC).
    """
    harmonic = 2 * sum(abs(int(m)) for m in ms)
    n = default_samples(ms) if n_samples is None else int(n_samples)
    if n < harmonic + 1:
        raise ValueError(f"need at least {harmonic + 1} samples for exact averaging, got {n}")
    taus = np.arange(n) / n
    return batch_cascade_matrix(nominals, ms, xis, zetas, taus).mean(axis=1)


def plate_harmonics(delta):
    """Fourier coefficients of a retarder matrix in its azimuth.

    ``retarder_matrix(delta, psi) == sum_h coef[..., h + 2, :, :] * exp(1j*h*psi)``
    for h in -2..2.  Returns complex array of shape ``delta.shape + (5, 3, 3)``.
    """
    delta = np.asarray(delta, float)
    cd, sd = np.cos(delta), np.sin(delta)
    half = (1 - cd) / 2
    coef = np.zeros(delta.shape + (5, 3, 3), complex)
    # h = 0: axially symmetric part
    coef[..., 2, 0, 0] = (1 + cd) / 2
    coef[..., 2, 1, 1] = (1 + cd) / 2
    coef[..., 2, 2, 2] = cd
    for h, sign in ((2, -1j), (-2, 1j)):
        coef[..., h + 2, 0, 0] = half / 2
        coef[..., h + 2, 1, 1] = -half / 2
        coef[..., h + 2, 0, 1] = sign * half / 2
        coef[..., h + 2, 1, 0] = sign * half / 2
    for h, sign in ((1, -1j), (-1, 1j)):
        coef[..., h + 2, 1, 2] = -sd / 2
        coef[..., h + 2, 2, 1] = sd / 2
        coef[..., h + 2, 0, 2] = sign * sd / 2
        coef[..., h + 2, 2, 0] = -sign * sd / 2
    return coef


@lru_cache(maxsize=None)
def resonant_tuples(ms):
    """Harmonic index tuples (h_1..h_p), |h_i| <= 2, with sum(h_i * m_i) == 0."""
    grid = np.array(list(itertools.product(range(-2, 3), repeat=len(ms))), dtype=int)
    return grid[grid @ np.asarray(ms, dtype=int) == 0]


MAX_HARMONIC_PLATES = 7


def batch_mean_grid(nominals, ms, xis, zetas):
    """Exact time averages for every pair of error vector and phase tuple.

    Expands each plate in its azimuth harmonics and keeps only the products
    whose frequencies cancel, which are exactly the DC terms.  The error
    vectors enter only through the coefficient products and the phases only
    through unit phase factors, so an (nx, nz) grid costs one einsum.

    Parameters
    ----------
    nominals, ms : sequence, length p
    xis : array_like, shape (nx, p)
    zetas : array_like, shape (nz, p)

    Returns
    -------
    numpy.ndarray
        Real array of shape (nx, nz, 3, 3).
    """
    ms = tuple(int(m) for m in ms)
    if len(ms) > MAX_HARMONIC_PLATES:
        raise ValueError(f"harmonic expansion limited to {MAX_HARMONIC_PLATES} plates")
    xis = np.atleast_2d(np.asarray(xis, float))
    zetas = np.atleast_2d(np.asarray(zetas, float))
    tuples = resonant_tuples(ms)

    prod = None
    for i, nominal in enumerate(nominals):
        coef = plate_harmonics(nominal + xis[:, i])[:, tuples[:, i] + 2]
        prod = coef if prod is None else coef @ prod
    phases = np.exp(1j * (zetas @ tuples.T))
    return np.einsum("xkij,zk->xzij", prod, phases).real


def cascade_matrix_at(spec, tau):
    """Rotation matrix of the cascade at normalized time ``tau = t/T``."""
    nominals = [k.nominal for k in spec.kinds]
    return batch_cascade_matrix(nominals, spec.ms, [spec.xis], [spec.zetas], [tau])[0, 0]


def time_average(spec, n_samples=None):
    """Exact mean of the cascade matrix over one depolarization interval.

    ``n_samples`` defaults to ``2H + 2`` with ``H = 2*sum|m_i|``; any value
    ``>= H + 1`` is exact.
    """
    nominals = [k.nominal for k in spec.kinds]
    return batch_time_average(nominals, spec.ms, [spec.xis], [spec.zetas], n_samples)[0]


def residual_dop_max(spec):
    """Worst-case residual DOP over all input polarizations (largest singular value)."""
    return float(singular_values(time_average(spec))[0])


def residual_dop_for_input(spec, s_in):
    """Residual DOP for one fully polarized input Stokes vector."""
    return dop_for_input(time_average(spec), s_in)
