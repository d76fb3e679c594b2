"""Stokes-space primitives: retarder rotation matrices and singular values.

Stokes vectors are plain length-3 numpy arrays (S1, S2, S3) and matrices are
``(3, 3)`` arrays. Every function broadcasts over leading axes so that whole
batches of time samples or error configurations can be pushed through at once.
All angles are in radians.
"""

import warnings

import numpy as np

UNIT_TOL = 1e-9
APPROX_WARN_XI = 0.3


def retarder_matrix(delta, psi):
    """Exact rotation matrix of a linear retarder in normalized Stokes space.

    The retarder rotates the Poincare sphere by ``delta`` about the equatorial
    axis ``(cos psi, sin psi, 0)``.  ``psi`` is the azimuth of the eigenmode on
    the sphere (twice the physical plate angle).

    Parameters
    ----------
    delta : float or array_like
        Retardation in radians.
    psi : float or array_like
        Eigenmode azimuth on the Poincare equator in radians.

    Returns
    -------
    numpy.ndarray
        Array of shape ``broadcast(delta, psi).shape + (3, 3)``.
    """
    delta, psi = np.broadcast_arrays(np.asarray(delta, float), np.asarray(psi, float))
    cd, sd = np.cos(delta), np.sin(delta)
    c2, s2 = np.cos(2 * psi), np.sin(2 * psi)
    cp, sp = np.cos(psi), np.sin(psi)
    plus, minus = (1 + cd) / 2, (1 - cd) / 2

    out = np.empty(delta.shape + (3, 3))
    out[..., 0, 0] = plus + c2 * minus
    out[..., 0, 1] = s2 * minus
    out[..., 0, 2] = sp * sd
    out[..., 1, 0] = s2 * minus
    out[..., 1, 1] = plus - c2 * minus
    out[..., 1, 2] = -cp * sd
    out[..., 2, 0] = -sp * sd
    out[..., 2, 1] = cp * sd
    out[..., 2, 2] = cd
    return out


def _warn_large_xi(xi):
    if np.any(np.abs(xi) > APPROX_WARN_XI):
        warnings.warn(
            f"linearized waveplate model used with |xi| > {APPROX_WARN_XI}",
            RuntimeWarning,
            stacklevel=3,
        )


def qwp_approx_matrix(xi, psi):
    """First-order matrix of a quarterwave plate with retardation pi/2 + xi."""
    xi, psi = np.broadcast_arrays(np.asarray(xi, float), np.asarray(psi, float))
    _warn_large_xi(xi)
    c2, s2 = np.cos(2 * psi), np.sin(2 * psi)
    cp, sp = np.cos(psi), np.sin(psi)

    out = np.empty(xi.shape + (3, 3))
    out[..., 0, 0] = (1 - xi) / 2 + c2 * (1 + xi) / 2
    out[..., 0, 1] = s2 * (1 + xi) / 2
    out[..., 0, 2] = sp
    out[..., 1, 0] = s2 * (1 + xi) / 2
    out[..., 1, 1] = (1 - xi) / 2 - c2 * (1 + xi) / 2
    out[..., 1, 2] = -cp
    out[..., 2, 0] = -sp
    out[..., 2, 1] = cp
    out[..., 2, 2] = -xi
    return out


def hwp_approx_matrix(xi, psi):
    """First-order matrix of a halfwave plate with retardation pi + xi."""
    xi, psi = np.broadcast_arrays(np.asarray(xi, float), np.asarray(psi, float))
    _warn_large_xi(xi)
    c2, s2 = np.cos(2 * psi), np.sin(2 * psi)
    cp, sp = np.cos(psi), np.sin(psi)

    out = np.empty(xi.shape + (3, 3))
    out[..., 0, 0] = c2
    out[..., 0, 1] = s2
    out[..., 0, 2] = -xi * sp
    out[..., 1, 0] = s2
    out[..., 1, 1] = -c2
    out[..., 1, 2] = xi * cp
    out[..., 2, 0] = xi * sp
    out[..., 2, 1] = -xi * cp
    out[..., 2, 2] = -1.0
    return out


def apply(m, s):
    """Matrix-vector product ``m @ s`` (batched over leading axes)."""
    return np.einsum("...ij,...j->...i", np.asarray(m, float), np.asarray(s, float))


# one-sided Jacobi column pairs
_PAIRS = ((0, 1), (0, 2), (1, 2))


def singular_values(m, tol=1e-15, max_sweeps=30):
    """Singular values of one or many 3x3 matrices, in descending order.

    Uses one-sided (Hestenes) Jacobi: plane rotations applied to the columns
    of ``m`` until they are mutually orthogonal.  Each rotation is the Jacobi
    rotation that annihilates one off-diagonal entry of ``m.T @ m``, so this
    is cyclic Jacobi on the symmetric eigenproblem carried out without ever
    forming ``m.T @ m``; small singular values therefore keep full accuracy.

    Parameters
    ----------
    m : array_like
        Array of shape ``(..., 3, 3)``.

    Returns
    -------
    numpy.ndarray
        Shape ``(..., 3)``, ``sigma[..., 0] >= sigma[..., 1] >= sigma[..., 2]``.
    """
    a = np.array(m, dtype=float, copy=True)
    if a.shape[-2:] != (3, 3):
        raise ValueError(f"expected (..., 3, 3) matrices, got shape {a.shape}")

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(max_sweeps):
            worst = 0.0
            for p, q in _PAIRS:
                ap, aq = a[..., :, p], a[..., :, q]
                alpha = np.sum(ap * ap, axis=-1)
                beta = np.sum(aq * aq, axis=-1)
                gamma = np.sum(ap * aq, axis=-1)
                scale = np.sqrt(alpha * beta)
                off = np.where(scale > 0, np.abs(gamma) / scale, 0.0)
                worst = max(worst, float(np.max(off, initial=0.0)))

                active = (gamma != 0) & (off > tol)
                zeta = (beta - alpha) / (2 * gamma)
                t = np.sign(zeta) / (np.abs(zeta) + np.sqrt(1 + zeta * zeta))
                t = np.where(zeta == 0, 1.0, t)
                t = np.where(active & np.isfinite(t), t, 0.0)
                c = 1 / np.sqrt(1 + t * t)
                s = c * t

                new_p = c[..., None] * ap - s[..., None] * aq
                new_q = s[..., None] * ap + c[..., None] * aq
                a[..., :, p] = new_p
                a[..., :, q] = new_q
            if worst <= tol:
                break

    sigma = np.sqrt(np.sum(a * a, axis=-2))
    return -np.sort(-sigma, axis=-1)


def dop_for_input(mean_m, s_in):
    """Residual degree of polarization ``|mean_m @ s_in|`` for a unit input.

    Raises
    ------
    ValueError
        If ``s_in`` is not a unit Stokes vector (within 1e-9).
    """
    s_in = np.asarray(s_in, float)
    if s_in.shape != (3,):
        raise ValueError(f"Stokes vector must have 3 components, got shape {s_in.shape}")
    norm = np.linalg.norm(s_in)
    if abs(norm - 1) > UNIT_TOL:
        raise ValueError(f"input Stokes vector must be unit length, |s| = {norm:.12g}")
    return float(np.linalg.norm(apply(mean_m, s_in)))


CARDINAL_INPUTS = {
    "+S1": np.array([1.0, 0.0, 0.0]),
    "-S1": np.array([-1.0, 0.0, 0.0]),
    "+S2": np.array([0.0, 1.0, 0.0]),
    "-S2": np.array([0.0, -1.0, 0.0]),
    "+S3": np.array([0.0, 0.0, 1.0]),
    "-S3": np.array([0.0, 0.0, -1.0]),
}
