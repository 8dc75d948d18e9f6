"""Pointwise analytic transforms of measures.

* ``G(z) = int dmu(t) / (z - t)`` on the upper half-plane and ``F = 1/G``;
* ``psi(z) = int tz / (1 - tz) dmu(t)`` and ``eta = psi / (1 + psi)`` on
  ``C \\ [0, inf)`` for measures on the half-line, and on the unit disk for
  measures on the circle.

The public functions check their domains.  The underscored helpers are the
raw formulas used by the subordination solver; they accept any point off the
support and are conjugation-symmetric by construction.
"""

import numpy as np

from .errors import DomainError, EtaPoleError, UnsupportedInputError
from .measures import CircleMeasure, PosMeasure, RealMeasure

__all__ = [
    "cauchy_transform",
    "reciprocal_cauchy",
    "psi_transform",
    "eta_transform",
    "NEAR_REAL",
]

NEAR_REAL = 1e-12


def _out(values, z):
    return complex(values) if np.ndim(z) == 0 else values


def _cauchy(mu, z):
    """``G_mu(z)`` and ``G_mu'(z)`` from the closed-form pieces and exact atoms."""
    z = np.asarray(z, complex)
    g = np.zeros(z.shape, complex)
    dg = np.zeros(z.shape, complex)
    if mu.atoms:
        d = z[..., None] - mu.positions
        g = g + np.sum(mu.masses / d, axis=-1)
        dg = dg - np.sum(mu.masses / (d * d), axis=-1)
    for piece, w in mu.pieces:
        g = g + w * piece.cauchy(z)
        dg = dg + w * piece.cauchy_deriv(z)
    return g, dg


def _psi_tilde(mu, w):
    """``psi(w) / w`` and its derivative in ``w``.

    Dividing out ``w`` keeps ``eta(w) / w`` accurate near ``w = 0``, where the
    multiplicative solver starts.
    """
    w = np.asarray(w, complex)
    val = np.zeros(w.shape, complex)
    der = np.zeros(w.shape, complex)
    if mu.atoms:
        t = mu.points if mu.carrier == "circle" else mu.positions
        q = 1.0 / (1.0 - t * w[..., None])
        val = val + np.sum(mu.masses * t * q, axis=-1)
        der = der + np.sum(mu.masses * t * t * q * q, axis=-1)
    for piece, weight in mu.pieces:
        if mu.carrier == "circle":
            v, d = piece.psi_tilde(w)
        else:
            zeta = 1.0 / w
            g, dg = piece.cauchy(zeta), piece.cauchy_deriv(zeta)
            v = zeta * zeta * g - zeta
            d = -zeta * zeta * (2.0 * zeta * g + zeta * zeta * dg - 1.0)
        val = val + weight * v
        der = der + weight * d
    return val, der


def _eta_quotient(mu, w):
    """``k(w) = eta(w) / w`` and ``k'(w)``."""
    pt, dpt = _psi_tilde(mu, w)
    w = np.asarray(w, complex)
    denom = 1.0 + w * pt
    return pt / denom, (dpt - pt * pt) / (denom * denom)


def _require_real(mu):
    if not isinstance(mu, RealMeasure):
        raise TypeError(f"expected a measure on the real line, got {type(mu).__name__}")


def cauchy_transform(mu, z):
    """Cauchy transform ``G_mu(z)`` for ``Im z > 0``.

    Points with ``Im z < 1e-12`` are rejected; boundary values are the business
    of the density and atom modules.
    """
    _require_real(mu)
    zz = np.asarray(z, complex)
    if np.any(zz.imag < NEAR_REAL):
        raise DomainError("cauchy transform needs Im z >= 1e-12", code="near-real")
    return _out(_cauchy(mu, zz)[0], z)


def reciprocal_cauchy(mu, z):
    """``F_mu(z) = 1 / G_mu(z)``; satisfies ``Im F(z) >= Im z``."""
    g = cauchy_transform(mu, z)
    return 1.0 / g


def _check_psi_domain(mu, z):
    if isinstance(mu, CircleMeasure):
        if np.any(np.abs(z) >= 1.0):
            raise DomainError("psi/eta of a circle measure need |z| < 1", code="outside-disk")
    elif isinstance(mu, PosMeasure):
        if mu.is_delta_zero:
            raise UnsupportedInputError("psi is undefined for delta_0", code="psi-undefined-for-delta-zero")
        if np.any((np.abs(z.imag) < NEAR_REAL) & (z.real >= 0.0)):
            raise DomainError("psi/eta need z outside [0, inf)", code="on-positive-axis")
    else:
        raise TypeError(f"psi/eta need a PosMeasure or CircleMeasure, got {type(mu).__name__}")


def psi_transform(mu, z):
    """``psi_mu(z) = int tz / (1 - tz) dmu(t)``."""
    zz = np.asarray(z, complex)
    _check_psi_domain(mu, zz)
    return _out(zz * _psi_tilde(mu, zz)[0], z)


def eta_transform(mu, z):
    """``eta_mu(z) = psi_mu(z) / (1 + psi_mu(z))``.

    Raises `EtaPoleError` where ``1 + psi`` vanishes.
    """
    zz = np.asarray(z, complex)
    _check_psi_domain(mu, zz)
    psi = zz * _psi_tilde(mu, zz)[0]
    if np.any(psi == -1.0):
        raise EtaPoleError("eta has a pole: 1 + psi(z) = 0")
    return _out(psi / (1.0 + psi), z)
