"""Absolutely continuous building blocks for measures.

Line pieces (`Semicircle`, `Arcsine`, `Uniform`, `MarchenkoPastur`,
`Tabulated`) know their density, distribution function and Cauchy transform
``G(z) = int f(t) / (z - t) dt`` together with its derivative.  All square
roots are taken as ``sqrt(z - a) * sqrt(z - b)`` with principal branches, which
behaves like ``z`` at infinity on both half-planes and stays consistent on the
real axis off the support.

Circle pieces (`ArcUniform`, `TabulatedAngular`) are densities in the angle
with respect to ``d theta`` and expose ``psi(w) / w`` instead.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar

import numpy as np

from .quadrature import integrate

TWO_PI = 2.0 * np.pi

__all__ = [
    "DensityPiece",
    "Semicircle",
    "Arcsine",
    "Uniform",
    "MarchenkoPastur",
    "Tabulated",
    "ArcUniform",
    "TabulatedAngular",
    "LINE_KINDS",
    "CIRCLE_KINDS",
]


def _branch_sqrt(z, a, b):
    return np.sqrt(z - a) * np.sqrt(z - b)


def _log1p(u):
    """``log(1 + u)`` accurate for small complex ``u`` (numpy's complex log1p is not)."""
    u = np.asarray(u, complex)
    w = 1.0 + u
    d = w - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d == 0.0, u, np.log(w) * (u / np.where(d == 0.0, 1.0, d)))


class DensityPiece:
    """Common interface; concrete pieces are frozen dataclasses."""

    kind: ClassVar[str] = ""
    carrier: ClassVar[str] = "line"

    def params(self):
        raise NotImplementedError

    @property
    def support(self):
        raise NotImplementedError

    def problems(self):
        """Return a list of ``(code, message)`` invariant violations."""
        lo, hi = self.support
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            return [("bad-piece", f"{self.kind}: support endpoints must be finite and ordered")]
        return []

    def total(self):
        """Integral of the density over its support by quadrature."""
        lo, hi = self.support
        return float(integrate(self.pdf, lo, hi))

    def interval_mass(self, a, b):
        return float(np.clip(self.cdf(b) - self.cdf(a), 0.0, 1.0))


# --------------------------------------------------------------------------
# line pieces


@dataclass(frozen=True)
class Semicircle(DensityPiece):
    center: float
    radius: float

    kind: ClassVar[str] = "semicircle"

    def params(self):
        return (self.center, self.radius)

    @property
    def support(self):
        return (self.center - self.radius, self.center + self.radius)

    def pdf(self, x):
        u = (np.asarray(x, float) - self.center) / self.radius
        return 2.0 / (np.pi * self.radius) * np.sqrt(np.clip(1.0 - u * u, 0.0, None))

    def cdf(self, x):
        u = np.clip((np.asarray(x, float) - self.center) / self.radius, -1.0, 1.0)
        return 0.5 + (u * np.sqrt(1.0 - u * u) + np.arcsin(u)) / np.pi

    # 2 (w - s) / r**2 rewritten as 2 / (w + s), which does not cancel for large w
    def cauchy(self, z):
        w = z - self.center
        return 2.0 / (w + _branch_sqrt(w, -self.radius, self.radius))

    def cauchy_deriv(self, z):
        w = z - self.center
        s = _branch_sqrt(w, -self.radius, self.radius)
        return -2.0 * (1.0 + w / s) / (w + s) ** 2


@dataclass(frozen=True)
class Arcsine(DensityPiece):
    a: float
    b: float

    kind: ClassVar[str] = "arcsine"

    def params(self):
        return (self.a, self.b)

    @property
    def support(self):
        return (self.a, self.b)

    def pdf(self, x):
        x = np.asarray(x, float)
        inside = (x > self.a) & (x < self.b)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 1.0 / (np.pi * np.sqrt((x - self.a) * (self.b - x)))
        return np.where(inside, val, 0.0)

    def cdf(self, x):
        t = np.clip((np.asarray(x, float) - self.a) / (self.b - self.a), 0.0, 1.0)
        return 2.0 / np.pi * np.arcsin(np.sqrt(t))

    def cauchy(self, z):
        return 1.0 / _branch_sqrt(z, self.a, self.b)

    def cauchy_deriv(self, z):
        s = _branch_sqrt(z, self.a, self.b)
        return -(2.0 * z - self.a - self.b) / (2.0 * s**3)


@dataclass(frozen=True)
class Uniform(DensityPiece):
    a: float
    b: float

    kind: ClassVar[str] = "uniform"

    def params(self):
        return (self.a, self.b)

    @property
    def support(self):
        return (self.a, self.b)

    def pdf(self, x):
        x = np.asarray(x, float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def cdf(self, x):
        return np.clip((np.asarray(x, float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def cauchy(self, z):
        return _log1p((self.b - self.a) / (z - self.b)) / (self.b - self.a)

    def cauchy_deriv(self, z):
        return (1.0 / (z - self.a) - 1.0 / (z - self.b)) / (self.b - self.a)


@dataclass(frozen=True)
class MarchenkoPastur(DensityPiece):
    """Marchenko-Pastur law with unit variance and ratio in ``(0, 1]``."""

    ratio: float

    kind: ClassVar[str] = "marchenko-pastur"

    def params(self):
        return (self.ratio,)

    @property
    def support(self):
        s = np.sqrt(self.ratio)
        return ((1.0 - s) ** 2, (1.0 + s) ** 2)

    def problems(self):
        if not (0.0 < self.ratio <= 1.0):
            return [("bad-piece", "marchenko-pastur: ratio must lie in (0, 1]")]
        return super().problems()

    def pdf(self, x):
        x = np.asarray(x, float)
        a, b = self.support
        inside = (x > a) & (x < b)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.sqrt(np.clip((b - x) * (x - a), 0.0, None)) / (2.0 * np.pi * self.ratio * x)
        return np.where(inside, val, 0.0)

    @cached_property
    def _cdf_table(self):
        # x = mid - half*cos(phi) makes the integrand smooth in phi
        a, b = self.support
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        phi = np.linspace(0.0, np.pi, 4097)
        nodes, weights = np.polynomial.legendre.leggauss(12)
        lo, hi = phi[:-1], phi[1:]
        p = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * nodes
        x = mid - half * np.cos(p)
        vals = self.pdf(x) * half * np.sin(p)
        seg = 0.5 * (hi - lo) * np.sum(weights * vals, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        return phi, cum / cum[-1]

    def cdf(self, x):
        a, b = self.support
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        x = np.clip(np.asarray(x, float), a, b)
        phi = np.arccos(np.clip((mid - x) / half, -1.0, 1.0))
        grid, cum = self._cdf_table
        return np.interp(phi, grid, cum)

    # (z + lam - 1 - s) / (2 lam z) rewritten as 2 / (z + lam - 1 + s)
    def cauchy(self, z):
        a, b = self.support
        return 2.0 / (z + self.ratio - 1.0 + _branch_sqrt(z, a, b))

    def cauchy_deriv(self, z):
        a, b = self.support
        s = _branch_sqrt(z, a, b)
        ds = (2.0 * z - a - b) / (2.0 * s)
        return -2.0 * (1.0 + ds) / (z + self.ratio - 1.0 + s) ** 2


def _pl_check(xs, ys, name):
    out = []
    if xs.ndim != 1 or xs.size < 2 or xs.size != ys.size:
        return [("bad-piece", f"{name}: need matching abscissae/values with at least two points")]
    if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(ys)):
        out.append(("bad-piece", f"{name}: non-finite table entries"))
    if np.any(np.diff(xs) <= 0):
        out.append(("bad-piece", f"{name}: abscissae must be strictly increasing"))
    if np.any(ys < 0):
        out.append(("bad-piece", f"{name}: values must be nonnegative"))
    trap = float(np.trapezoid(ys, xs))
    if abs(trap - 1.0) > 1e-6:
        out.append(("piece-normalization", f"{name}: trapezoid integral {trap!r} differs from 1"))
    return out


def _pl_cdf(xs, ys, x):
    """Distribution function of the piecewise-linear density ``(xs, ys)``."""
    x = np.asarray(x, float)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs))])
    k = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, xs.size - 2)
    t = np.clip(x - xs[k], 0.0, xs[k + 1] - xs[k])
    slope = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k])
    val = cum[k] + ys[k] * t + 0.5 * slope * t * t
    return np.clip(np.where(x <= xs[0], 0.0, np.where(x >= xs[-1], 1.0, val)), 0.0, 1.0)


@dataclass(frozen=True)
class Tabulated(DensityPiece):
    """Piecewise-linear density through ``(abscissae[k], values[k])``.

    The table is used after dividing by its trapezoid integral, so the
    transforms are exact for the interpolant.
    """

    abscissae: tuple
    values: tuple
    source: str = ""

    kind: ClassVar[str] = "tabulated"

    def __post_init__(self):
        object.__setattr__(self, "abscissae", tuple(float(x) for x in self.abscissae))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __eq__(self, other):
        if not isinstance(other, Tabulated):
            return NotImplemented
        return self.abscissae == other.abscissae and self.values == other.values

    def __hash__(self):
        return hash((self.abscissae, self.values))

    def params(self):
        return ()

    @cached_property
    def _xs(self):
        return np.asarray(self.abscissae, float)

    @cached_property
    def _ys(self):
        ys = np.asarray(self.values, float)
        trap = np.trapezoid(ys, self._xs)
        return ys / trap if trap > 0 else ys

    @property
    def support(self):
        return (self.abscissae[0], self.abscissae[-1])

    def problems(self):
        return _pl_check(np.asarray(self.abscissae), np.asarray(self.values), "tabulated")

    def total(self):
        return float(np.trapezoid(self._ys, self._xs))

    def pdf(self, x):
        return np.interp(np.asarray(x, float), self._xs, self._ys, left=0.0, right=0.0)

    def cdf(self, x):
        return _pl_cdf(self._xs, self._ys, x)

    def _segments(self, z):
        xs, ys = self._xs, self._ys
        slope = np.diff(ys) / np.diff(xs)
        z = np.asarray(z)[..., None]
        logs = np.log(z - xs)
        lin = ys[:-1] + slope * (z - xs[:-1])
        return xs, slope, z, logs, lin

    def cauchy(self, z):
        xs, slope, z, logs, lin = self._segments(z)
        dlog = logs[..., :-1] - logs[..., 1:]
        return np.sum(lin * dlog, axis=-1) - np.sum(slope * np.diff(xs))

    def cauchy_deriv(self, z):
        xs, slope, z, logs, lin = self._segments(z)
        dlog = logs[..., :-1] - logs[..., 1:]
        inv = 1.0 / (z - xs)
        return np.sum(slope * dlog + lin * (inv[..., :-1] - inv[..., 1:]), axis=-1)


LINE_KINDS = {
    cls.kind: cls for cls in (Semicircle, Arcsine, Uniform, MarchenkoPastur, Tabulated)
}


# --------------------------------------------------------------------------
# circle pieces


@dataclass(frozen=True)
class ArcUniform(DensityPiece):
    """Uniform angular density on the counterclockwise arc ``(start, end)``.

    ``ArcUniform(0, 2*pi)`` is the Haar measure.
    """

    start: float
    end: float

    kind: ClassVar[str] = "arc"
    carrier: ClassVar[str] = "circle"

    def params(self):
        return (self.start, self.end)

    @property
    def support(self):
        return (self.start, self.end)

    @property
    def length(self):
        return self.end - self.start

    def problems(self):
        if not (0.0 <= self.start < TWO_PI and self.start < self.end <= self.start + TWO_PI):
            return [("bad-piece", "arc: need 0 <= start < 2*pi and start < end <= start + 2*pi")]
        return []

    def total(self):
        return 1.0

    def _parts(self):
        if self.end <= TWO_PI:
            return [(self.start, self.end)]
        return [(self.start, TWO_PI), (0.0, self.end - TWO_PI)]

    def pdf(self, theta):
        theta = np.mod(np.asarray(theta, float), TWO_PI)
        inside = np.mod(theta - self.start, TWO_PI) < self.length
        if self.length >= TWO_PI:
            inside = np.ones_like(theta, bool)
        return np.where(inside, 1.0 / self.length, 0.0)

    def cdf(self, theta):
        theta = np.asarray(theta, float)
        out = np.zeros_like(theta)
        for lo, hi in self._parts():
            out = out + np.clip(theta - lo, 0.0, hi - lo)
        return np.clip(out / self.length, 0.0, 1.0)

    def fourier(self, n):
        """``int zeta**n dmu`` for integer ``n >= 1``."""
        n = np.asarray(n, float)
        return (np.exp(1j * n * self.end) - np.exp(1j * n * self.start)) / (1j * n * self.length)

    def psi_tilde(self, w):
        """``psi(w) / w`` and its derivative, for ``|w| < 1``."""
        w = np.asarray(w, complex)
        small = np.abs(w) < 0.1
        val = np.empty_like(w)
        der = np.empty_like(w)
        if np.any(small):
            ws = w[small]
            n = np.arange(1, 41)
            c = self.fourier(n)
            powers = ws[..., None] ** (n - 1)
            val[small] = np.sum(c * powers, axis=-1)
            dpow = np.where(n > 1, (n - 1) * ws[..., None] ** np.maximum(n - 2, 0), 0.0)
            der[small] = np.sum(c * dpow, axis=-1)
        big = ~small
        if np.any(big):
            wb = w[big]
            ea, eb = np.exp(1j * self.start), np.exp(1j * self.end)
            la, lb = np.log(1.0 - ea * wb), np.log(1.0 - eb * wb)
            dla, dlb = -ea / (1.0 - ea * wb), -eb / (1.0 - eb * wb)
            scale = 1j * self.length
            val[big] = (la - lb) / (scale * wb)
            der[big] = ((dla - dlb) * wb - (la - lb)) / (scale * wb * wb)
        return val, der


@dataclass(frozen=True)
class TabulatedAngular(DensityPiece):
    """Piecewise-linear angular density on ``[abscissae[0], abscissae[-1]]``."""

    abscissae: tuple
    values: tuple
    source: str = ""

    kind: ClassVar[str] = "tabulated"
    carrier: ClassVar[str] = "circle"

    __post_init__ = Tabulated.__post_init__
    __eq__ = Tabulated.__eq__
    __hash__ = Tabulated.__hash__
    _xs = Tabulated._xs
    _ys = Tabulated._ys
    total = Tabulated.total
    cdf = Tabulated.cdf

    def params(self):
        return ()

    @property
    def support(self):
        return (self.abscissae[0], self.abscissae[-1])

    def problems(self):
        out = _pl_check(np.asarray(self.abscissae), np.asarray(self.values), "tabulated")
        if self.abscissae and (self.abscissae[0] < 0.0 or self.abscissae[-1] > TWO_PI):
            out.append(("angle-range", "tabulated: angles must lie in [0, 2*pi]"))
        return out

    def pdf(self, theta):
        return np.interp(np.mod(np.asarray(theta, float), TWO_PI), self._xs, self._ys, left=0.0, right=0.0)

    @cached_property
    def _rule(self):
        nodes, weights = np.polynomial.legendre.leggauss(16)
        lo, hi = self._xs[:-1, None], self._xs[1:, None]
        theta = 0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes
        wts = 0.5 * (hi - lo) * weights * self.pdf(theta)
        return np.exp(1j * theta.ravel()), wts.ravel()

    def psi_tilde(self, w):
        zeta, wts = self._rule
        w = np.asarray(w, complex)[..., None]
        denom = 1.0 - zeta * w
        return np.sum(wts * zeta / denom, axis=-1), np.sum(wts * zeta * zeta / denom**2, axis=-1)


CIRCLE_KINDS = {cls.kind: cls for cls in (ArcUniform, TabulatedAngular)}
