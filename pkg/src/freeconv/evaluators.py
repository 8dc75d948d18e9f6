"""Boundary evaluators: a uniform view of ``G`` / ``psi`` near the carrier.

Density recovery and atom probing need three things near a boundary point:
the smoothed density at distance ``eps``, the pole strength at a candidate
atom, and (for convolutions) the subordination functions there.  Each
evaluator provides them for its carrier:

=========  ==============================  ==============================
carrier    point at distance ``eps``       pole strength
=========  ==============================  ==============================
line       ``x + i eps``                   ``i eps G(x + i eps)``
halfline   ``x + i eps``                   ``i eps G(x + i eps)``
circle     ``(1 - eps) e^{-i theta}``      ``eps psi((1 - eps) e^{-i theta})``
=========  ==============================  ==============================

On the half-line ``G(x) = w / (1 - eta(w))`` with ``w = 1/x``, and the
subordination functions live in the ``w`` variable, at ``1/alpha + i eps``.
"""

import numpy as np

from .measures import CircleMeasure, PosMeasure
from .subordination import DEFAULT_MAX_ITER, DEFAULT_TOL, solve
from .transforms import _cauchy, _psi_tilde

__all__ = ["MeasureEvaluator", "FreeConvolution", "CallableEvaluator", "as_evaluator", "CARRIER_OF_OP"]

CARRIER_OF_OP = {"add": "line", "mul-pos": "halfline", "mul-circle": "circle"}
_TWO_PI = 2.0 * np.pi


def _carrier_of(mu):
    if isinstance(mu, CircleMeasure):
        return "circle"
    if isinstance(mu, PosMeasure):
        return "halfline"
    return "line"


class _Boundary:
    """Shared kernels; subclasses supply ``cauchy`` (line, half-line) or ``psi`` (circle)."""

    carrier = "line"

    def density_samples(self, x, eps):
        """Smoothed densities, shape ``(len(eps), len(x))``, and success flags."""
        x = np.asarray(x, float)
        e = np.asarray(eps, float)[:, None]
        if self.carrier == "circle":
            psi, ok = self.psi((1.0 - e) * np.exp(-1j * x))
            return (1.0 + 2.0 * psi).real / _TWO_PI, ok
        g, ok = self.cauchy(x + 1j * e)
        return -g.imag / np.pi, ok

    def pole_strength(self, alpha, eps):
        """Pole strengths along the ladder; shape ``alpha.shape + (len(eps),)``."""
        e = np.asarray(eps, float)
        alpha = np.asarray(alpha, float)[..., None]
        if self.carrier == "circle":
            psi, ok = self.psi((1.0 - e) * np.exp(-1j * alpha))
            return e * psi, ok
        g, ok = self.cauchy(alpha + 1j * e)
        return 1j * e * g, ok


class MeasureEvaluator(_Boundary):
    """Evaluator for a measure given directly (closed-form transforms)."""

    def __init__(self, mu):
        self.measure = mu
        self.carrier = _carrier_of(mu)

    def cauchy(self, z):
        z = np.asarray(z, complex)
        return _cauchy(self.measure, z)[0], np.ones(z.shape, bool)

    def psi(self, z):
        z = np.asarray(z, complex)
        return z * _psi_tilde(self.measure, z)[0], np.ones(z.shape, bool)


class CallableEvaluator(_Boundary):
    """Wrap a vectorized callable ``G`` on the upper half-plane (line carrier)."""

    def __init__(self, func, carrier="line"):
        self.func = func
        self.carrier = carrier

    def cauchy(self, z):
        z = np.asarray(z, complex)
        return np.asarray(self.func(z), complex), np.ones(z.shape, bool)

    def psi(self, z):
        z = np.asarray(z, complex)
        return np.asarray(self.func(z), complex), np.ones(z.shape, bool)


class FreeConvolution(_Boundary):
    """``mu1 [+] mu2`` (``op="add"``) or ``mu1 [x] mu2`` (``"mul-pos"``, ``"mul-circle"``).

    Every evaluation also records the worst residuals seen, which the command
    line front end reports.
    """

    def __init__(self, mu1, mu2, op="add", tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        if op not in CARRIER_OF_OP:
            raise ValueError(f"unknown operation {op!r}")
        self.mu1, self.mu2, self.op = mu1, mu2, op
        self.carrier = CARRIER_OF_OP[op]
        self.tol, self.max_iter = tol, max_iter
        self.stats = {"points": 0, "unconverged": 0, "max_iterations": 0,
                      "max_residual_subord": 0.0, "max_residual_identity": 0.0}

    def solve(self, z):
        """Subordination batch at solver-variable points ``z``."""
        batch = solve(self.mu1, self.mu2, np.asarray(z, complex), self.op, self.tol, self.max_iter)
        s = self.stats
        s["points"] += batch.z.size
        s["unconverged"] += int(np.count_nonzero(~batch.converged))
        if batch.z.size:
            s["max_iterations"] = max(s["max_iterations"], int(batch.iterations.max()))
            s["max_residual_subord"] = max(s["max_residual_subord"], float(np.nanmax(batch.residual_subord)))
            s["max_residual_identity"] = max(s["max_residual_identity"], float(np.nanmax(batch.residual_identity)))
        return batch

    def cauchy(self, z):
        z = np.asarray(z, complex)
        if self.op == "add":
            b = self.solve(z)
            return b.value, b.converged
        if self.op == "mul-pos":
            w = 1.0 / z
            b = self.solve(w)
            return w / (1.0 - b.value), b.converged
        raise ValueError("circle convolutions have no Cauchy transform here; use psi")

    def eta(self, z):
        b = self.solve(z)
        return b.value, b.converged

    def psi(self, z):
        eta, ok = self.eta(z)
        return eta / (1.0 - eta), ok

    def boundary_points(self, alpha, eps):
        """Solver-variable points approaching the boundary point attached to ``alpha``."""
        e = np.asarray(eps, float)
        alpha = np.asarray(alpha, float)[..., None]
        if self.carrier == "line":
            return alpha + 1j * e
        if self.carrier == "halfline":
            return 1.0 / alpha + 1j * e
        return (1.0 - e) * np.exp(-1j * alpha)

    def omega(self, j, z):
        b = self.solve(z)
        return b.omega(j), b.converged


def as_evaluator(obj, carrier="line"):
    """Accept an evaluator, a measure or a plain callable ``G``."""
    if isinstance(obj, _Boundary):
        return obj
    if callable(obj):
        return CallableEvaluator(obj, carrier)
    return MeasureEvaluator(obj)
