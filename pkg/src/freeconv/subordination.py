"""Subordination functions for free additive and multiplicative convolution.

Additive case.  With ``h_j(w) = F_{mu_j}(w) - w`` the subordination function
``omega_1(z)`` is the fixed point of

    w  ->  z + h_2(z + h_1(w)),

a holomorphic self-map of the upper half-plane whose image lies in
``Im w >= Im z``; by Denjoy-Wolff it has exactly one fixed point there.  Then
``omega_2 = z + h_1(omega_1)`` makes ``omega_1 + omega_2 = z + F(z)`` hold by
construction and ``G_1(omega_1) = G_2(omega_2)`` is checked independently.

Multiplicative case (half-line and circle).  With ``k_j(w) = eta_j(w) / w``,
``omega_1`` is the fixed point of ``w -> z k_2(z k_1(w))`` and
``omega_2 = z k_1(omega_1)``, so that ``z eta(z) = omega_1 omega_2``.

Numerics.  Plain iteration contracts slowly near the boundary.  Each target
point is therefore reached along a continuation path that starts far from the
boundary (where iteration converges in a few steps) and approaches the target
geometrically; on every rung Newton's method is warm-started from the previous
rung with a first-order predictor.  A Newton step that would leave the domain
or increase the residual is halved; when halving fails the plain iteration
step is taken instead.  Points on which Newton stalls fall back to plain
iteration within the iteration budget.  Any root found inside the domain is
the fixed point, by uniqueness.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedInputError
from .measures import CircleMeasure, PosMeasure, RealMeasure
from .transforms import _cauchy, _eta_quotient

__all__ = [
    "SubordinationSample",
    "SubordinationBatch",
    "solve_additive",
    "solve_multiplicative_pos",
    "solve_multiplicative_circle",
    "solve",
    "convolution_cauchy",
    "convolution_eta",
    "convolution_psi",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000
MAX_ITER_CAP = 1_000_000
_RATIO = 4.0
_NEWTON_STEPS = 60
_HALVINGS = 30
_EPS = np.finfo(float).eps
_RANGE_SLACK = 1e-9


@dataclass(frozen=True)
class SubordinationSample:
    """Solution at one point.

    ``value`` is ``G(z)`` of the additive convolution, or ``eta(z)`` of the
    multiplicative one.  ``residual_subord`` is ``|G_1(w_1) - G_2(w_2)|`` (resp.
    with ``eta``) and ``residual_identity`` the defect of
    ``w_1 + w_2 = z + 1/G`` (resp. ``w_1 w_2 = z eta``).
    """

    z: complex
    omega1: complex
    omega2: complex
    value: complex
    iterations: int
    residual_subord: float
    residual_identity: float
    converged: bool

    @property
    def convolution_value(self):
        return self.value


@dataclass(frozen=True)
class SubordinationBatch:
    """Array-valued counterpart of `SubordinationSample`."""

    z: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray
    value: np.ndarray
    iterations: np.ndarray
    residual_subord: np.ndarray
    residual_identity: np.ndarray
    converged: np.ndarray

    def __len__(self):
        return self.z.size

    def __getitem__(self, i):
        return SubordinationSample(
            complex(self.z.flat[i]),
            complex(self.omega1.flat[i]),
            complex(self.omega2.flat[i]),
            complex(self.value.flat[i]),
            int(self.iterations.flat[i]),
            float(self.residual_subord.flat[i]),
            float(self.residual_identity.flat[i]),
            bool(self.converged.flat[i]),
        )

    def omega(self, j):
        return self.omega1 if j == 1 else self.omega2


# --------------------------------------------------------------------------
# problem definitions


def _geometric(start, stop, n_max=200):
    """Rungs from ``start`` down to ``stop`` (both > 0), ratio at most 4."""
    if start <= stop:
        return np.array([stop])
    n = int(np.ceil(np.log(start / stop) / np.log(_RATIO)))
    return np.geomspace(start, stop, min(n, n_max) + 1)


def _stack_paths(paths):
    depth = max(len(p) for p in paths)
    out = np.empty((depth, len(paths)), complex)
    for i, p in enumerate(paths):
        out[: len(p), i] = p
        out[len(p):, i] = p[-1]
    return out


class _Additive:
    carrier = "line"

    def __init__(self, mu1, mu2):
        self.mu1, self.mu2 = mu1, mu2
        spread = 0.0
        for mu in (mu1, mu2):
            lo, hi = mu.hull
            spread += hi - lo
        self.far = 4.0 * (1.0 + spread)

    @staticmethod
    def _h(mu, w):
        g, dg = _cauchy(mu, w)
        return 1.0 / g - w, -dg / (g * g) - 1.0

    def map(self, w, z):
        h1, dh1 = self._h(self.mu1, w)
        u = z + h1
        h2, dh2 = self._h(self.mu2, u)
        return z + h2, dh2 * dh1, 1.0 + dh2, u

    def in_domain(self, w, z, u):
        return (w.imag > 0.0) & (u.imag > 0.0)

    def boundary_distance(self, z):
        return z.imag

    def in_range(self, w1, w2, z):
        """Both subordination functions map into ``Im w >= Im z``."""
        slack = _RANGE_SLACK * np.maximum(1.0, np.maximum(np.abs(w1), np.abs(w2)))
        return (w1.imag >= z.imag - slack) & (w2.imag >= z.imag - slack)

    def prepare(self, z):
        if np.any(z.imag <= 0.0):
            raise DomainError("additive subordination needs Im z > 0", code="outside-upper-half-plane")
        return z, np.zeros(z.shape, bool)

    def path(self, z):
        paths = []
        for zi in z:
            ys = _geometric(max(zi.imag, self.far), zi.imag)
            paths.append(zi.real + 1j * ys)
        return _stack_paths(paths)

    def finish(self, w, z):
        g1, _ = _cauchy(self.mu1, w)
        omega2 = z + 1.0 / g1 - w
        g2, _ = _cauchy(self.mu2, omega2)
        res_sub = np.abs(g1 - g2)
        res_id = np.abs(w + omega2 - z - 1.0 / g1)
        scale = np.maximum(1.0, np.maximum(np.abs(w), np.abs(omega2)))
        # G is ill-conditioned near atoms; F = 1/G is not, hence the |G|^2 factor
        return omega2, g1, res_sub, res_id, scale * np.maximum(1.0, np.abs(g1)) ** 2, scale * np.maximum(1.0, np.abs(g1))


class _Multiplicative:
    def __init__(self, mu1, mu2):
        self.mu1, self.mu2 = mu1, mu2

    def map(self, w, z):
        k1, dk1 = _eta_quotient(self.mu1, w)
        u = z * k1
        k2, dk2 = _eta_quotient(self.mu2, u)
        return z * k2, z * dk2 * z * dk1, k2 + z * dk2 * k1, u

    def finish(self, w, z):
        k1, _ = _eta_quotient(self.mu1, w)
        omega2 = z * k1
        k2, _ = _eta_quotient(self.mu2, omega2)
        eta = w * k1
        res_sub = np.abs(eta - omega2 * k2)
        res_id = np.abs(z * eta - w * omega2)
        scale = np.maximum(1.0, np.maximum(np.abs(w), np.abs(omega2)))
        big = np.maximum(1.0, np.abs(eta))
        return omega2, eta, res_sub, res_id, scale * big, scale * big * np.maximum(1.0, np.abs(z))


class _MultiplicativePos(_Multiplicative):
    carrier = "halfline"

    def __init__(self, mu1, mu2):
        for mu in (mu1, mu2):
            if mu.is_delta_zero:
                raise UnsupportedInputError("multiplicative convolution with delta_0 is degenerate",
                                            code="delta-zero")
        super().__init__(mu1, mu2)
        self.far = 4.0 * (1.0 + mu1.top) * (1.0 + mu2.top)

    def in_domain(self, w, z, u):
        real = z.imag == 0.0
        upper = (w.imag > 0.0) & (u.imag > 0.0)
        return np.where(real, (w.real < 0.0) & (u.real < 0.0), upper)

    def boundary_distance(self, z):
        return np.where(z.imag == 0.0, np.abs(z), np.abs((1.0 / z).imag))

    def in_range(self, w1, w2, z):
        """``arg w >= arg z`` off the axis (``z`` has been moved to the upper half-plane)."""
        arg = np.angle(z)
        upper = z.imag > 0.0
        ok = [np.where(upper, np.angle(w) >= arg - _RANGE_SLACK, True) for w in (w1, w2)]
        return ok[0] & ok[1]

    def prepare(self, z):
        if np.any((z.imag == 0.0) & (z.real >= 0.0)):
            raise DomainError("multiplicative subordination needs z outside [0, inf)", code="on-positive-axis")
        flip = z.imag < 0.0
        return np.where(flip, z.conj(), z), flip

    def path(self, z):
        paths = []
        for zi in z:
            if zi.imag == 0.0:
                paths.append(np.array([zi]))
                continue
            zeta = np.conj(1.0 / zi)
            ss = _geometric(max(zeta.imag, self.far), zeta.imag)
            p = 1.0 / np.conj(zeta.real + 1j * ss)
            p[-1] = zi
            paths.append(p)
        return _stack_paths(paths)


class _MultiplicativeCircle(_Multiplicative):
    carrier = "circle"

    def __init__(self, mu1, mu2):
        for mu in (mu1, mu2):
            if abs(mu.first_moment) < 1e-14:
                raise UnsupportedInputError("circle subordination needs nonzero first moments",
                                            code="zero-first-moment")
        super().__init__(mu1, mu2)

    def in_domain(self, w, z, u):
        return (np.abs(w) < 1.0) & (np.abs(u) < 1.0)

    def boundary_distance(self, z):
        return 1.0 - np.abs(z)

    def in_range(self, w1, w2, z):
        """Schwarz lemma: ``|w| <= |z|``."""
        bound = np.abs(z) * (1.0 + _RANGE_SLACK) + _RANGE_SLACK
        return (np.abs(w1) <= bound) & (np.abs(w2) <= bound)

    def prepare(self, z):
        if np.any(np.abs(z) >= 1.0):
            raise DomainError("circle subordination needs |z| < 1", code="outside-disk")
        return z, np.zeros(z.shape, bool)

    def path(self, z):
        paths = []
        for zi in z:
            r = abs(zi)
            r0 = min(r, 0.25)
            gaps = _geometric(1.0 - r0, 1.0 - r)
            p = (1.0 - gaps) * np.exp(1j * np.angle(zi))
            p[-1] = zi
            paths.append(p)
        return _stack_paths(paths)


# --------------------------------------------------------------------------
# iteration kernels


def _scale(w):
    return np.maximum(1.0, np.abs(w))


def _fixed_point(problem, z, w, tol, budget):
    """Plain iteration; convergence judged by ``|step| / (1 - q)`` with ``q`` the observed ratio."""
    w = w.copy()
    iters = np.zeros(z.shape, int)
    done = np.zeros(z.shape, bool)
    prev = np.full(z.shape, np.inf)
    active = np.arange(z.size)
    while active.size:
        f = problem.map(w[active], z[active])[0]
        step = np.abs(f - w[active])
        ok = np.isfinite(f)
        w[active[ok]] = f[ok]
        iters[active] += 1
        q = np.clip(step / prev[active], 0.0, 0.999)
        prev[active] = step
        conv = ok & (step / (1.0 - q) <= tol * _scale(w[active]))
        done[active[conv]] = True
        keep = ~conv & ok & (iters[active] < budget[active])
        active = active[keep]
    return w, done, iters


def _newton(problem, z, w, tol, max_steps=_NEWTON_STEPS):
    w = w.copy()
    iters = np.zeros(z.shape, int)
    done = np.zeros(z.shape, bool)
    active = np.arange(z.size)
    for _ in range(max_steps):
        if active.size == 0:
            break
        za, wa = z[active], w[active]
        f, fw, _, _ = problem.map(wa, za)
        phi = f - wa
        step = phi / (fw - 1.0)
        step = np.where(np.isfinite(step), step, -phi)
        res0 = np.abs(phi)
        # when f'(w) is close to 1 the fixed point is only determined up to
        # rounding divided by |1 - f'(w)|
        floor = np.maximum(tol, 16.0 * _EPS / np.abs(fw - 1.0)) * _scale(wa)
        lam = np.ones(za.shape)
        accepted = np.zeros(za.shape, bool)
        wn = f.copy()
        for _ in range(_HALVINGS):
            pend = np.flatnonzero(~accepted)
            if pend.size == 0:
                break
            cand = wa[pend] - lam[pend] * step[pend]
            fn, _, _, un = problem.map(cand, za[pend])
            inside = problem.in_domain(cand, za[pend], un) & np.isfinite(fn)
            small = lam[pend] * np.abs(step[pend]) <= floor[pend]
            better = np.abs(fn - cand) <= res0[pend] * (1.0 - 1e-4 * lam[pend])
            good = inside & (better | small)
            wn[pend[good]] = cand[good]
            accepted[pend[good]] = True
            lam[pend[~good]] *= 0.5
        iters[active] += 1
        # only full Newton steps certify convergence
        conv = accepted & (lam == 1.0) & (np.abs(wn - wa) <= floor)
        w[active] = np.where(np.isfinite(wn), wn, wa)
        done[active[conv]] = True
        active = active[~conv]
    return w, done, iters


def _run(problem, z, tol, max_iter):
    z = np.asarray(z, complex)
    shape = z.shape
    flat = z.ravel()
    # iterating in omega_2 instead is well conditioned where F_2 has a pole near
    # omega_2, so each point tries both orientations before the slow fallback
    swapped = type(problem)(problem.mu2, problem.mu1)
    attempts = [(problem, False), (swapped, False), (problem, True), (swapped, True)]
    out = None
    for prob, fallback in attempts:
        todo = np.arange(flat.size) if out is None else np.flatnonzero(~out[-1])
        if todo.size == 0:
            break
        res = _solve_flat(prob, flat[todo], tol, max_iter, fallback)
        if prob is swapped:
            res = (res[0], res[2], res[1]) + res[3:]
        if out is None:
            out = res
            continue
        take = res[-1]
        out[4][todo] += res[4]
        for k in (1, 2, 3, 5, 6, 7):
            out[k][todo[take]] = res[k][take]
    return SubordinationBatch(*(a.reshape(shape) for a in out))


def _solve_flat(problem, z, tol, max_iter, fallback=True):
    zt, flip = problem.prepare(z)
    dist = problem.boundary_distance(zt)
    with np.errstate(divide="ignore"):
        scaled = np.where(dist < 1e-6, np.minimum(MAX_ITER_CAP, np.ceil(1.0 / dist)), max_iter)
    budget = np.maximum(max_iter, scaled).astype(int)
    path = problem.path(zt)

    with np.errstate(all="ignore"):
        z0 = path[0]
        w, _, it_fp = _fixed_point(problem, z0, z0.copy(), np.sqrt(tol), np.minimum(budget, 500))
        w, done, it_nt = _newton(problem, z0, w, tol)
        iters = it_fp + it_nt
        for level in range(1, path.shape[0]):
            zk, zp = path[level], path[level - 1]
            move = np.flatnonzero(zk != zp)
            if move.size == 0:
                continue
            _, fw, fz, _ = problem.map(w[move], zp[move])
            pred = w[move] - (zk[move] - zp[move]) * fz / (fw - 1.0)
            _, _, _, up = problem.map(pred, zk[move])
            pred = np.where(problem.in_domain(pred, zk[move], up) & np.isfinite(pred), pred, w[move])
            wm, dm, im = _newton(problem, zk[move], pred, tol)
            iters[move] += im
            # stalled points: plain iteration from the last good rung, then Newton again
            stalled = move[~dm]
            if fallback and stalled.size:
                left = np.maximum(budget[stalled] - iters[stalled], 1)
                ws, _, i2 = _fixed_point(problem, zk[stalled], w[stalled], tol, left)
                ws, d2, i3 = _newton(problem, zk[stalled], ws, tol)
                wm[~dm] = ws
                dm[~dm] = d2
                iters[stalled] += i2 + i3
            w[move] = wm
            done[move] = dm

        omega2, value, res_sub, res_id, sub_scale, id_scale = problem.finish(w, zt)

    # residuals are reported in absolute terms; the flag allows for the scale of the values
    converged = (done & (res_sub <= 10.0 * tol * sub_scale) & (res_id <= 10.0 * tol * id_scale)
                 & (iters <= budget) & problem.in_range(w, omega2, zt))
    omega1 = np.where(flip, w.conj(), w)
    omega2 = np.where(flip, omega2.conj(), omega2)
    value = np.where(flip, value.conj(), value)
    return z, omega1, omega2, value, iters, res_sub, res_id, converged


def _problem(mu1, mu2, op):
    if op == "add":
        if not (isinstance(mu1, RealMeasure) and isinstance(mu2, RealMeasure)):
            raise TypeError("additive convolution needs two measures on the real line")
        return _Additive(mu1, mu2)
    if op == "mul-pos":
        if not (isinstance(mu1, PosMeasure) and isinstance(mu2, PosMeasure)):
            raise TypeError("mul-pos needs two PosMeasure instances")
        return _MultiplicativePos(mu1, mu2)
    if op == "mul-circle":
        if not (isinstance(mu1, CircleMeasure) and isinstance(mu2, CircleMeasure)):
            raise TypeError("mul-circle needs two CircleMeasure instances")
        return _MultiplicativeCircle(mu1, mu2)
    raise ValueError(f"unknown operation {op!r}")


def solve(mu1, mu2, z, op="add", tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Vectorized solver; returns a `SubordinationBatch` shaped like ``z``."""
    return _run(_problem(mu1, mu2, op), z, tol, max_iter)


def solve_additive(mu1, mu2, z, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Subordination functions of ``mu1 [+] mu2`` at one point of the upper half-plane."""
    return solve(mu1, mu2, np.array([z]), "add", tol, max_iter)[0]


def solve_multiplicative_pos(mu1, mu2, z, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Subordination functions of ``mu1 [x] mu2`` on the half-line at ``z`` off ``[0, inf)``."""
    return solve(mu1, mu2, np.array([z]), "mul-pos", tol, max_iter)[0]


def solve_multiplicative_circle(mu1, mu2, z, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Subordination functions of ``mu1 [x] mu2`` on the circle at ``|z| < 1``."""
    return solve(mu1, mu2, np.array([z]), "mul-circle", tol, max_iter)[0]


def _out(values, z):
    return complex(values) if np.ndim(z) == 0 else values


def convolution_cauchy(mu1, mu2, z, op="add", tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Cauchy transform of the convolution at ``z`` in the upper half-plane.

    For ``op="mul-pos"`` this goes through ``G(1/w) = w / (1 - eta(w))``.
    """
    zz = np.asarray(z, complex)
    if op == "add":
        return _out(solve(mu1, mu2, zz, op, tol, max_iter).value, z)
    if op == "mul-pos":
        w = 1.0 / zz
        eta = solve(mu1, mu2, w, op, tol, max_iter).value
        return _out(w / (1.0 - eta), z)
    raise ValueError(f"no Cauchy transform for operation {op!r}")


def convolution_eta(mu1, mu2, z, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """``eta`` of the multiplicative convolution (half-line or circle, by measure type)."""
    op = "mul-circle" if isinstance(mu1, CircleMeasure) else "mul-pos"
    zz = np.asarray(z, complex)
    return _out(solve(mu1, mu2, zz, op, tol, max_iter).value, z)


def convolution_psi(mu1, mu2, z, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    eta = convolution_eta(mu1, mu2, z, tol, max_iter)
    return eta / (1.0 - eta)
