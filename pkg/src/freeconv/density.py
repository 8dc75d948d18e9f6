"""Densities and interval masses from boundary values of the transforms.

The absolutely continuous part is recovered by Stieltjes inversion,
``f(x) = -lim Im G(x + i eps) / pi`` (on the circle, the Poisson-kernel analogue
``Re(1 + 2 psi) / (2 pi)``), with the limit taken by Richardson extrapolation
along a decreasing ladder of ``eps`` values.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .evaluators import as_evaluator
from .measures import CircleMeasure, PosMeasure, RealMeasure
from .pieces import Tabulated, TabulatedAngular

__all__ = [
    "DensityGrid",
    "DEFAULT_LADDER",
    "richardson",
    "check_ladder",
    "stieltjes_invert",
    "boundary_value",
    "interval_mass_estimate",
    "recover_measure",
]

DEFAULT_LADDER = tuple(float(e) for e in np.geomspace(1e-2, 1e-5, 7))
NEGATIVE_TOL = 1e-8
EXCLUSION = 1e-3
_GL_ORDER = 10
MASS_TOL = 1e-5
MASS_ROUNDS = 24
RELIABLE_ABS = 1e-3
RELIABLE_REL = 0.05


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Recovered density on a grid.

    ``flagged`` marks points where the solver failed on some rung or the
    extrapolant was negative beyond ``NEGATIVE_TOL``; their density is still
    reported (clamped at 0).
    """

    abscissae: np.ndarray
    density: np.ndarray
    epsilon_ladder: tuple
    extrapolation_error: np.ndarray
    flagged: np.ndarray = field(default=None)
    carrier: str = "line"

    def __post_init__(self):
        if self.flagged is None:
            object.__setattr__(self, "flagged", np.zeros(self.abscissae.shape, bool))

    def __len__(self):
        return self.abscissae.size

    def mass(self):
        """Trapezoid integral of the density over the grid."""
        return float(np.trapezoid(self.density, self.abscissae))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("abscissa,density\n")
            for x, f in zip(self.abscissae, self.density):
                fh.write(f"{float(x)!r},{float(f)!r}\n")

    def metadata(self):
        return {
            "carrier": self.carrier,
            "n_points": int(self.abscissae.size),
            "epsilon_ladder": [float(e) for e in self.epsilon_ladder],
            "extrapolation": "quadratic in eps through the last three rungs",
            "max_extrapolation_error": float(np.max(self.extrapolation_error, initial=0.0)),
            "flagged": [int(i) for i in np.flatnonzero(self.flagged)],
        }

    def save(self, csv_path, json_path=None):
        """Two-column CSV plus a JSON sidecar (default: same stem, ``.json``)."""
        self.to_csv(csv_path)
        if json_path is None:
            json_path = csv_path.rsplit(".", 1)[0] + ".json"
        with open(json_path, "w") as fh:
            json.dump({"schema": "freeconv/1", **self.metadata()}, fh, indent=2, sort_keys=True)
            fh.write("\n")


def check_ladder(eps):
    eps = tuple(float(e) for e in eps)
    if len(eps) < 3:
        raise ValueError("the eps ladder needs at least three rungs")
    if any(not e > 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("the eps ladder must be positive and strictly decreasing")
    return eps


def _neville_at_zero(e, v):
    """Value at 0 of the quadratic through ``(e[k], v[k])``, ``k = 0, 1, 2``."""
    e0, e1, e2 = e
    l0 = e1 * e2 / ((e0 - e1) * (e0 - e2))
    l1 = e0 * e2 / ((e1 - e0) * (e1 - e2))
    l2 = e0 * e1 / ((e2 - e0) * (e2 - e1))
    return l0 * v[0] + l1 * v[1] + l2 * v[2]


def richardson(eps, values):
    """Extrapolate ``values[k]`` (sampled at ``eps[k]``, axis 0) to ``eps = 0``.

    Returns the extrapolant from the last three rungs and, as error estimate,
    its distance to the extrapolant from the three rungs before the last.
    """
    e = np.asarray(eps, float)
    v = np.asarray(values)
    limit = _neville_at_zero(e[-3:], v[-3:])
    if e.size >= 4:
        prev = _neville_at_zero(e[-4:-1], v[-4:-1])
    else:
        prev = v[-1]
    return limit, np.abs(limit - prev)


def stieltjes_invert(evaluator, interval, n_points, eps_ladder=DEFAULT_LADDER, carrier=None):
    """Density on ``n_points`` equispaced abscissae of ``interval``.

    ``evaluator`` may be an evaluator from `freeconv.evaluators`, a measure, or
    a vectorized callable ``G`` (line carrier unless ``carrier`` says otherwise).
    """
    ev = as_evaluator(evaluator, carrier or "line")
    eps = check_ladder(eps_ladder)
    if n_points < 2:
        raise ValueError("a density grid needs at least two points")
    a, b = map(float, interval)
    if not b > a:
        raise ValueError("interval must have positive length")
    x = np.linspace(a, b, int(n_points))
    vals, ok = ev.density_samples(x, eps)
    limit, err = richardson(eps, vals)
    finite = np.isfinite(limit)
    flagged = ~np.all(ok, axis=0) | ~finite | (limit < -NEGATIVE_TOL)
    density = np.where(finite, np.maximum(limit, 0.0), 0.0)
    err = np.where(np.isfinite(err), err, np.inf)
    return DensityGrid(x, density, eps, err, flagged, ev.carrier)


def boundary_value(evaluator, x, eps_ladder=DEFAULT_LADDER):
    """Extrapolated ``G(x + i0)`` on the line, with error estimates and success flags."""
    ev = as_evaluator(evaluator)
    if ev.carrier != "line":
        raise ValueError("boundary values are only defined for the line carrier")
    eps = np.asarray(check_ladder(eps_ladder))
    x = np.atleast_1d(np.asarray(x, float))
    g, ok = ev.cauchy(x[None, :] + 1j * eps[:, None])
    limit, err = richardson(eps, g)
    return limit, err, np.all(ok, axis=0)


def _atom_positions(atoms):
    out = []
    for a in atoms:
        if hasattr(a, "alpha"):
            out.append(float(a.alpha))
        elif isinstance(a, (tuple, list)):
            out.append(float(a[0]))
        else:
            out.append(float(a))
    return out


def _graded_edges(c, d, levels=12):
    """Panel edges refined geometrically toward both ends of ``(c, d)``."""
    mid = 0.5 * (c + d)
    half = 0.5 * (d - c)
    frac = np.concatenate([[0.0], 4.0 ** -np.arange(levels, -1, -1)])
    return np.unique(np.concatenate([c + half * frac, [mid], d - half * frac[::-1]]))


def _gl_rule(a, b):
    x0, w0 = np.polynomial.legendre.leggauss(_GL_ORDER)
    a, b = np.asarray(a)[:, None], np.asarray(b)[:, None]
    return 0.5 * (a + b) + 0.5 * (b - a) * x0, 0.5 * (b - a) * w0


def _adaptive_mass(density, panels, tol, max_rounds=MASS_ROUNDS):
    """Adaptive composite Gauss-Legendre over ``panels`` (rows ``(a, b)``).

    A panel is accepted when its rule agrees with the sum over its two halves
    to within its share ``tol * length / total length``; otherwise it is
    bisected.  Interior square-root edges of the density are found this way.
    """
    total_len = float(np.sum(panels[:, 1] - panels[:, 0]))
    total = 0.0
    for rnd in range(max_rounds):
        a, b = panels[:, 0], panels[:, 1]
        m = 0.5 * (a + b)
        xs, ws = zip(*(_gl_rule(lo, hi) for lo, hi in ((a, b), (a, m), (m, b))))
        vals = density(np.concatenate([x.ravel() for x in xs])).reshape(3, -1, _GL_ORDER)
        whole, left, right = (np.sum(w * v, axis=1) for w, v in zip(ws, vals))
        err = np.abs(whole - left - right)
        ok = err <= tol * (b - a) / total_len
        if rnd == max_rounds - 1:
            ok[:] = True
        total += float(np.sum(left[ok] + right[ok]))
        bad = ~ok
        if not np.any(bad):
            break
        panels = np.concatenate([np.stack([a[bad], m[bad]], 1), np.stack([m[bad], b[bad]], 1)])
    return total


def interval_mass_estimate(evaluator, interval, atoms=(), eps_ladder=DEFAULT_LADDER, carrier=None,
                           margin=EXCLUSION, tol=MASS_TOL):
    """Mass of the open interval (arc) from the recovered density.

    Neighbourhoods of half-width ``margin * length`` around the given atoms
    (positions, ``(position, mass)`` pairs or atom reports) are left out, since
    the Poisson kernel of an atom swamps the density estimate there.  The
    quadrature is adaptive with absolute target ``tol``; the result is
    nonnegative.
    """
    ev = as_evaluator(evaluator, carrier or "line")
    eps = check_ladder(eps_ladder)
    a, b = map(float, interval)
    if not b > a:
        return 0.0
    delta = margin * (b - a)
    cuts = []
    for p in _atom_positions(atoms):
        if ev.carrier == "circle":
            # bring the atom angle into [a, a + 2 pi)
            p = a + np.mod(p - a, 2.0 * np.pi)
            cuts.extend([(p - delta, p + delta), (p - 2.0 * np.pi - delta, p - 2.0 * np.pi + delta)])
        else:
            cuts.append((p - delta, p + delta))
    pieces = [(a, b)]
    for lo, hi in cuts:
        nxt = []
        for c, d in pieces:
            if hi <= c or lo >= d:
                nxt.append((c, d))
                continue
            if lo > c:
                nxt.append((c, lo))
            if hi < d:
                nxt.append((hi, d))
        pieces = nxt
    pieces = [(c, d) for c, d in pieces if d - c > 1e-14 * (b - a)]
    if not pieces:
        return 0.0
    edges = [_graded_edges(c, d) for c, d in pieces]
    panels = np.concatenate([np.stack([e[:-1], e[1:]], 1) for e in edges])

    def density(x):
        vals, _ = ev.density_samples(x, eps)
        limit, _ = richardson(eps, vals)
        return np.where(np.isfinite(limit), np.maximum(limit, 0.0), 0.0)

    return _adaptive_mass(density, panels, tol)


def recover_measure(grid, atoms=(), carrier=None):
    """Measure with the given atoms plus the grid density as a tabulated piece.

    Grid values within ``EXCLUSION`` times the grid length of an atom, flagged
    values and values whose extrapolation error exceeds both ``RELIABLE_ABS``
    and ``RELIABLE_REL`` times the value are replaced by linear interpolation
    from the remaining points.  Masses are
    renormalized if the atoms alone exceed total mass one.
    """
    carrier = carrier or grid.carrier
    pairs = []
    for a in atoms:
        if hasattr(a, "alpha"):
            pairs.append((float(a.alpha), float(a.mass)))
        else:
            pairs.append((float(a[0]), float(a[1])))
    x = np.asarray(grid.abscissae, float)
    f = np.asarray(grid.density, float)
    if carrier == "halfline":
        keep = x >= 0.0
        x, f = x[keep], f[keep]
    err = np.asarray(grid.extrapolation_error, float)
    flagged = np.asarray(grid.flagged, bool)
    if carrier == "halfline":
        err, flagged = err[keep], flagged[keep]
    delta = EXCLUSION * (x[-1] - x[0])
    # unreliable extrapolants (edge singularities, solver failures) are interpolated over
    near = flagged | ~(err <= np.maximum(RELIABLE_ABS, RELIABLE_REL * f))
    for p, _ in pairs:
        near |= np.abs(x - p) <= delta
    if np.any(near) and np.count_nonzero(~near) >= 2:
        f = f.copy()
        f[near] = np.interp(x[near], x[~near], f[~near])
    atom_total = sum(m for _, m in pairs)
    cont = float(np.trapezoid(f, x)) if x.size >= 2 else 0.0
    cls = {"line": RealMeasure, "halfline": PosMeasure, "circle": CircleMeasure}[carrier]
    pieces = []
    if cont > 0.0 and atom_total < 1.0 - 1e-9:
        table = (TabulatedAngular if carrier == "circle" else Tabulated)(tuple(x), tuple(f / cont))
        pieces.append((table, 1.0 - atom_total))
    else:
        pairs = [(p, m / atom_total) for p, m in pairs]
    if carrier == "circle":
        pairs = [(float(np.mod(p, 2.0 * np.pi)), m) for p, m in pairs]
    return cls(atoms=pairs, pieces=pieces)
