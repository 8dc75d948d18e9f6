"""Free indecomposability certificates.

Two atoms ``alpha < beta`` of ``mu1 [+] mu2`` bounding an interval of zero
mass force ``mu1`` or ``mu2`` to be a point mass; the same holds for products
on the half-line when ``0 < alpha`` and on the circle for an empty open arc
between two atoms.  So a measure with such a gap is freely indecomposable.
Finitely supported measures are indecomposable as well.  A verdict of
``not-certified`` says nothing either way.

(Measures whose singular continuous part is nontrivial are also known to be
indecomposable; that criterion has no robust numerical test and is not used.)
"""

import json
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .density import DEFAULT_LADDER, EXCLUSION, boundary_value, interval_mass_estimate
from .errors import CarrierMismatchError
from .measures import CircleMeasure, PosMeasure, RealMeasure

__all__ = [
    "Gap",
    "Certificate",
    "GAP_TOL_COMPUTED",
    "scan_gaps",
    "computed_gaps",
    "certify_indecomposable",
    "certify_convolution",
    "gap_zeros",
]

GAP_TOL_COMPUTED = 1e-2
_RULES = {"line": "gap-atoms-line", "halfline": "gap-atoms-halfline", "circle": "gap-atoms-circle"}
_TWO_PI = 2.0 * np.pi


class Gap(NamedTuple):
    """Open interval (or counterclockwise arc) between two atoms."""

    alpha: float
    beta: float
    alpha_mass: float
    beta_mass: float
    mass: float


@dataclass(frozen=True)
class Certificate:
    rule: str
    verdict: str
    carrier: str
    witness: dict = None
    also_applicable: tuple = ()
    notes: str = ""

    @property
    def certified(self):
        return self.verdict == "certified"

    def to_dict(self):
        return {
            "schema": "freeconv/1",
            "rule": self.rule,
            "verdict": self.verdict,
            "carrier": self.carrier,
            "witness": self.witness,
            "also_applicable": list(self.also_applicable),
            "notes": self.notes,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary(self):
        head = f"{self.verdict} ({self.rule})"
        if self.witness:
            w = self.witness
            head += f": atoms {w['alpha']!r} and {w['beta']!r}, gap mass {w['gap_mass']!r}"
        return head


def _carrier_for(mu, carrier):
    natural = {RealMeasure: "line", PosMeasure: "halfline", CircleMeasure: "circle"}[type(mu)]
    if carrier is None:
        return natural
    allowed = {"line": (RealMeasure, PosMeasure), "halfline": (PosMeasure,), "circle": (CircleMeasure,)}
    if carrier not in allowed:
        raise ValueError(f"unknown carrier {carrier!r}")
    if not isinstance(mu, allowed[carrier]):
        raise CarrierMismatchError(f"a {type(mu).__name__} cannot be certified on carrier {carrier}")
    return carrier


def _arc_pair(mass_fn, a, ma, b, mb):
    """The emptier of the two open arcs between atoms at angles ``a < b``."""
    inner = mass_fn(a, b)
    outer = mass_fn(b, a + _TWO_PI)
    if inner <= outer:
        return Gap(a, b, ma, mb, inner)
    return Gap(b, a, mb, ma, outer)


def scan_gaps(mu):
    """Every pair of atoms with the mass strictly between them.

    On the circle the arc from ``alpha`` counterclockwise to ``beta`` is
    reported, choosing for each pair the arc of smaller mass.
    """
    atoms = list(mu.atoms)
    out = []
    for (a, ma), (b, mb) in combinations(atoms, 2):
        if isinstance(mu, CircleMeasure):
            out.append(_arc_pair(mu.interval_mass, a, ma, b, mb))
        else:
            out.append(Gap(a, b, ma, mb, mu.interval_mass(a, b)))
    return out


def _gap_certificate(gaps, carrier, gap_tol):
    for g in gaps:
        if carrier == "halfline" and g.alpha <= 0.0:
            continue
        if g.alpha_mass > 0.0 and g.beta_mass > 0.0 and g.mass <= gap_tol:
            return {"alpha": g.alpha, "beta": g.beta, "alpha_mass": g.alpha_mass,
                    "beta_mass": g.beta_mass, "gap_mass": g.mass}
    return None


def certify_indecomposable(mu, carrier=None, gap_tol=0.0):
    """Certificate for a directly specified measure.

    Rules are tried in order: gap between atoms, then finite support.  A point
    mass gets rule ``point-mass-trivial`` and is not certified, since the
    notion is only defined for measures that are not point masses.
    """
    carrier = _carrier_for(mu, carrier)
    if mu.is_point_mass:
        return Certificate("point-mass-trivial", "not-certified", carrier,
                           notes="point masses are outside the scope of free indecomposability")
    witness = _gap_certificate(scan_gaps(mu), carrier, gap_tol)
    finite = mu.is_atomic
    if witness is not None:
        also = ("finite-support",) if finite else ()
        return Certificate(_RULES[carrier], "certified", carrier, witness, also)
    if finite:
        return Certificate("finite-support", "certified", carrier)
    rule = _RULES[carrier] if len(mu.atoms) >= 2 else "finite-support"
    return Certificate(rule, "not-certified", carrier,
                       notes="no certifying rule applies; this does not assert decomposability")


def computed_gaps(conv, reports, eps_ladder=None, min_mass=0.0):
    """Gaps between detected atoms of a computed convolution.

    The mass of each open interval (arc) is the recovered density integrated
    with small neighbourhoods of the atoms left out, plus the masses of the
    detected atoms strictly inside.
    """
    eps = eps_ladder or DEFAULT_LADDER
    atoms = [(r.alpha, r.mass) for r in reports if r.mass >= min_mass]
    everything = [(r.alpha, r.mass) for r in reports]
    circle = conv.carrier == "circle"

    def mass(a, b):
        inside = 0.0
        for p, m in everything:
            q = a + np.mod(p - a, _TWO_PI) if circle else p
            if a < q < b:
                inside += m
        est = interval_mass_estimate(conv, (a, b), everything, eps, margin=EXCLUSION)
        return est + inside

    out = []
    for (a, ma), (b, mb) in combinations(sorted(atoms), 2):
        if circle:
            out.append(_arc_pair(mass, a, ma, b, mb))
        else:
            out.append(Gap(a, b, ma, mb, mass(a, b)))
    return out


def certify_convolution(conv, reports, gap_tol=GAP_TOL_COMPUTED, eps_ladder=None):
    """Certificate for a computed convolution from its detected atoms."""
    gaps = computed_gaps(conv, reports, eps_ladder)
    witness = _gap_certificate(gaps, conv.carrier, gap_tol)
    if witness is not None:
        return Certificate(_RULES[conv.carrier], "certified", conv.carrier, witness)
    return Certificate(_RULES[conv.carrier], "not-certified", conv.carrier,
                       notes="no certifying rule applies; this does not assert decomposability")


def gap_zeros(evaluator, gap, n_scan=200, eps_ladder=None, xtol=1e-12):
    """Real zeros of the extrapolated Cauchy transform inside a gap of the line.

    ``Re G`` is scanned at ``n_scan`` interior points; each sign change is
    refined by bisection.  Between two atoms with no mass in between, ``G``
    falls from ``+inf`` to ``-inf`` and exactly one zero is expected.
    """
    eps = eps_ladder or DEFAULT_LADDER
    a, b = (gap.alpha, gap.beta) if isinstance(gap, Gap) else map(float, gap)

    def re_g(x):
        return boundary_value(evaluator, x, eps)[0].real

    x = a + (b - a) * np.arange(1, n_scan + 1) / (n_scan + 1)
    g = re_g(x)
    zeros = []
    for k in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0):
        lo, hi, glo = x[k], x[k + 1], g[k]
        while hi - lo > xtol * max(1.0, abs(lo)):
            mid = 0.5 * (lo + hi)
            gm = re_g(mid)[0]
            if gm == 0.0:
                lo = hi = mid
                break
            if np.sign(gm) == np.sign(glo):
                lo, glo = mid, gm
            else:
                hi = mid
        zeros.append(0.5 * (lo + hi))
    return zeros
