"""Probability measures on the line, the half-line and the unit circle.

A measure is a finite list of atoms plus a finite list of weighted density
pieces.  Instances are immutable and validated on construction; pass
``check=False`` to build a deliberately broken value for `validate`.
"""

from dataclasses import InitVar, dataclass, field
from functools import cached_property
from typing import ClassVar, NamedTuple

import numpy as np

from .errors import MeasureError
from .pieces import CIRCLE_KINDS, LINE_KINDS, TWO_PI, DensityPiece

__all__ = [
    "Violation",
    "RealMeasure",
    "PosMeasure",
    "CircleMeasure",
    "validate",
    "gap_mass",
    "point_mass",
    "atomic",
    "ATOM_TOL",
]

ATOM_TOL = 1e-10
MASS_TOL = 1e-12
PIECE_TOL = 1e-9


class Violation(NamedTuple):
    code: str
    message: str


def _normalize_atoms(atoms):
    out = [(float(p), float(m)) for p, m in atoms]
    out.sort(key=lambda a: a[0])
    return tuple(out)


def _normalize_pieces(pieces):
    return tuple((p, float(w)) for p, w in pieces)


@dataclass(frozen=True)
class RealMeasure:
    """Atoms ``(position, mass)`` plus weighted pieces ``(DensityPiece, weight)``."""

    atoms: tuple = ()
    pieces: tuple = ()
    check: InitVar[bool] = True

    carrier: ClassVar[str] = "real"
    piece_kinds: ClassVar[dict] = LINE_KINDS

    def __post_init__(self, check):
        object.__setattr__(self, "atoms", _normalize_atoms(self.atoms))
        object.__setattr__(self, "pieces", _normalize_pieces(self.pieces))
        if check:
            problems = validate(self)
            if problems:
                raise MeasureError(problems)

    @cached_property
    def positions(self):
        return np.array([p for p, _ in self.atoms], float)

    @cached_property
    def masses(self):
        return np.array([m for _, m in self.atoms], float)

    @property
    def is_atomic(self):
        return not self.pieces

    @property
    def is_point_mass(self):
        return self.is_atomic and len(self.atoms) == 1

    def atom_mass(self, x, tol=ATOM_TOL):
        """Mass of the atom at ``x`` (0.0 if there is none)."""
        for p, m in self.atoms:
            if abs(p - x) <= tol:
                return m
        return 0.0

    @cached_property
    def hull(self):
        """Smallest closed interval containing the support."""
        lo = [p for p, _ in self.atoms] + [pc.support[0] for pc, _ in self.pieces]
        hi = [p for p, _ in self.atoms] + [pc.support[1] for pc, _ in self.pieces]
        return (min(lo), max(hi))

    def cdf(self, x, left=False):
        """``mu((-inf, x])``, or ``mu((-inf, x))`` when ``left`` is set."""
        x = np.asarray(x, float)
        out = np.zeros_like(x)
        for p, m in self.atoms:
            out = out + m * ((x > p) if left else (x >= p))
        for piece, w in self.pieces:
            out = out + w * piece.cdf(x)
        return out

    def quantile(self, p):
        """Smallest ``x`` with ``cdf(x) >= p`` (vectorized bisection)."""
        lo, hi = self.hull
        return _bisect_quantile(self, p, lo - 1.0, float(hi))

    def interval_mass(self, a, b):
        """Mass of the open interval ``(a, b)``."""
        if b <= a:
            return 0.0
        total = sum(m for p, m in self.atoms if a < p < b)
        total += sum(w * piece.interval_mass(a, b) for piece, w in self.pieces)
        return float(total)


@dataclass(frozen=True)
class PosMeasure(RealMeasure):
    """Measure on ``[0, inf)``."""

    carrier: ClassVar[str] = "pos"

    @property
    def is_delta_zero(self):
        return self.is_point_mass and self.atoms[0][0] == 0.0

    @cached_property
    def top(self):
        return self.hull[1]


@dataclass(frozen=True)
class CircleMeasure:
    """Atoms ``(angle, mass)`` with angles in ``[0, 2*pi)``, plus angular pieces."""

    atoms: tuple = ()
    pieces: tuple = ()
    check: InitVar[bool] = True

    carrier: ClassVar[str] = "circle"
    piece_kinds: ClassVar[dict] = CIRCLE_KINDS

    __post_init__ = RealMeasure.__post_init__
    positions = RealMeasure.positions
    masses = RealMeasure.masses
    is_atomic = RealMeasure.is_atomic
    is_point_mass = RealMeasure.is_point_mass
    atom_mass = RealMeasure.atom_mass
    cdf = RealMeasure.cdf

    @cached_property
    def points(self):
        return np.exp(1j * self.positions)

    @cached_property
    def first_moment(self):
        """``int zeta dmu(zeta)``."""
        m = complex(np.sum(self.masses * self.points))
        for piece, w in self.pieces:
            m += w * complex(piece.psi_tilde(np.array([0j]))[0][0])
        return m

    def quantile(self, p):
        return np.mod(_bisect_quantile(self, p, 0.0, TWO_PI), TWO_PI)

    def interval_mass(self, a, b):
        """Mass of the open counterclockwise arc from angle ``a`` to angle ``b``.

        ``b`` may exceed ``2*pi``; arcs of length ``>= 2*pi`` are not open arcs
        between two distinct points and are rejected.
        """
        length = b - a
        if length <= 0:
            return 0.0
        if length >= TWO_PI:
            raise ValueError("an open arc must be shorter than the full circle")
        a = np.mod(a, TWO_PI)
        b = a + length
        parts = [(a, min(b, TWO_PI))]
        if b > TWO_PI:
            parts.append((0.0, b - TWO_PI))
        total = 0.0
        for lo, hi in parts:
            total += sum(m for p, m in self.atoms if lo < p < hi)
            total += sum(w * float(pc.cdf(hi) - pc.cdf(lo)) for pc, w in self.pieces)
        # atoms sitting exactly on an interior wrap point (angle 0)
        if len(parts) == 2:
            total += sum(m for p, m in self.atoms if p == 0.0)
        return float(max(total, 0.0))


def _bisect_quantile(measure, p, lo, hi):
    p = np.asarray(p, float)
    a = np.full(p.shape, lo)
    b = np.full(p.shape, hi)
    for _ in range(80):
        mid = 0.5 * (a + b)
        up = measure.cdf(mid) >= p
        b = np.where(up, mid, b)
        a = np.where(up, a, mid)
    # snap to atoms so quantile diagonals reproduce atoms exactly
    if measure.atoms:
        d = np.abs(b[..., None] - measure.positions)
        k = np.argmin(d, axis=-1)
        near = np.take_along_axis(d, k[..., None], -1)[..., 0] <= 1e-9
        b = np.where(near, measure.positions[k], b)
    return b


def validate(measure):
    """Return the list of violated invariants (empty when valid)."""
    out = []
    atoms = measure.atoms
    pieces = measure.pieces
    if not atoms and not pieces:
        return [Violation("empty-measure", "measure has neither atoms nor pieces")]

    positions = [p for p, _ in atoms]
    for p, m in atoms:
        if not np.isfinite(p):
            out.append(Violation("bad-position", f"atom position {p!r} is not finite"))
        if not m > 0.0:
            out.append(Violation("nonpositive-mass", f"atom at {p!r} has mass {m!r}"))
        elif m > 1.0 + MASS_TOL:
            out.append(Violation("mass-above-one", f"atom at {p!r} has mass {m!r}"))
    for a, b in zip(positions, positions[1:]):
        if b - a <= ATOM_TOL:
            out.append(Violation("duplicate-position", f"atoms at {a!r} and {b!r} coincide"))
    if measure.carrier == "circle" and len(positions) > 1:
        if positions[0] + TWO_PI - positions[-1] <= ATOM_TOL:
            out.append(Violation("duplicate-position", "first and last angles coincide modulo 2*pi"))

    for piece, w in pieces:
        if not isinstance(piece, DensityPiece) or measure.piece_kinds.get(piece.kind) is not type(piece):
            out.append(Violation("carrier-piece", f"piece {piece!r} not allowed on carrier {measure.carrier}"))
            continue
        if not w > 0.0:
            out.append(Violation("nonpositive-mass", f"{piece.kind} piece has weight {w!r}"))
        elif w > 1.0 + MASS_TOL:
            out.append(Violation("mass-above-one", f"{piece.kind} piece has weight {w!r}"))
        problems = piece.problems()
        out.extend(Violation(c, m) for c, m in problems)
        if not problems and piece.kind not in ("tabulated", "arc"):
            total = piece.total()
            if abs(total - 1.0) > PIECE_TOL:
                out.append(Violation("piece-normalization", f"{piece.kind} integrates to {total!r}"))

    total = sum(m for _, m in atoms) + sum(w for _, w in pieces)
    if abs(total - 1.0) > MASS_TOL:
        out.append(Violation("total-mass", f"total mass {total!r} != 1"))

    if measure.carrier == "pos":
        if any(p < 0.0 for p in positions):
            out.append(Violation("negative-position", "atoms must lie in [0, inf)"))
        if any(pc.support[0] < 0.0 for pc, _ in pieces if isinstance(pc, DensityPiece)):
            out.append(Violation("negative-position", "pieces must be supported in [0, inf)"))
    if measure.carrier == "circle":
        if any(not (0.0 <= p < TWO_PI) for p in positions):
            out.append(Violation("angle-range", "atom angles must lie in [0, 2*pi)"))
    return out


def gap_mass(measure, interval):
    """Mass of an open interval ``(a, b)`` (or open counterclockwise arc)."""
    a, b = interval
    return measure.interval_mass(a, b)


_CLASSES = {"real": RealMeasure, "pos": PosMeasure, "circle": CircleMeasure}


def atomic(positions, masses, carrier="real"):
    """Purely atomic measure from parallel sequences."""
    return _CLASSES[carrier](atoms=list(zip(positions, masses)))


def point_mass(x, carrier="real"):
    return atomic([x], [1.0], carrier)
