"""Atoms of free convolutions and the identities they satisfy.

An atom ``alpha`` of ``mu1 [+] mu2`` comes from atoms ``alpha_1`` of ``mu1`` and
``alpha_2`` of ``mu2`` with ``alpha = alpha_1 + alpha_2`` and
``mu1({alpha_1}) + mu2({alpha_2}) = mass + 1``; moreover ``omega_j(alpha + i eps)``
tends to ``alpha_j`` with difference quotient ``mu_j({alpha_j}) / mass``.  The
multiplicative versions replace sums by products and the additive boundary
point by ``1/alpha + i eps`` (half-line) or ``r conj(alpha)`` (circle).

Candidates are built from pairs of atoms; a probe of the pole strength of
the computed transform decides which of them are atoms.  On the half-line a
possible atom at 0 is not of this form and is probed directly.
"""

import json
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .density import richardson
from .evaluators import as_evaluator

__all__ = [
    "Candidate",
    "AtomReport",
    "ProbeResult",
    "ATOM_LADDER",
    "ATOM_THRESHOLD",
    "candidate_atoms",
    "atom_mass_probe",
    "probe_atom",
    "omega_boundary_limit",
    "verify_atom_theorem",
    "shared_component_violations",
    "analyze_atoms",
    "reports_to_json",
]

ATOM_LADDER = tuple(10.0 ** (-2.0 - k / 2.0) for k in range(9))
ATOM_THRESHOLD = 1e-3
_TWO_PI = 2.0 * np.pi
_MASS_SLACK = 1e-12


class Candidate(NamedTuple):
    alpha: float
    alpha1: float
    alpha2: float
    predicted_mass: float


class ProbeResult(NamedTuple):
    mass: float
    limit: complex
    error: float
    converged: bool


@dataclass(frozen=True)
class AtomReport:
    """One detected atom with its components and the boundary limits.

    ``omega_limits`` are the raw limits of ``omega_j`` at the boundary point
    (``alpha_j`` on the line, ``1/alpha_j`` on the half-line, ``conj(alpha_j)``
    on the circle) and ``jc_derivatives`` the corresponding difference
    quotients.  The atom at 0 of a half-line product has no components; its
    component fields are ``None`` and ``residuals`` is empty.
    """

    alpha: float
    mass: float
    alpha1: float = None
    alpha2: float = None
    component_masses: tuple = None
    omega_limits: tuple = None
    jc_derivatives: tuple = None
    residuals: dict = field(default_factory=dict)
    predicted_mass: float = None
    probe_error: float = 0.0
    converged: bool = True

    def to_dict(self):
        out = asdict(self)
        for key in ("omega_limits", "jc_derivatives"):
            if out[key] is not None:
                out[key] = [[float(v.real), float(v.imag)] for v in out[key]]
        if out["component_masses"] is not None:
            out["component_masses"] = list(out["component_masses"])
        return out


def _atoms_of(mu):
    return [(float(p), float(m)) for p, m in mu.atoms]


def candidate_atoms(mu1, mu2, op="add"):
    """Pairs of atoms whose masses sum to more than one.

    ``op`` is ``"add"``, ``"mul-pos"`` or ``"mul-circle"``.  Equality of the
    mass sum with one predicts no atom.  On the half-line, products equal to 0
    are skipped.
    """
    out = []
    for a, ma in _atoms_of(mu1):
        for b, mb in _atoms_of(mu2):
            if ma + mb <= 1.0 + _MASS_SLACK:
                continue
            if op == "add":
                alpha = a + b
            elif op == "mul-pos":
                alpha = a * b
                if alpha == 0.0:
                    continue
            elif op == "mul-circle":
                alpha = float(np.mod(a + b, _TWO_PI))
            else:
                raise ValueError(f"unknown operation {op!r}")
            out.append(Candidate(alpha, a, b, ma + mb - 1.0))
    out.sort(key=lambda c: c.alpha)
    return out


def probe_atom(evaluator, alpha, eps_ladder=ATOM_LADDER):
    """Extrapolated pole strength at ``alpha`` (scalar or array)."""
    ev = as_evaluator(evaluator)
    eps = np.asarray(eps_ladder, float)
    vals, ok = ev.pole_strength(alpha, eps)
    limit, err = richardson(eps, np.moveaxis(vals, -1, 0))
    conv = np.all(ok, axis=-1) & np.isfinite(limit)
    if np.ndim(alpha) == 0:
        return ProbeResult(float(abs(limit)), complex(limit), float(err), bool(conv))
    return [ProbeResult(float(abs(v)), complex(v), float(e), bool(c)) for v, e, c in zip(limit, err, conv)]


def atom_mass_probe(evaluator, alpha, eps_ladder=ATOM_LADDER):
    """Mass of the atom at ``alpha`` (0 means none) from the pole strength of the transform."""
    return probe_atom(evaluator, alpha, eps_ladder).mass


def _quadratic_fit(e, v):
    """Constant and linear coefficients of the quadratic through three samples."""
    e0, e1, e2 = e
    d0 = (e0 - e1) * (e0 - e2)
    d1 = (e1 - e0) * (e1 - e2)
    d2 = (e2 - e0) * (e2 - e1)
    c0 = v[0] * e1 * e2 / d0 + v[1] * e0 * e2 / d1 + v[2] * e0 * e1 / d2
    c1 = -(v[0] * (e1 + e2) / d0 + v[1] * (e0 + e2) / d1 + v[2] * (e0 + e1) / d2)
    return c0, c1


def _limits(conv, alpha, eps):
    """Raw limits, difference quotients and flags of both omegas at ``alpha`` (arrays)."""
    eps = np.asarray(eps, float)
    pts = conv.boundary_points(alpha, eps)
    batch = conv.solve(pts)
    ok = np.all(batch.converged, axis=-1)
    out = []
    for w in (batch.omega1, batch.omega2):
        ws = np.moveaxis(w, -1, 0)
        c0, c1 = _quadratic_fit(eps[-3:], ws[-3:])
        if conv.carrier == "circle":
            q = -c1 / np.exp(-1j * np.asarray(alpha, float))
        else:
            q = c1 / 1j
        out.append((c0, q))
    return out, ok


def omega_boundary_limit(conv, j, alpha, eps_ladder=ATOM_LADDER):
    """``(limit, quotient)`` of ``omega_j`` at the boundary point attached to ``alpha``.

    Line: limit of ``omega_j(alpha + i eps)`` and of
    ``(omega_j(alpha + i eps) - limit) / (i eps)``.  Half-line: the same at
    ``1/alpha + i eps``.  Circle: radial limit at ``conj(alpha)`` and
    ``(limit - omega_j(r conj(alpha))) / ((1 - r) conj(alpha))``.
    """
    (l1, l2), _ = _limits(conv, alpha, eps_ladder)
    lim, q = (l1, l2)[j - 1]
    return complex(lim), complex(q)


def _component_target(op, alpha, alpha_j):
    """Factor multiplying ``mu_j({alpha_j}) / mass`` in the quotient identity."""
    if op == "add":
        return 1.0
    if op == "mul-pos":
        return alpha / alpha_j
    return np.exp(1j * (alpha - alpha_j))


def _expected_limit(op, alpha_j):
    if op == "add":
        return alpha_j
    if op == "mul-pos":
        return 1.0 / alpha_j
    return np.exp(-1j * alpha_j)


def verify_atom_theorem(mu1, mu2, op, report):
    """Residuals of the atom identities for one report.

    ``sum_identity``: ``|alpha_1 + alpha_2 - alpha|`` (product, or angle sum on
    the circle, measured as a chord).  ``mass_identity``:
    ``|mu1({alpha_1}) + mu2({alpha_2}) - mass - 1|``.  ``derivative_identity``:
    worst ``|quotient_j - c_j mu_j({alpha_j}) / mass|`` where ``c_j = 1`` for
    sums and ``alpha / alpha_j`` for products.  ``limit_identity``: worst
    distance of the omega limits to their predicted values.
    """
    a, a1, a2 = report.alpha, report.alpha1, report.alpha2
    if op == "add":
        s = abs(a1 + a2 - a)
    elif op == "mul-pos":
        s = abs(a1 * a2 - a)
    else:
        s = abs(np.exp(1j * (a1 + a2)) - np.exp(1j * a))
    m1, m2 = mu1.atom_mass(a1), mu2.atom_mass(a2)
    mass_res = abs(m1 + m2 - report.mass - 1.0)
    out = {"sum_identity": float(s), "mass_identity": float(mass_res)}
    if report.jc_derivatives is not None and report.mass > 0:
        devs = [abs(q - _component_target(op, a, aj) * mj / report.mass)
                for q, aj, mj in zip(report.jc_derivatives, (a1, a2), (m1, m2))]
        lims = [abs(lim - _expected_limit(op, aj)) for lim, aj in zip(report.omega_limits, (a1, a2))]
        out["derivative_identity"] = float(max(devs))
        out["limit_identity"] = float(max(lims))
    return out


def shared_component_violations(reports):
    """Pairs of component-carrying reports sharing neither component (exact match)."""
    with_parts = [r for r in reports if r.alpha1 is not None]
    return [(r, s) for r, s in combinations(with_parts, 2) if r.alpha1 != s.alpha1 and r.alpha2 != s.alpha2]


def analyze_atoms(conv, eps_ladder=ATOM_LADDER, threshold=ATOM_THRESHOLD):
    """Detected atoms of the convolution ``conv``, sorted by location."""
    cands = candidate_atoms(conv.mu1, conv.mu2, conv.op)
    reports = []
    if cands:
        alphas = np.array([c.alpha for c in cands])
        probes = probe_atom(conv, alphas, eps_ladder)
        keep = [k for k, p in enumerate(probes) if p.mass > threshold]
        if keep:
            (lim1, q1), (lim2, q2) = _limits(conv, alphas[keep], eps_ladder)[0]
            for i, k in enumerate(keep):
                c, p = cands[k], probes[k]
                r = AtomReport(
                    alpha=c.alpha,
                    mass=p.mass,
                    alpha1=c.alpha1,
                    alpha2=c.alpha2,
                    component_masses=(conv.mu1.atom_mass(c.alpha1), conv.mu2.atom_mass(c.alpha2)),
                    omega_limits=(complex(lim1[i]), complex(lim2[i])),
                    jc_derivatives=(complex(q1[i]), complex(q2[i])),
                    predicted_mass=c.predicted_mass,
                    probe_error=p.error,
                    converged=p.converged,
                )
                res = verify_atom_theorem(conv.mu1, conv.mu2, conv.op, r)
                reports.append(_with_residuals(r, res))
    if conv.op == "mul-pos":
        p = probe_atom(conv, 0.0, eps_ladder)
        if p.mass > threshold:
            reports.append(AtomReport(
                alpha=0.0,
                mass=p.mass,
                component_masses=(conv.mu1.atom_mass(0.0), conv.mu2.atom_mass(0.0)),
                probe_error=p.error,
                converged=p.converged,
            ))
    reports.sort(key=lambda r: r.alpha)
    return reports


def _with_residuals(report, residuals):
    return AtomReport(**{**report.__dict__, "residuals": residuals})


def reports_to_json(reports, **extra):
    """JSON text for a list of reports."""
    doc = {"schema": "freeconv/1", **extra, "atoms": [r.to_dict() for r in reports]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
