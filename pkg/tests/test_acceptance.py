"""Acceptance criteria, one test each.

Every test records a pass/fail line that the terminal summary prints at the
end of the run.  Run this file directly to get just these lines.
"""

import time

import numpy as np
import pytest

from freeconv import (
    FreeConvolution,
    PosMeasure,
    RealMeasure,
    Semicircle,
    analyze_atoms,
    certify_convolution,
    gap_zeros,
    interval_mass_estimate,
    ks_distance,
    sample_mult_pos,
    stieltjes_invert,
    verify_atom_theorem,
)
from freeconv.atoms import shared_component_violations
from freeconv.indecomposability import computed_gaps
from freeconv.measures import atomic
from freeconv.subordination import solve
from randmeasures import CLASS_OF_OP, heavy_atomic, mixed

BERN = atomic([-1, 1], [0.5, 0.5])
P1 = PosMeasure(atoms=[(0.0, 1 / 3), (1.0, 2 / 3)])
P2 = PosMeasure(atoms=[(1.0, 2 / 3), (2.0, 1 / 3)])


def _heavy_pairs():
    rng = np.random.default_rng(0)
    out = []
    for _ in range(50):
        m1, m2 = heavy_atomic(rng, RealMeasure), heavy_atomic(rng, RealMeasure)
        conv = FreeConvolution(m1, m2)
        out.append((m1, m2, analyze_atoms(conv)))
    return out


@pytest.fixture(scope="module")
def heavy_pairs():
    return _heavy_pairs()


def test_arcsine_reproduction(criterion):
    t0 = time.process_time()
    grid = stieltjes_invert(FreeConvolution(BERN, BERN), (-1.9, 1.9), 381)
    elapsed = time.process_time() - t0
    x = grid.abscissae
    err = np.max(np.abs(grid.density - 1 / (np.pi * np.sqrt(4 - x ** 2))))
    ok = criterion(1, "arcsine reproduction", err <= 1e-3 and elapsed <= 60,
                   f"L-inf {err:.2e} (<= 1e-3), cpu {elapsed:.1f} s (<= 60)")
    assert ok


def test_semicircle_stability(criterion):
    semi = RealMeasure(pieces=[(Semicircle(0, 2), 1.0)])
    grid = stieltjes_invert(FreeConvolution(semi, semi), (-2.7, 2.7), 541)
    x = grid.abscissae
    exact = np.sqrt(8 - x ** 2) / (4 * np.pi)
    err = np.max(np.abs(grid.density - exact))
    assert criterion(2, "semicircle stability", err <= 2e-3, f"L-inf {err:.2e} (<= 2e-3)")


def test_atom_identities(criterion, heavy_pairs):
    worst = {"sum_identity": 0.0, "mass_identity": 0.0, "derivative_identity": 0.0}
    n_atoms = 0
    bad = {k: 0 for k in worst}
    for m1, m2, reports in heavy_pairs:
        for r in reports:
            n_atoms += 1
            if r.alpha1 is None:
                bad["sum_identity"] += 1
                continue
            res = verify_atom_theorem(m1, m2, "add", r)
            for key, tol in (("sum_identity", 1e-6), ("mass_identity", 5e-2), ("derivative_identity", 5e-2)):
                worst[key] = max(worst[key], res[key])
                bad[key] += res[key] > tol
    ok = not any(bad.values())
    detail = (f"{n_atoms} atoms; worst sum {worst['sum_identity']:.1e}, mass {worst['mass_identity']:.1e}, "
              f"derivative {worst['derivative_identity']:.1e}; failures sum {bad['sum_identity']}, "
              f"mass {bad['mass_identity']}, derivative {bad['derivative_identity']}")
    criterion(3, "atom identities", ok, detail)
    assert ok, detail


def test_shared_components(criterion, heavy_pairs):
    n = sum(len(shared_component_violations(reports)) for _, _, reports in heavy_pairs)
    assert criterion(4, "shared components", n == 0, f"{n} violations over {len(heavy_pairs)} convolutions")


def test_indecomposability_soundness(criterion):
    rng = np.random.default_rng(5)
    violations = []
    checked = 0
    smallest = np.inf
    for op, cls in CLASS_OF_OP.items():
        for _ in range(200):
            m1, m2 = mixed(rng, cls, pieces=False), mixed(rng, cls, pieces=False)
            conv = FreeConvolution(m1, m2, op)
            gaps = computed_gaps(conv, analyze_atoms(conv), min_mass=0.05)
            if op == "mul-pos":
                gaps = [g for g in gaps if g.alpha > 0]
            checked += len(gaps)
            for g in gaps:
                smallest = min(smallest, g.mass)
                if g.mass <= 1e-2:
                    violations.append((op, g))
    ok = criterion(5, "indecomposability soundness", not violations,
                   f"{len(violations)} violations over {checked} atom-bounded gaps; smallest gap mass {smallest:.3f}")
    assert ok, violations[:5]


def test_counterexample_solver(criterion):
    conv = FreeConvolution(P1, P2, "mul-pos")
    reports = analyze_atoms(conv)
    masses = {r.alpha: r.mass for r in reports}
    gap = interval_mass_estimate(conv, (0.05, 0.95), reports)
    ok = (sorted(masses) == [0.0, 1.0] and all(abs(m - 1 / 3) <= 0.02 for m in masses.values()) and gap <= 0.01)
    detail = f"atoms {', '.join(f'{a:g}: {m:.4f}' for a, m in masses.items())}; mass of (0.05, 0.95) {gap:.1e}"
    assert criterion(6, "counterexample, solver side", ok, detail)


def test_counterexample_oracle(criterion):
    smp = sample_mult_pos(P1, P2, 3000, 10, seed=0)
    eig = smp.eigenvalues
    at0 = np.mean(np.abs(eig) <= 1e-8)
    at1 = np.mean(np.abs(eig - 1) <= 1e-8)
    inside = np.mean((eig > 0.05) & (eig < 0.95))
    conv = FreeConvolution(P1, P2, "mul-pos")
    grid = stieltjes_invert(conv, (0.0, 4.5), 2001)
    ks = ks_distance(smp, (grid, analyze_atoms(conv)))
    ok = abs(at0 - 1 / 3) <= 0.02 and abs(at1 - 1 / 3) <= 0.02 and inside <= 0.01 and ks <= 0.05
    detail = f"fraction at 0 {at0:.4f}, at 1 {at1:.4f}, in (0.05, 0.95) {inside:.4f}; KS {ks:.4f}"
    assert criterion(7, "counterexample, oracle side", ok, detail)


def test_boundary_behaviour(criterion):
    rng = np.random.default_rng(8)
    zero_counts = []
    worst_im = 0.0
    worst_dev = 0.0
    uncertified = 0
    for _ in range(20):
        k = int(rng.integers(2, 5))
        mu = atomic(np.sort(rng.choice(np.arange(-6, 7), k, replace=False) * 0.5), rng.dirichlet(2 * np.ones(k)))
        shift = rng.uniform(-2, 2)
        conv = FreeConvolution(mu, atomic([shift], [1.0]))
        reports = analyze_atoms(conv)
        uncertified += not certify_convolution(conv, reports).certified
        alphas = [r.alpha for r in reports]
        for g in computed_gaps(conv, reports):
            if any(g.alpha < a < g.beta for a in alphas):
                continue
            zeros = gap_zeros(conv, g)
            zero_counts.append(len(zeros))
            if len(zeros) != 1:
                continue
            gamma = zeros[0]
            xs = [g.alpha + (gamma - g.alpha) * j / 6 for j in range(1, 6)]
            xs += [gamma + (g.beta - gamma) * j / 6 for j in range(1, 6)]
            xs = np.array([x for x in xs if abs(x - gamma) > 1e-2])
            z = xs + 1e-6j
            b = conv.solve(z)
            worst_im = max(worst_im, b.omega1.imag.max(), b.omega2.imag.max())
            # a translation has closed-form subordination: z - shift and shift + F_mu(z - shift)
            exact2 = shift + 1 / sum(m / (z - shift - p) for p, m in mu.atoms)
            worst_dev = max(worst_dev, np.abs(b.omega1 - (z - shift)).max(), np.abs(b.omega2 - exact2).max())
    bad_zeros = sum(c != 1 for c in zero_counts)
    ok = uncertified == 0 and bad_zeros == 0 and worst_im <= 1e-3
    detail = (f"{len(zero_counts)} gaps, {bad_zeros} without exactly one zero, {uncertified} uncertified cases; "
              f"worst Im omega {worst_im:.1e} (<= 1e-3); solver vs closed form {worst_dev:.1e}")
    assert criterion(8, "boundary behaviour", ok, detail)


def _contract_point(rng, op):
    y = 10 ** rng.uniform(-3, 1)
    if op == "add":
        return rng.uniform(-5, 5) + 1j * y
    if op == "mul-pos":
        return rng.uniform(-3, 3) + 1j * y * rng.choice([-1, 1])
    r = 1 - y if y < 1 else 1 - min(y, 1 - 1e-3) / 10
    return r * np.exp(1j * rng.uniform(0, 2 * np.pi))


def test_solver_contract(criterion):
    rng = np.random.default_rng(7)
    worst_res = 0.0
    worst_it = 0
    n = 0
    failures = 0
    while n < 1000:
        op = ("add", "mul-pos", "mul-circle")[n % 3]
        cls = CLASS_OF_OP[op]
        m1, m2 = mixed(rng, cls), mixed(rng, cls)
        if op == "mul-circle" and min(abs(m1.first_moment), abs(m2.first_moment)) < 1e-3:
            continue
        b = solve(m1, m2, np.array([_contract_point(rng, op)]), op)[0]
        res = max(b.residual_subord, b.residual_identity)
        worst_res = max(worst_res, res)
        worst_it = max(worst_it, b.iterations)
        failures += res > 1e-10 or b.iterations > 10_000 or not b.converged
        n += 1
    ok = failures == 0
    detail = f"{n} samples, worst residual {worst_res:.1e} (<= 1e-10), most iterations {worst_it} (<= 10000)"
    assert criterion(9, "solver contract", ok, detail)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
