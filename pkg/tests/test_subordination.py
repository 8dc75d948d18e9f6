import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freeconv import (
    ArcUniform,
    CircleMeasure,
    DomainError,
    MarchenkoPastur,
    PosMeasure,
    RealMeasure,
    Semicircle,
    UnsupportedInputError,
    atomic,
    convolution_cauchy,
    convolution_eta,
    point_mass,
    solve_additive,
    solve_multiplicative_circle,
    solve_multiplicative_pos,
)
from freeconv.oracle import sample_mult_pos
from freeconv.subordination import solve

BERN = atomic([-1, 1], [0.5, 0.5])
SEMI = RealMeasure(pieces=[(Semicircle(0, 2), 1.0)])
MIXED = RealMeasure(atoms=[(-1.0, 0.3), (2.0, 0.2)], pieces=[(Semicircle(0.5, 1.0), 0.5)])
P1 = PosMeasure(atoms=[(0.0, 1 / 3), (1.0, 2 / 3)])
P2 = PosMeasure(atoms=[(1.0, 2 / 3), (2.0, 1 / 3)])


def test_translation_case_is_exact():
    s = solve_additive(MIXED, point_mass(3.0), 1j)
    assert s.omega1 == pytest.approx(-3 + 1j, abs=1e-12)
    assert s.converged


def test_bernoulli_square_is_arcsine():
    s = solve_additive(BERN, BERN, 2j)
    assert s.value == pytest.approx(-1j / (2 * np.sqrt(2)), abs=1e-13)
    z = np.array([0.3 + 0.01j, -1.7 + 0.5j, 2.5 + 1e-4j, 1e-6j])
    g = convolution_cauchy(BERN, BERN, z)
    exact = 1 / (np.sqrt(z - 2) * np.sqrt(z + 2))
    np.testing.assert_allclose(g, exact, rtol=1e-10)


def test_point_masses_add():
    assert convolution_cauchy(point_mass(1.0), point_mass(2.0), 3 + 1j) == pytest.approx(-1j)


def test_semicircles_add_variances():
    z = np.linspace(-3, 3, 10) + 0.2j
    g = convolution_cauchy(SEMI, SEMI, z)
    r = 2 * np.sqrt(2)
    exact = 2 * (z - np.sqrt(z - r) * np.sqrt(z + r)) / r ** 2
    np.testing.assert_allclose(g, exact, atol=1e-12)


def test_normalization_at_infinity():
    y = 10.0 ** np.arange(1, 7)
    b = solve(MIXED, BERN, 1j * y)
    for w in (b.omega1, b.omega2):
        assert np.all(np.abs(w / (1j * y) - 1) < 5 / y)


def test_domain_errors():
    with pytest.raises(DomainError):
        solve_additive(BERN, BERN, 1 - 1j)
    with pytest.raises(DomainError):
        solve_multiplicative_pos(P1, P2, 0.5)
    c = CircleMeasure(atoms=[(0.0, 0.5), (1.0, 0.5)])
    with pytest.raises(DomainError):
        solve_multiplicative_circle(c, c, 1.5)


def test_zero_first_moment_rejected():
    haar = CircleMeasure(pieces=[(ArcUniform(0, 2 * np.pi), 1.0)])
    c = CircleMeasure(atoms=[(0.0, 0.5), (1.0, 0.5)])
    with pytest.raises(UnsupportedInputError) as info:
        solve_multiplicative_circle(haar, c, 0.5j)
    assert info.value.code == "zero-first-moment"


def test_delta_zero_factor_rejected():
    with pytest.raises(UnsupportedInputError):
        solve_multiplicative_pos(PosMeasure(atoms=[(0.0, 1.0)]), P2, -1.0)


_z = st.builds(complex, st.floats(-4, 4), st.floats(1e-3, 5))


@settings(max_examples=60, deadline=None)
@given(z=_z)
def test_additive_invariants(z):
    s = solve_additive(MIXED, BERN, z)
    t = solve_additive(BERN, MIXED, z)
    assert s.converged and t.converged
    assert s.residual_subord <= 1e-10 and s.residual_identity <= 1e-10
    assert abs(s.omega1 + s.omega2 - z - 1 / s.value) <= 1e-10 * max(1, abs(s.omega1), abs(s.omega2), abs(1 / s.value))
    assert abs(s.omega1 - t.omega2) <= 1e-10 * max(1, abs(s.omega1))
    assert s.omega1.imag >= z.imag * (1 - 1e-12) and s.omega2.imag >= z.imag * (1 - 1e-12)


@settings(max_examples=40, deadline=None)
@given(z=_z, c=st.floats(-3, 3))
def test_translation_covariance(z, c):
    shifted = RealMeasure(atoms=[(p + c, m) for p, m in BERN.atoms])
    lhs = convolution_cauchy(shifted, MIXED, z + c)
    rhs = convolution_cauchy(BERN, MIXED, z)
    assert abs(lhs - rhs) <= 1e-9 * max(1, abs(rhs))


def test_marchenko_pastur_moments():
    mp = PosMeasure(pieces=[(MarchenkoPastur(1.0), 1.0)])
    z = -np.array([1e-3, 2e-3])
    eta = convolution_eta(mp, mp, z + 0j)
    # psi = z m1 + z^2 m2 + z^3 m3; the free product of two MP(1) laws has moments 1, 3, 12
    psi = eta / (1 - eta)
    m3 = (psi - z - 3 * z ** 2) / z ** 3
    assert np.all(np.abs(m3 - 12) < 0.2)


def test_multiplicative_counterexample_matches_oracle():
    eta = convolution_eta(P1, P2, -1.0)
    eig = sample_mult_pos(P1, P2, 600, 4, seed=1).eigenvalues
    psi = np.mean(-eig / (1 + eig))
    assert abs(eta - psi / (1 + psi)) < 1e-2


def test_multiplicative_invariants():
    z = np.array([-2.0, -0.3 + 0.2j, 1.5 + 0.01j, 0.2 - 0.7j])
    b = solve(P1, P2, z, "mul-pos")
    assert np.all(b.converged)
    np.testing.assert_allclose(b.omega1 * b.omega2, z * b.value, atol=1e-10)
    up = z.imag > 0
    assert np.all(np.angle(b.omega1[up]) >= np.angle(z[up]) - 1e-12)


def test_circle_first_moment_multiplies():
    c1 = CircleMeasure(atoms=[(0.3, 0.6), (2.0, 0.4)])
    c2 = CircleMeasure(atoms=[(5.0, 0.7)], pieces=[(ArcUniform(1.0, 2.0), 0.3)])
    z = 1e-4 * np.exp(1j * np.array([0.0, 1.0, 2.5]))
    b = solve(c1, c2, z, "mul-circle")
    assert np.all(b.converged)
    np.testing.assert_allclose(b.value / z, c1.first_moment * c2.first_moment, atol=1e-3)
    np.testing.assert_allclose(b.omega1 * b.omega2, z * b.value, atol=1e-12)


def test_boundary_points_converge():
    z = np.array([0.5 + 1e-6j, -1.0 + 1e-6j, 1e-6j])
    b = solve(BERN, BERN, z)
    assert np.all(b.converged)
    assert np.all(b.residual_subord <= 1e-10)
