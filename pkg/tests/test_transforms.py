import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freeconv import (
    Arcsine,
    DomainError,
    MarchenkoPastur,
    PosMeasure,
    RealMeasure,
    Semicircle,
    UnsupportedInputError,
    Uniform,
    atomic,
    cauchy_transform,
    eta_transform,
    point_mass,
    psi_transform,
    reciprocal_cauchy,
)
from freeconv.quadrature import integrate

BERN = atomic([-1, 1], [0.5, 0.5])
SEMI = RealMeasure(pieces=[(Semicircle(0, 2), 1.0)])
MIXED = RealMeasure(atoms=[(-1.5, 0.2), (0.5, 0.3)],
                    pieces=[(Semicircle(0.2, 1.0), 0.3), (Arcsine(-1, 2), 0.1), (Uniform(1, 2), 0.1)])


def test_cauchy_examples():
    assert cauchy_transform(point_mass(0.0), 1j) == pytest.approx(-1j)
    assert cauchy_transform(BERN, 1j) == pytest.approx(-0.5j)
    assert cauchy_transform(SEMI, 2j) == pytest.approx(1j * (1 - np.sqrt(2)), abs=1e-14)


def test_reciprocal_examples():
    assert reciprocal_cauchy(point_mass(0.0), 1j) == pytest.approx(1j)
    assert reciprocal_cauchy(point_mass(3.0), 1 + 1j) == pytest.approx(-2 + 1j)
    assert reciprocal_cauchy(BERN, 1j) == pytest.approx(2j)


@pytest.mark.parametrize("piece", [Semicircle(0.3, 1.2), Arcsine(-1, 2), Uniform(-1, 0.5), MarchenkoPastur(0.5)])
def test_closed_forms_match_quadrature(piece):
    mu = RealMeasure(pieces=[(piece, 1.0)])
    lo, hi = piece.support
    for z in (0.3 + 0.7j, -2 + 0.05j, 4 + 3j):
        re = integrate(lambda t: (piece.pdf(t) / (z - t)).real, lo, hi)
        im = integrate(lambda t: (piece.pdf(t) / (z - t)).imag, lo, hi)
        assert abs(cauchy_transform(mu, z) - (re + 1j * im)) < 1e-9


def test_near_real_points_rejected():
    with pytest.raises(DomainError) as info:
        cauchy_transform(SEMI, 0.5 + 1e-14j)
    assert info.value.code == "near-real"


_z = st.builds(complex, st.floats(-5, 5), st.floats(1e-3, 10))


@settings(max_examples=100, deadline=None)
@given(z=_z)
def test_nevanlinna_bounds(z):
    g = cauchy_transform(MIXED, z)
    assert g.imag < 0
    assert abs(g) <= 1 / z.imag * (1 + 1e-12)
    assert reciprocal_cauchy(MIXED, z).imag >= z.imag * (1 - 1e-12)


@settings(max_examples=50, deadline=None)
@given(z=_z)
def test_conjugate_symmetry_of_formula(z):
    from freeconv.transforms import _cauchy

    g = _cauchy(MIXED, np.array([z, z.conjugate()]))[0]
    assert abs(g[1] - g[0].conjugate()) < 1e-12


POS = PosMeasure(atoms=[(1.0, 0.5), (2.0, 0.5)])


def test_psi_eta_examples():
    one = PosMeasure(atoms=[(1.0, 1.0)])
    assert psi_transform(one, -1.0) == pytest.approx(-0.5)
    assert psi_transform(POS, -1.0) == pytest.approx(-7 / 12)
    assert eta_transform(one, -2.0) == pytest.approx(-2.0)
    assert eta_transform(POS, -1.0) == pytest.approx(-7 / 5)
    assert eta_transform(PosMeasure(atoms=[(2.0, 1.0)]), -1.0) == pytest.approx(-2.0)


def test_psi_rejects_delta_zero_and_positive_axis():
    with pytest.raises(UnsupportedInputError) as info:
        psi_transform(PosMeasure(atoms=[(0.0, 1.0)]), -1.0)
    assert info.value.code == "psi-undefined-for-delta-zero"
    with pytest.raises(DomainError):
        eta_transform(POS, 0.5)


def test_psi_matches_cauchy_at_reciprocal():
    rng = np.random.default_rng(3)
    mu = PosMeasure(atoms=[(0.0, 0.1), (0.5, 0.4), (3.0, 0.5)])
    z = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-3, 3, 100)
    lhs = z * (psi_transform(mu, z) + 1)
    rhs = np.array([cauchy_transform(mu, 1 / w) if (1 / w).imag > 0 else cauchy_transform(mu, (1 / w).conjugate()).conjugate()
                    for w in z])
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_eta_on_negative_axis():
    mu = PosMeasure(atoms=[(0.5, 0.5)], pieces=[(MarchenkoPastur(0.7), 0.5)])
    t = -(10.0 ** -np.arange(1, 9))
    eta = eta_transform(mu, t + 0j)
    assert np.all(np.abs(eta.imag) < 1e-14)
    assert np.all(eta.real < 0)
    assert abs(eta[-1]) < 1e-6
    assert np.all(np.diff(np.abs(eta)) < 0)


@settings(max_examples=100, deadline=None)
@given(z=_z)
def test_eta_argument_property(z):
    mu = PosMeasure(atoms=[(0.0, 0.2), (0.5, 0.3)], pieces=[(MarchenkoPastur(0.5), 0.5)])
    eta = eta_transform(mu, z)
    assert np.angle(z) <= np.angle(eta) + 1e-12
    assert np.angle(eta) < np.pi
