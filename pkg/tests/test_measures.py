import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freeconv import (
    Arcsine,
    ArcUniform,
    CircleMeasure,
    MarchenkoPastur,
    MeasureError,
    PosMeasure,
    RealMeasure,
    Semicircle,
    SpecSyntaxError,
    Tabulated,
    Uniform,
    atomic,
    gap_mass,
    load_measure,
    parse_measure_spec,
    point_mass,
    save_measure,
    serialize_measure,
    validate,
)
from freeconv.quadrature import gauss_legendre, integrate


def codes(measure):
    return {v.code for v in validate(measure)}


def test_valid_two_point_measure():
    assert validate(atomic([0, 1], [0.5, 0.5])) == []


def test_duplicate_position_is_reported():
    mu = RealMeasure(atoms=[(0, 0.6), (0, 0.4)], check=False)
    assert "duplicate-position" in codes(mu)


def test_missing_mass_is_reported():
    mu = RealMeasure(atoms=[(1, 0.7)], check=False)
    assert "total-mass" in codes(mu)


def test_constructor_raises_on_invalid():
    with pytest.raises(MeasureError) as info:
        RealMeasure(atoms=[(1, 0.7)])
    assert info.value.violations[0].code == "total-mass"


def test_carrier_specific_checks():
    assert "negative-position" in codes(PosMeasure(atoms=[(-1.0, 1.0)], check=False))
    assert "angle-range" in codes(CircleMeasure(atoms=[(7.0, 1.0)], check=False))
    assert "carrier-piece" in codes(RealMeasure(pieces=[(ArcUniform(0.0, 1.0), 1.0)], check=False))


@pytest.mark.parametrize("piece", [
    Semicircle(0.3, 1.7), Arcsine(-1.0, 2.0), Uniform(-0.5, 0.5), MarchenkoPastur(0.4), MarchenkoPastur(2.5),
])
def test_closed_form_pieces_are_normalized(piece):
    lo, hi = piece.support
    assert abs(piece.cdf(hi) - 1.0) < 1e-10
    assert abs(piece.cdf(lo)) < 1e-10
    mid = 0.5 * (lo + hi)
    assert abs(piece.interval_mass(lo, mid) + piece.interval_mass(mid, hi) - 1.0) < 1e-10


def test_gap_mass_examples():
    assert gap_mass(atomic([0, 1], [1 / 3, 2 / 3]), (0, 1)) == 0.0
    assert abs(gap_mass(RealMeasure(pieces=[(Uniform(0, 1), 1.0)]), (0, 0.5)) - 0.5) < 1e-12
    assert abs(gap_mass(RealMeasure(pieces=[(Semicircle(0, 2), 1.0)]), (-2, 2)) - 1.0) < 1e-6


def test_circle_arc_mass_wraps():
    mu = CircleMeasure(atoms=[(0.1, 0.5), (6.0, 0.5)])
    assert mu.interval_mass(6.0, 0.1 + 2 * np.pi) == 0.0
    assert mu.interval_mass(5.9, 0.2 + 2 * np.pi) == 1.0
    with pytest.raises(ValueError):
        mu.interval_mass(0.0, 2 * np.pi)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-3, 3), d1=st.floats(0.01, 2), d2=st.floats(0.01, 2))
def test_gap_mass_additive_and_monotone(a, d1, d2):
    mu = RealMeasure(atoms=[(-1.0, 0.2), (0.7, 0.3)], pieces=[(Semicircle(0, 2), 0.5)])
    b, c = a + d1, a + d1 + d2
    whole = gap_mass(mu, (a, c))
    split = gap_mass(mu, (a, b)) + gap_mass(mu, (b, c)) + mu.atom_mass(b)
    assert abs(whole - split) < 1e-12
    assert gap_mass(mu, (a, b)) <= whole + 1e-15


def test_quantile_inverts_cdf():
    mu = RealMeasure(atoms=[(0.0, 0.25)], pieces=[(Uniform(1, 3), 0.75)])
    q = mu.quantile(np.array([0.1, 0.25, 0.625]))
    np.testing.assert_allclose(q, [0.0, 0.0, 2.0], atol=1e-10)


def test_point_mass_flags():
    assert point_mass(2.0).is_point_mass
    assert PosMeasure(atoms=[(0.0, 1.0)]).is_delta_zero
    assert not atomic([0, 1], [0.5, 0.5]).is_point_mass


def test_tabulated_piece_normalization_is_checked():
    x = np.linspace(0, 1, 11)
    good = Tabulated(tuple(x), tuple(np.ones(11)))
    assert validate(RealMeasure(pieces=[(good, 1.0)])) == []
    bad = Tabulated(tuple(x), tuple(2 * np.ones(11)))
    assert codes(RealMeasure(pieces=[(bad, 1.0)], check=False))


def test_quadrature_handles_sqrt_edges():
    res = integrate(lambda x: 1 / (np.pi * np.sqrt(4 - x * x)), -2.0, 2.0)
    assert abs(res - 1.0) < 1e-12
    assert res.converged
    assert abs(gauss_legendre(np.cos, 0.0, np.pi / 2) - 1.0) < 1e-14


# spec files

def test_parse_examples():
    assert parse_measure_spec("real; atom 0 1.0").atoms == ((0.0, 1.0),)
    mu = parse_measure_spec("pos\natom 1 2/3\natom 2 1/3\n")
    assert isinstance(mu, PosMeasure)
    assert mu.atoms == ((1.0, 2 / 3), (2.0, 1 / 3))
    sc = parse_measure_spec("real\npiece semicircle 0 2 1.0  # standard\n")
    assert sc.pieces[0][0] == Semicircle(0.0, 2.0)


def test_parse_angles_with_pi():
    mu = parse_measure_spec("circle; atom 0 1/2; atom pi/2 1/2")
    np.testing.assert_allclose(mu.positions, [0.0, np.pi / 2])


@pytest.mark.parametrize("text,line,col", [
    ("atom 0 1", 1, 1),
    ("real\natom 0", 2, 1),
    ("real\natom x 1", 2, 6),
    ("real\npiece nonsense 1 2 1", 2, 7),
])
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(SpecSyntaxError) as info:
        parse_measure_spec(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_semantic_error_on_bad_mass():
    with pytest.raises(MeasureError):
        parse_measure_spec("real; atom 0 0.5")


def test_tabulated_roundtrip(tmp_path):
    x = np.linspace(0, 2, 21)
    mu = RealMeasure(atoms=[(-1.0, 0.5)], pieces=[(Tabulated(tuple(x), tuple(np.full(21, 0.5))), 0.5)])
    save_measure(mu, tmp_path / "m.spec")
    back = load_measure(tmp_path / "m.spec")
    assert back.atoms == mu.atoms
    np.testing.assert_allclose(back.pieces[0][0].values, mu.pieces[0][0].values, atol=1e-12)


_atoms = st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=5, unique=True)


@settings(max_examples=50, deadline=None)
@given(pos=_atoms, seed=st.integers(0, 2**32 - 1), with_piece=st.booleans())
def test_serialize_parse_roundtrip(pos, seed, with_piece):
    rng = np.random.default_rng(seed)
    pos = [p for k, p in enumerate(pos) if all(abs(p - q) > 1e-9 for q in pos[:k])]
    w = 0.3 if with_piece else 0.0
    m = rng.dirichlet(np.ones(len(pos))) * (1 - w)
    pieces = [(Semicircle(0.5, 1.5), w)] if with_piece else []
    mu = RealMeasure(atoms=list(zip(pos, m)), pieces=pieces, check=False)
    if validate(mu):
        return
    back = parse_measure_spec(serialize_measure(mu))
    assert back == mu
