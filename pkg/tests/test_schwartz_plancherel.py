import json
import random

import pytest

from unitary_spherical.exact_arith import Scalar
from unitary_spherical.schwartz_plancherel import (
    SchwartzFn,
    dominant_signatures,
    fourier,
    inversion_check,
    plancherel_check,
    rank_basis_check,
    rank_samples,
    rank_signatures,
    total_mass,
    volume_orbit,
    volume_ratio_law,
)
from unitary_spherical.spherical import ParameterError, SpaceParams


@pytest.mark.parametrize("m,e", [(2, 0), (2, 1), (3, 0), (3, 1), (4, 0), (5, 1)])
def test_base_orbit_has_unit_volume(m, e):
    P = SpaceParams(m, e)
    assert volume_orbit(P.base_signature(), P) == Scalar.const(1)


def test_rank_one_volume_example():
    P = SpaceParams(2, 0)
    # for m = 2 the orbit of x_(1) has volume 1 + q
    assert volume_orbit((1,), P) == Scalar.const(1) + Scalar.v_power(2)
    assert abs(complex(volume_orbit((1,), P).eval(3.0)) - 4) < 1e-12


@pytest.mark.parametrize("m,e", [(2, 1), (3, 0), (4, 1), (5, 0)])
def test_volume_ratio_law(m, e):
    P = SpaceParams(m, e)
    sigs = dominant_signatures(P, 2)
    for a in sigs:
        for b in sigs:
            assert volume_ratio_law(a, b, P)


def test_volumes_are_positive():
    for m in (2, 3, 4, 5):
        P = SpaceParams(m, 0)
        for lam in dominant_signatures(P, 3):
            v = complex(volume_orbit(lam, P).eval(2.0))
            assert v.real > 0 and abs(v.imag) < 1e-12


@pytest.mark.parametrize("m,e", [(2, 0), (3, 1), (4, 1)])
def test_fourier_of_base_indicator(m, e):
    P = SpaceParams(m, e)
    img = fourier(SchwartzFn.indicator(P.base_signature(), P))
    coeffs = img.coefficients(3.0)
    assert list(coeffs) == [(0,) * P.n]
    assert abs(coeffs[(0,) * P.n] - 1) < 1e-14


def test_schwartz_arith_and_json(tmp_path):
    P = SpaceParams(3, 1)
    f = SchwartzFn(P, {(0,): 2, (1,): 1j})
    g = SchwartzFn(P, {(0,): -2})
    h = f + g
    assert h.terms == {(1,): 1j}
    assert (f - f).is_zero()
    assert (f * 2).value((1,)) == 2j
    assert f.value((5,)) == 0
    back = SchwartzFn.from_json(f.to_json())
    assert back.terms == f.terms and back.params == P
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(f.to_json()))
    assert SchwartzFn.load(str(path)).terms == f.terms
    with pytest.raises(ValueError):
        SchwartzFn(P, {(-2,): 1})
    with pytest.raises(ParameterError):
        f + SchwartzFn(SpaceParams(2, 1), {})


@pytest.mark.parametrize("m,e,q", [(2, 0, 2.0), (3, 0, 3.0), (3, 1, 2.0), (2, 1, 5.0)])
def test_total_mass_one(m, e, q):
    assert abs(total_mass(SpaceParams(m, e), q, 512) - 1) < 1e-10


def test_grid_validation():
    P = SpaceParams(2, 0)
    with pytest.raises(ValueError):
        total_mass(P, 2.0, 100)
    with pytest.raises(ValueError):
        total_mass(P, 1.0, 64)


@pytest.mark.parametrize("m,e,q", [(2, 0, 2.0), (3, 1, 2.0), (3, 0, 3.0)])
def test_parseval_rank_one(m, e, q):
    P = SpaceParams(m, e)
    rng = random.Random(m * 10 + e)
    phi = SchwartzFn.random(P, 3, 3, rng)
    psi = SchwartzFn.random(P, 3, 3, rng)
    for a, b in ((phi, phi), (phi, psi)):
        r = plancherel_check(a, b, q, 512, doubling=True)
        assert r.relative < 1e-8
        assert abs(r.coarse - r.rhs) < 1e-8 * max(1, abs(r.lhs))


@pytest.mark.parametrize("m", [4, 5])
def test_parseval_rank_two(m):
    P = SpaceParams(m, 0)
    phi = SchwartzFn.random(P, 3, 2, random.Random(m))
    assert plancherel_check(phi, phi, 2.0, 64).relative < 1e-5


@pytest.mark.parametrize("m,e", [(2, 0), (3, 0), (3, 1)])
def test_inversion(m, e):
    P = SpaceParams(m, e)
    phi = SchwartzFn.random(P, 3, 3, random.Random(7))
    for lam in dominant_signatures(P, 3):
        assert inversion_check(phi, lam, 2.0, 512).residual < 1e-6


def test_literal_kernel_fails_for_odd_m():
    P = SpaceParams(3, 0)
    phi = SchwartzFn.indicator((1,), P)
    r = inversion_check(phi, (1,), 2.0, 256, conjugate=False)
    # Psi(x_lam; .) is not real here, so the unconjugated kernel flips the sign
    assert abs(r.lhs + 1) < 1e-8
    P2 = SpaceParams(2, 0)
    ok = inversion_check(SchwartzFn.indicator((1,), P2), (1,), 2.0, 256, conjugate=False)
    assert ok.residual < 1e-8


@pytest.mark.parametrize("m,e", [(2, 0), (3, 1), (4, 0), (5, 0), (5, 1)])
def test_rank_signatures_balanced(m, e):
    P = SpaceParams(m, e)
    sigs = rank_signatures(P)
    n = P.n
    assert len(sigs) == 2 ** n
    par = [sum(a + e for a in s) % 2 for s in sigs]
    assert par.count(0) == par.count(1) == 2 ** (n - 1)


@pytest.mark.parametrize("m,e,q", [(2, 0, 2.0), (3, 1, 3.0), (4, 0, 2.0), (5, 1, 3.0)])
def test_rank_nonsingular(m, e, q):
    for z, det in rank_samples(SpaceParams(m, e), q, 5, seed=3):
        assert det > 1e-8, z


def test_rank_requires_n_coordinates():
    with pytest.raises(ParameterError):
        rank_basis_check(SpaceParams(4, 0), 2.0, [0.1])
