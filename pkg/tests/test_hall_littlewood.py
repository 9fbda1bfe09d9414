import pytest

from unitary_spherical.exact_arith import MultiLaurent, Q_INV, Scalar, weyl_substitute
from unitary_spherical.hall_littlewood import (
    NotInvariantError,
    TSpec,
    c_function,
    expand_in_p_basis,
    inner_product_numeric,
    invariance_witness,
    p_poly,
    q_poly,
    q_poly_common_denominator,
    reconstruct,
    stabilizer_value,
)
from unitary_spherical.weyl_roots import enumerate_group, w_tilde


@pytest.mark.parametrize("parity", ["even", "odd"])
@pytest.mark.parametrize("n", [1, 2])
def test_q_poly_two_methods_agree(parity, n):
    t = TSpec.for_parity(parity)
    for mu in ([(0,), (1,), (2,)] if n == 1 else [(0, 0), (1, 0), (1, 1), (2, 1)]):
        assert q_poly(mu, n, t) == q_poly_common_denominator(mu, n, t)


def test_symmetrization_of_c_is_constant_rank_one():
    t = TSpec.for_parity("even")
    c = c_function(1, t)
    total = sum((weyl_substitute(c, g) for g in enumerate_group(1)[1:]), weyl_substitute(c, enumerate_group(1)[0]))
    w0 = stabilizer_value((0,), t)
    assert total == MultiLaurent.const(1, w0)


@pytest.mark.parametrize("parity", ["even", "odd"])
def test_p_is_w_invariant_and_monic(parity):
    t = TSpec.for_parity(parity)
    P = p_poly((2, 1), 2, t)
    assert invariance_witness(P) is None
    assert P.coefficient((2, 1)) == Scalar.const(1)


def test_generic_parameters():
    t = TSpec.generic(Scalar.const(0), Scalar.const(0))
    # t = 0 gives the orbit sums (monomial symmetric functions)
    P = p_poly((1, 0), 2, t)
    x1, x2 = MultiLaurent.var(2, 0), MultiLaurent.var(2, 1)
    assert P == x1 + x1 ** -1 + x2 + x2 ** -1


def test_expansion_roundtrip():
    t = TSpec.for_parity("odd")
    f = p_poly((2, 0), 2, t) * 3 + p_poly((1, 1), 2, t) * Scalar.v_power(-1) + p_poly((0, 0), 2, t)
    exp = expand_in_p_basis(f, 2, t)
    assert set(exp) == {(2, 0), (1, 1), (0, 0)}
    assert reconstruct(exp, 2, t) == f


def test_expansion_rejects_non_invariant():
    with pytest.raises(NotInvariantError):
        expand_in_p_basis(MultiLaurent.var(2, 0), 2, TSpec.for_parity("even"))


@pytest.mark.parametrize("parity", ["even", "odd"])
def test_orthogonality_rank_one(parity):
    t = TSpec.for_parity(parity)
    w0 = w_tilde((0,), parity).eval(3.0)
    for a in range(3):
        for b in range(3):
            val = inner_product_numeric(p_poly((a,), 1, t), p_poly((b,), 1, t), 1, t, 3.0, 128)
            want = w0 / w_tilde((a,), parity).eval(3.0) if a == b else 0
            assert abs(val - want) < 1e-9


def test_grid_validation():
    t = TSpec.for_parity("even")
    with pytest.raises(ValueError):
        inner_product_numeric(p_poly((0,), 1, t), p_poly((0,), 1, t), 1, t, 1.0, 64)
