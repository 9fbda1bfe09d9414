"""Acceptance criteria 1-10, one test each, pinned at the stated tolerances.

Each test records a PASS/FAIL line (with its runtime) that is printed in the
terminal summary.  Run directly with ``python3 tests/test_acceptance.py``.
"""
import random

import numpy as np
import pytest

from unitary_spherical import padic_cartan as pc
from unitary_spherical.exact_arith import MultiLaurent, eval_complex
from unitary_spherical.hall_littlewood import (
    TSpec,
    eval_on_angles,
    p_poly,
    plancherel_density,
    q_poly,
    q_poly_common_denominator,
    stabilizer_value,
    torus_grid,
)
from unitary_spherical.schwartz_plancherel import (
    SchwartzFn,
    dominant_signatures,
    inversion_check,
    plancherel_check,
    rank_samples,
    total_mass,
)
from unitary_spherical.spherical import (
    SpaceParams,
    check_functional_equation,
    check_holomorphic_invariance,
    omega_at_z0,
    omega_closed_rank1,
    omega_explicit,
)
from unitary_spherical.weyl_roots import enumerate_group, poincare_sum, w_tilde

PARITIES = ("even", "odd")


def test_criterion_01_p0_is_one(acceptance):
    with acceptance(1, "P_0 = 1 exactly, n in {1,2,3}, both parities", 1.0):
        for n in (1, 2, 3):
            for par in PARITIES:
                assert p_poly((0,) * n, n, TSpec.for_parity(par)) == MultiLaurent.const(n, 1)


def test_criterion_02_poincare_identity(acceptance):
    with acceptance(2, "sum over W of sigma(c) is constant and equals W_0, n in {1,2,3}", 30.0):
        for n in (1, 2, 3):
            for par in PARITIES:
                t = TSpec.for_parity(par)
                sym = q_poly((0,) * n, n, t)
                assert sym.exponents() <= {(0,) * n}
                w0 = stabilizer_value((0,) * n, t)
                assert sym == MultiLaurent.const(n, w0)
                # closed form against the group sum over W
                assert w0 == poincare_sum((0,) * n, t.t_short, t.t_long)
                if n < 3:
                    assert q_poly_common_denominator((0,) * n, n, t) == sym


def _orth_residual(n: int, par: str, q: float, grid: int) -> float:
    t = TSpec.for_parity(par)
    sigs = dominant_signatures(SpaceParams(2 * n + (par == "odd")), 3)
    theta = torus_grid(n, grid)
    dens = plancherel_density(n, t, q, theta)
    vals = np.array([eval_on_angles(p_poly(mu, n, t), q, theta) for mu in sigs])
    gram = (vals * dens) @ vals.conj().T / theta.shape[0]
    w0 = w_tilde((0,) * n, par)
    target = np.diag([complex(w0.eval(q)) / complex(w_tilde(mu, par).eval(q)) for mu in sigs])
    return float(np.max(np.abs(gram - target)))


def test_criterion_03_orthogonality(acceptance):
    with acceptance(3, "HL orthogonality, 1e-8 (n=1, grid 256) and 1e-6 (n=2, grid 64^2)", 120.0):
        for q in (2.0, 3.0):
            for par in PARITIES:
                assert _orth_residual(1, par, q, 256) < 1e-8
                assert _orth_residual(2, par, q, 64) < 1e-6


def test_criterion_04_rank_one_closed_forms(acceptance):
    with acceptance(4, "rank-one closed forms for m in {2,3}, e in {0,1}, lambda in [-e, 4]", 5.0):
        for m in (2, 3):
            for e in (0, 1):
                params = SpaceParams(m, e)
                for lam in range(-e, 5):
                    assert omega_explicit((lam,), params) == omega_closed_rank1(lam, m, e)


def test_criterion_05_bruteforce_oracle(acceptance):
    with acceptance(5, "m=2 brute-force oracle to 1e-12, stationary under precision doubling", 60.0):
        for p, e in ((3, 0), (2, 1)):
            for lam in range(-e, 3):
                N = pc.oracle_min_precision(lam, p)
                assert pc.bruteforce_distributions(lam, p, N) == pc.bruteforce_distributions(lam, p, 2 * N)
                closed = omega_closed_rank1(lam, 2, e)
                for s in (0, 1, 2, 1 + 1j):
                    bf = pc.omega_bruteforce_m2(lam, s, p, N)
                    cf = eval_complex(closed, p, [-s - 0.5])
                    assert abs(bf - cf) < 1e-12, (p, lam, s, bf, cf)


def test_criterion_06_functional_equations(acceptance):
    with acceptance(6, "functional equations < 1e-10 at 20 points for all sigma, n <= 2; "
                       "holomorphic part W-invariant", 60.0):
        for m in (2, 3, 4, 5):
            for e in (0, 1):
                params = SpaceParams(m, e)
                q = 2.0 if e else 3.0
                for lam in dominant_signatures(params, 3 if params.n == 1 else 1):
                    for sigma in enumerate_group(params.n):
                        assert check_functional_equation(lam, sigma, params, q, seed=11, count=20) < 1e-10
                    assert check_holomorphic_invariance(lam, params)


def test_criterion_07_normalization(acceptance):
    with acceptance(7, "omega(x_lambda; z_0) = 1 exactly, parts in [-e, 3], n <= 2", 10.0):
        for m in (2, 3, 4, 5):
            for e in (0, 1):
                params = SpaceParams(m, e)
                for lam in dominant_signatures(params, 3):
                    num, den = omega_at_z0(lam, params)
                    assert num == den, (m, e, lam)


def test_criterion_08_cartan_reduction(acceptance):
    with acceptance(8, "Cartan reduction of 50 K-conjugates per lambda, m in {3,5}, e in {0,1}", 120.0):
        for m in (3, 5):
            for e in (0, 1):
                params = SpaceParams(m, e)
                F = pc.QuadField(2 if e else 3)
                for idx, lam in enumerate(dominant_signatures(params, 2)):
                    x = pc.make_x_lambda(lam, m, F)
                    inv = pc.orbit_invariants(x)
                    assert inv.parity == sum(lam) % 2
                    sampler = pc.KSampler(F, seed=1000 * m + 100 * e + idx)
                    for _ in range(50):
                        y = pc.act(sampler.element(m), x)
                        assert pc.cartan_reduce(y, check=False) == lam
                        assert pc.orbit_invariants(y) == inv


def test_criterion_09_plancherel_and_inversion(acceptance):
    with acceptance(9, "Parseval 1e-8 (n=1) / 1e-5 (n=2), inversion 1e-6, total mass 1e-10", 120.0):
        for m in (2, 3, 4, 5):
            for e in (0, 1):
                params = SpaceParams(m, e)
                n = params.n
                q = 2.0 if e else 3.0
                grid, tol = (512, 1e-8) if n == 1 else (64, 1e-5)
                sigs = dominant_signatures(params, 3 if n == 1 else 2)
                for a in sigs:
                    for b in sigs:
                        r = plancherel_check(SchwartzFn.indicator(a, params), SchwartzFn.indicator(b, params), q, grid)
                        assert r.relative < tol, (m, e, a, b, r)
                if n == 1:
                    assert abs(total_mass(params, q, grid) - 1) < 1e-10
                    phi = SchwartzFn.random(params, 3, 3, random.Random(m + 10 * e))
                    for lam in dominant_signatures(params, 4):
                        assert inversion_check(phi, lam, q, grid).residual < 1e-6


def test_criterion_10_free_module_rank(acceptance):
    with acceptance(10, "2^n x 2^n determinant > 1e-8 at 10 seeded points, n in {1,2}", 10.0):
        for m in (2, 3, 4, 5):
            for e in (0, 1):
                q = 2.0 if e else 3.0
                for z, det in rank_samples(SpaceParams(m, e), q, 10, seed=2024):
                    assert det > 1e-8, (m, e, z, det)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
