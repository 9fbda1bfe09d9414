"""Explicit spherical functions omega(x_lambda; z), their normalization Psi,
the rank-one closed forms and the Weyl-group functional equations."""
from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from typing import Sequence

from .exact_arith import (
    I,
    ONE,
    Q_INV,
    V,
    GaussianRational,
    MultiLaurent,
    NearPoleError,
    RationalFn,
    Scalar,
    eval_complex,
    exact_divide,
    specialize,
    weyl_substitute,
)
from .hall_littlewood import TSpec, invariance_witness, p_poly, q_poly
from .weyl_roots import (
    RootDatum,
    SignedPermutation,
    enumerate_group,
    inversion_set,
    poincare_w,
    validate_signature,
    w_tilde,
)


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SpaceParams:
    """Matrix size m (so n = floor(m/2)) and e = v_pi(2) of the base field."""

    m: int
    e: int = 0

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ParameterError("matrix size m must be at least 2")
        if self.e not in (0, 1):
            if self.m % 2:
                raise ParameterError(
                    f"odd m requires e <= 1 (the explicit formula assumes e <= 1 for odd m); got e={self.e}")
            raise ParameterError(f"e must be 0 or 1 over Q_p; got e={self.e}")

    @property
    def n(self) -> int:
        return self.m // 2

    @property
    def parity(self) -> str:
        return "even" if self.m % 2 == 0 else "odd"

    @property
    def odd(self) -> bool:
        return self.m % 2 == 1

    @property
    def tspec(self) -> TSpec:
        return TSpec.for_matrix_size(self.m)

    def signature(self, lam: Sequence[int]) -> tuple:
        lam = validate_signature(lam, self.e)
        if len(lam) != self.n:
            raise ParameterError(f"lambda needs {self.n} parts for m={self.m}")
        return lam

    def base_signature(self) -> tuple:
        return (-self.e,) * self.n


# ---------------------------------------------------------------------------
# z_0 and the change of variables


def zeta_point(params: SpaceParams) -> list:
    """Exact Scalars q^{z_{0,i}}, i = 1..n."""
    n = params.n
    out = []
    for i in range(1, n + 1):
        sign = -1 if (n - i) % 2 else 1
        if params.odd:
            out.append(Scalar.v_power(-2 * (n - i + 1), GaussianRational(0, sign)))
        else:
            out.append(Scalar.v_power(-(2 * (n - i) + 1), sign))
    return out


def z0_complex(params: SpaceParams, q_val: float) -> list:
    n = params.n
    lq = math.log(q_val)
    out = []
    for i in range(1, n + 1):
        if params.odd:
            out.append(complex(-(n - i + 1), (n - i + 0.5) * math.pi / lq))
        else:
            out.append(complex(-(n - i + 0.5), (n - i) * math.pi / lq))
    return out


def z_to_s(z: Sequence[complex], params: SpaceParams, q_val: float) -> list:
    n = params.n
    if len(z) != n:
        raise ParameterError(f"need {n} coordinates")
    shift = 1j * math.pi / math.log(q_val)
    s = [-z[i] + z[i + 1] - 1 + shift for i in range(n - 1)]
    if params.odd:
        s.append(-z[n - 1] - 1 + shift / 2)
    else:
        s.append(-z[n - 1] - 0.5)
    return s


def s_to_z(s: Sequence[complex], params: SpaceParams, q_val: float) -> list:
    n = params.n
    if len(s) != n:
        raise ParameterError(f"need {n} coordinates")
    shift = 1j * math.pi / math.log(q_val)
    z = [0j] * n
    z[n - 1] = -s[n - 1] - 1 + shift / 2 if params.odd else -s[n - 1] - 0.5
    for i in range(n - 2, -1, -1):
        z[i] = -s[i] + z[i + 1] - 1 + shift
    return z


def q_pair_z0(lam: Sequence[int], params: SpaceParams) -> Scalar:
    """q^{<lam, z_0>} as an exact Scalar."""
    out = ONE
    for a, zi in zip(lam, zeta_point(params)):
        out = out * zi ** a
    return out


# ---------------------------------------------------------------------------
# G, Gamma and omega


def g_factor(params: SpaceParams) -> RationalFn:
    """G(z) = prod (1 + X^alpha)/(1 - q^-1 X^alpha) over the parity-dependent root set."""
    n = params.n
    roots = RootDatum(n)
    chosen = roots.positive if params.odd else roots.short_pos
    num = MultiLaurent.const(n, 1)
    den = MultiLaurent.const(n, 1)
    for a in chosen:
        xa = MultiLaurent.monomial(a)
        num = num * (1 + xa)
        den = den * (1 - Q_INV * xa)
    return RationalFn(num, den)


def at_sigma_z(f, sigma: SignedPermutation):
    """The function z -> f(sigma z), as a substitution on the X variables."""
    return weyl_substitute(f, sigma.inverse())


def gamma_factor(alpha: Sequence[int], params: SpaceParams) -> RationalFn:
    n = params.n
    roots = RootDatum(n)
    xa = MultiLaurent.monomial(alpha)
    if roots.is_long(alpha):
        shift = MultiLaurent.monomial(tuple(params.e * a for a in alpha))
        if not params.odd:
            return RationalFn(shift, 1)
        return RationalFn(shift * (1 - Q_INV * xa), xa - Q_INV)
    return RationalFn(1 - Q_INV * xa, xa - Q_INV)


def gamma_sigma(sigma: SignedPermutation, params: SpaceParams) -> RationalFn:
    """prod_{alpha in Sigma^+(sigma)} gamma_alpha(z)."""
    n = params.n
    out = RationalFn(MultiLaurent.const(n, 1), 1)
    for a in inversion_set(sigma, RootDatum(n)):
        out = out * gamma_factor(a, params)
    return out


def gamma_sigma_quotient(sigma: SignedPermutation, params: SpaceParams) -> RationalFn:
    """[q^{<e,z>}/G(z)] * [G(sigma z)/q^{<e,sigma z>}]."""
    n = params.n
    g = g_factor(params)
    xe = RationalFn(MultiLaurent.monomial((params.e,) * n), 1)
    return xe / g * at_sigma_z(g, sigma) / at_sigma_z(xe, sigma)


def c_n_parts(params: SpaceParams) -> tuple:
    """(numerator, denominator) Scalars of the constant c_n."""
    n = params.n
    num = (1 - Q_INV ** 2) ** n
    if params.odd:
        num = num * (1 + Q_INV)
    return num, poincare_w(params.m, -Q_INV)


def omega_explicit(lam: Sequence[int], params: SpaceParams) -> RationalFn:
    """omega(x_lam; z) = c_n q^{<lam,z_0>} q^{<e,z>} / G(z) * Q_{lam+e}(z)."""
    lam = params.signature(lam)
    n = params.n
    mu = tuple(a + params.e for a in lam)
    Q = q_poly(mu, n, params.tspec)
    cnum, cden = c_n_parts(params)
    g = g_factor(params)
    num = Q * g.den * MultiLaurent.monomial((params.e,) * n) * (cnum * q_pair_z0(lam, params))
    den = g.num * cden
    return RationalFn(num, den)


def omega_closed_rank1(lam: int, m: int, e: int) -> RationalFn:
    """Independent transcription of the closed forms for m = 2 and m = 3."""
    if m not in (2, 3):
        raise ParameterError("closed forms exist only for m = 2, 3")
    params = SpaceParams(m, e)
    if lam < -e:
        raise ParameterError(f"lambda must be >= -e = {-e}")
    X = lambda k: MultiLaurent.monomial((k,))
    k = lam + e
    one = MultiLaurent.const(1, 1)
    if m == 2:
        pref = RationalFn(X(e) * Scalar.v_power(-lam), 1 + Q_INV * one)
        a = RationalFn(X(-k) * (1 - Q_INV * X(2)), 1 - X(2))
        b = RationalFn(X(k) * (1 - Q_INV * X(-2)), 1 - X(-2))
        return pref * (a + b)
    unit = Scalar.const(I ** lam)
    pref = RationalFn(X(e) * (1 - Q_INV * X(2)) * unit * Scalar.q_power(-lam),
                      (1 + Q_INV ** 3) * (1 + X(2)))
    a = RationalFn(X(-k) * (1 + Q_INV ** 2 * X(2)), 1 - X(2))
    b = RationalFn(X(k) * (1 + Q_INV ** 2 * X(-2)), 1 - X(-2))
    return pref * (a + b)


def omega_at_z0(lam: Sequence[int], params: SpaceParams) -> tuple:
    """(numerator, denominator) of omega(x_lam; z_0) as exact Scalars."""
    return specialize(omega_explicit(lam, params), zeta_point(params))


# ---------------------------------------------------------------------------
# Psi


def psi_scalar(lam: Sequence[int], params: SpaceParams) -> tuple:
    """(num, den) Scalars with Psi(x_lam) = num/den * P_{lam+e}."""
    lam = params.signature(lam)
    mu = tuple(a + params.e for a in lam)
    num = q_pair_z0(mu, params) * w_tilde(mu, params.parity)
    den = w_tilde((0,) * params.n, params.parity)
    return num, den


def simplify(rf: RationalFn):
    """Cancel common v-content, then return the MultiLaurent num/den when exact, else rf."""
    rf = rf.cancel_content()
    try:
        return rf.to_polynomial()
    except ArithmeticError:
        return rf


def psi_normalized(lam: Sequence[int], params: SpaceParams) -> RationalFn:
    """Psi(x_lam; z) = q^{<lam+e,z_0>} w~_{lam+e}/w~_0 * P_{lam+e}(z).

    The scalar w~_{lam+e}/w~_0 need not be a Laurent polynomial in v, so the
    result is a RationalFn whose denominator carries no X variables.
    """
    lam = params.signature(lam)
    mu = tuple(a + params.e for a in lam)
    num, den = psi_scalar(lam, params)
    P = p_poly(mu, params.n, params.tspec)
    return RationalFn(P * num, MultiLaurent.const(params.n, den))


def psi_quotient(lam: Sequence[int], params: SpaceParams) -> RationalFn:
    """omega(x_lam; z) / omega(x_{-e}; z)."""
    return omega_explicit(lam, params) / omega_explicit(params.base_signature(), params)


# ---------------------------------------------------------------------------
# Functional equations


def holomorphic_part(lam: Sequence[int], params: SpaceParams) -> tuple:
    """Return (H, s) with q^{-<e,z>} G(z) omega(x_lam; z) = H / s.

    H is an exact MultiLaurent and s an X-free Scalar; raises
    InexactDivisionError if the product is not a Laurent polynomial in X.
    """
    n = params.n
    om = omega_explicit(lam, params)
    g = g_factor(params)
    num = om.num * g.num * MultiLaurent.monomial((-params.e,) * n)
    den = om.den * g.den
    _, cden = c_n_parts(params)
    return exact_divide(num * cden, den), cden


def check_holomorphic_invariance(lam: Sequence[int], params: SpaceParams) -> bool:
    h, _ = holomorphic_part(lam, params)
    return invariance_witness(h) is None


def sample_points(n: int, q_val: float, count: int, rng: random.Random,
                  jitter: float = 0.05) -> list:
    lq = math.log(q_val)
    pts = []
    for _ in range(count):
        pts.append([complex(rng.gauss(0, jitter), rng.uniform(0, 2 * math.pi) / lq)
                    for _ in range(n)])
    return pts


def check_functional_equation(lam: Sequence[int], sigma: SignedPermutation,
                              params: SpaceParams, q_val: float,
                              z_samples: Sequence[Sequence[complex]] | None = None,
                              seed: int = 0, count: int = 20, retries: int = 50) -> float:
    """max over samples of |omega(z) - Gamma_sigma(z) omega(sigma z)| / max(1, |omega(z)|)."""
    om = omega_explicit(lam, params)
    gam = gamma_sigma(sigma, params)
    rng = random.Random(seed)
    samples = list(z_samples) if z_samples is not None else sample_points(params.n, q_val, count, rng)
    worst = 0.0
    for z in samples:
        for _ in range(retries):
            try:
                sz = list(sigma.apply(z))
                lhs = eval_complex(om, q_val, z)
                rhs = eval_complex(gam, q_val, z) * eval_complex(om, q_val, sz)
                break
            except NearPoleError:
                z = sample_points(params.n, q_val, 1, rng)[0]
        else:
            raise NearPoleError(0.0)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst
