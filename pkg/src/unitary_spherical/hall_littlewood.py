"""Type C_n Hall-Littlewood polynomials Q_mu, P_mu and their inner product."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exact_arith import (
    ONE,
    Q_INV,
    MultiLaurent,
    NearPoleError,
    RationalFn,
    Scalar,
    exact_divide,
    DEFAULT_POLE_THRESHOLD,
    weyl_substitute,
)
from .weyl_roots import (
    RootDatum,
    SignedPermutation,
    enumerate_group,
    inversion_set,
    poincare_sum,
    stabilizer_poincare,
    validate_signature,
)


@dataclass(frozen=True)
class TSpec:
    """Root-length dependent parameters t_alpha.

    ``parity`` records the matrix-size parity when the parameters are the
    specialization attached to a space of hermitian matrices; it selects
    the closed-form stabilizer Poincare polynomial.  Generic parameters
    leave it as ``None`` and use the group sum instead.
    """

    t_short: Scalar
    t_long: Scalar
    parity: str | None = None

    @classmethod
    def for_parity(cls, parity: str) -> "TSpec":
        if parity == "even":
            return cls(-Q_INV, Q_INV, "even")
        if parity == "odd":
            return cls(-Q_INV, -(Q_INV ** 2), "odd")
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")

    @classmethod
    def for_matrix_size(cls, m: int) -> "TSpec":
        if m < 2:
            raise ValueError("matrix size must be at least 2")
        return cls.for_parity("even" if m % 2 == 0 else "odd")

    @classmethod
    def generic(cls, t_short, t_long) -> "TSpec":
        def lift(t):
            return t if isinstance(t, Scalar) else Scalar.const(t)
        return cls(lift(t_short), lift(t_long), None)

    def t_for(self, alpha: Sequence[int], roots: RootDatum) -> Scalar:
        return self.t_long if roots.is_long(alpha) else self.t_short


def c_function(n: int, t: TSpec) -> RationalFn:
    """c(z;{t}) = prod_{alpha>0} (1 - t_alpha X^alpha) / (1 - X^alpha)."""
    if n < 1:
        raise ValueError("rank must be at least 1")
    roots = RootDatum(n)
    num = MultiLaurent.const(n, 1)
    den = MultiLaurent.const(n, 1)
    for a in roots.positive:
        xa = MultiLaurent.monomial(a)
        num = num * (1 - t.t_for(a, roots) * xa)
        den = den * (1 - xa)
    return RationalFn(num, den)


def _neg(v: Sequence[int]) -> tuple:
    return tuple(-x for x in v)


@lru_cache(maxsize=None)
def _numerator_product(n: int, t: TSpec) -> MultiLaurent:
    roots = RootDatum(n)
    out = MultiLaurent.const(n, 1)
    for a in roots.positive:
        out = out * (1 - t.t_for(a, roots) * MultiLaurent.monomial(a))
    return out


@lru_cache(maxsize=None)
def q_poly(mu: tuple, n: int, t: TSpec) -> MultiLaurent:
    """Q_mu = sum_{sigma in W} sigma(X^-mu c(z;{t})).

    The sum is put over the Weyl denominator D = X^rho prod_{alpha>0}(1 - X^-alpha),
    which is anti-invariant (sigma D = sgn(sigma) D); the numerator is then
    divided exactly by D, one binomial factor at a time.
    """
    mu = validate_signature(mu)
    if len(mu) != n:
        raise ValueError(f"mu has {len(mu)} parts, expected {n}")
    roots = RootDatum(n)
    rho = roots.rho()
    shift = tuple(a + b for a, b in zip(mu, rho))
    T = _numerator_product(n, t)
    total = MultiLaurent(n)
    for g in enumerate_group(n):
        sign = -1 if len(inversion_set(g, roots)) % 2 else 1
        term = weyl_substitute(T, g) * MultiLaurent.monomial(_neg(g.apply(shift)), sign)
        total = total + term
    if len(roots.positive) % 2:
        total = -total
    quot = exact_divide(total, MultiLaurent.monomial(rho))
    for a in roots.positive:
        quot = exact_divide(quot, 1 - MultiLaurent.monomial(_neg(a)))
    return quot


def q_poly_common_denominator(mu: Sequence[int], n: int, t: TSpec) -> MultiLaurent:
    """Q_mu assembled over prod_{alpha in Sigma}(1 - X^alpha) and divided once.

    Slower than :func:`q_poly`; kept as an independent cross-check.
    """
    mu = validate_signature(mu)
    roots = RootDatum(n)
    pos = roots.positive
    all_roots = pos + [_neg(a) for a in pos]
    full = MultiLaurent.const(n, 1)
    for b in all_roots:
        full = full * (1 - MultiLaurent.monomial(b))
    total = MultiLaurent(n)
    for g in enumerate_group(n):
        image = {g.apply(a) for a in pos}
        term = MultiLaurent.monomial(_neg(g.apply(mu)))
        for a in pos:
            term = term * (1 - t.t_for(a, roots) * MultiLaurent.monomial(g.apply(a)))
        for b in all_roots:
            if b not in image:
                term = term * (1 - MultiLaurent.monomial(b))
        total = total + term
    return exact_divide(total, full)


def stabilizer_value(mu: Sequence[int], t: TSpec) -> Scalar:
    """W_mu({t}): closed form for the hermitian specializations, group sum otherwise."""
    if t.parity is not None:
        return stabilizer_poincare(mu, t.parity)
    return poincare_sum(mu, t.t_short, t.t_long)


@lru_cache(maxsize=None)
def p_poly(mu: tuple, n: int, t: TSpec) -> MultiLaurent:
    """P_mu = Q_mu / W_mu({t})."""
    mu = validate_signature(mu)
    w = stabilizer_value(mu, t)
    if w.is_zero():
        raise ZeroDivisionError(f"W_mu vanishes for mu={mu}")
    return exact_divide(q_poly(mu, n, t), w)


def _generators(n: int) -> list:
    return [SignedPermutation.transposition(n, i) for i in range(n - 1)] + [SignedPermutation.tau(n)]


class NotInvariantError(ValueError):
    def __init__(self, sigma: SignedPermutation) -> None:
        super().__init__(f"not W-invariant (fails for sigma={sigma})")
        self.sigma = sigma


def invariance_witness(f: MultiLaurent) -> SignedPermutation | None:
    """A generator of W moving f, or None if f is W-invariant."""
    for g in _generators(f.nvars):
        if weyl_substitute(f, g) != f:
            return g
    return None


def _order_key(alpha: tuple) -> tuple:
    return (tuple(sorted((abs(a) for a in alpha), reverse=True)), alpha)


def _is_dominant(alpha: tuple) -> bool:
    return all(a >= b for a, b in zip(alpha, alpha[1:])) and alpha[-1] >= 0


def expand_in_p_basis(f: MultiLaurent, n: int, t: TSpec) -> dict:
    """Coefficients c_mu (Scalars) with f = sum c_mu P_mu."""
    if f.nvars != n:
        raise ValueError(f"expected {n} variables")
    witness = invariance_witness(f)
    if witness is not None:
        raise NotInvariantError(witness)
    out: dict = {}
    rest = f
    while not rest.is_zero():
        dominant = [a for a in rest.exponents() if _is_dominant(a)]
        top = max(dominant, key=_order_key)
        coeff = rest.coefficient(top)
        rest = rest - coeff * p_poly(top, n, t)
        if not rest.coefficient(top).is_zero():
            raise ArithmeticError(f"elimination stalled at {top}")
        out[top] = coeff
    return dict(sorted(out.items(), key=lambda kv: _order_key(kv[0])))


def reconstruct(expansion: dict, n: int, t: TSpec) -> MultiLaurent:
    total = MultiLaurent(n)
    for mu, c in expansion.items():
        total = total + c * p_poly(tuple(mu), n, t)
    return total


# ---------------------------------------------------------------------------
# Numerics on the compact torus


def torus_grid(n: int, grid: int) -> np.ndarray:
    """Angles theta (shape (grid**n, n)) with X_j = exp(i theta_j)."""
    axis = 2 * np.pi * np.arange(grid) / grid
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def eval_on_angles(p: MultiLaurent, q_val: float, theta: np.ndarray) -> np.ndarray:
    """Vectorised evaluation at z = i theta / log q (so X_j = e^{i theta_j})."""
    flat = p.flat_terms()
    if not flat:
        return np.zeros(theta.shape[0], dtype=complex)
    keys = np.array(list(flat), dtype=float)
    sq = np.sqrt(q_val)
    coeffs = np.array([complex(c) for c in flat.values()]) * sq ** keys[:, 0]
    phase = np.exp(1j * theta @ keys[:, 1:].T)
    return phase @ coeffs


def inverse_c_squared(n: int, t: TSpec, q_val: float, theta: np.ndarray,
                      threshold: float = DEFAULT_POLE_THRESHOLD) -> np.ndarray:
    """1/|c(z)|^2 on the unitary axis, computed without dividing by 1 - X^alpha."""
    roots = RootDatum(n)
    out = np.ones(theta.shape[0])
    for a in roots.positive:
        xa = np.exp(1j * theta @ np.array(a, dtype=float))
        ta = t.t_for(a, roots).eval(q_val)
        den = np.abs(1 - ta * xa)
        if den.min() < threshold:
            raise NearPoleError(float(den.min()))
        out *= np.abs(1 - xa) ** 2 / den ** 2
    return out


def measure_constant(n: int, t: TSpec) -> Scalar:
    """W_0({t}) (the Poincare polynomial of W); divided by |W| in the density."""
    return stabilizer_value((0,) * n, t)


def plancherel_density(n: int, t: TSpec, q_val: float, theta: np.ndarray) -> np.ndarray:
    size = len(enumerate_group(n))
    const = measure_constant(n, t).eval(q_val).real / size
    return const * inverse_c_squared(n, t, q_val, theta)


def inner_product_numeric(f: MultiLaurent, g: MultiLaurent, n: int, t: TSpec,
                          q_val: float, grid: int) -> complex:
    """Trapezoid rule for <f, g> = int f conj(g) d mu over the torus."""
    if q_val <= 1:
        raise ValueError("q_val must exceed 1")
    if grid < 8:
        raise ValueError("grid must be at least 8")
    theta = torus_grid(n, grid)
    dens = plancherel_density(n, t, q_val, theta)
    fv = eval_on_angles(f, q_val, theta)
    gv = eval_on_angles(g, q_val, theta)
    return complex(np.mean(fv * np.conj(gv) * dens))
