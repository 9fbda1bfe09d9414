"""Hyperoctahedral Weyl group, type C root data and Poincare polynomials."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .exact_arith import ONE, Q_INV, Scalar, exact_divide


@dataclass(frozen=True)
class SignedPermutation:
    """sigma(e_i) = signs[i] * e_{perm[i]}  (indices are 0-based)."""

    perm: tuple
    signs: tuple

    def __post_init__(self) -> None:
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"{self.perm} is not a permutation")
        if len(self.signs) != len(self.perm) or any(s not in (1, -1) for s in self.signs):
            raise ValueError(f"bad signs {self.signs}")

    @property
    def n(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(tuple(range(n)), (1,) * n)

    @classmethod
    def tau(cls, n: int) -> "SignedPermutation":
        """Negation of the last coordinate."""
        return cls(tuple(range(n)), (1,) * (n - 1) + (-1,))

    @classmethod
    def transposition(cls, n: int, i: int) -> "SignedPermutation":
        """Swap coordinates i and i+1."""
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        return cls(tuple(perm), (1,) * n)

    def apply(self, vec: Sequence) -> tuple:
        out = [0] * self.n
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            out[p] = s * vec[i]
        return tuple(out)

    def __mul__(self, other: "SignedPermutation") -> "SignedPermutation":
        """Composition self o other."""
        if other.n != self.n:
            raise ValueError("rank mismatch")
        perm = tuple(self.perm[other.perm[i]] for i in range(self.n))
        signs = tuple(other.signs[i] * self.signs[other.perm[i]] for i in range(self.n))
        return SignedPermutation(perm, signs)

    def inverse(self) -> "SignedPermutation":
        perm = [0] * self.n
        signs = [1] * self.n
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            perm[p] = i
            signs[p] = s
        return SignedPermutation(tuple(perm), tuple(signs))

    def matrix(self) -> list:
        m = [[0] * self.n for _ in range(self.n)]
        for i, (p, s) in enumerate(zip(self.perm, self.signs)):
            m[p][i] = s
        return m

    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.n)) and all(s == 1 for s in self.signs)

    def length(self) -> int:
        return len(inversion_set(self, RootDatum(self.n)))

    def sign(self) -> int:
        return -1 if self.length() % 2 else 1


@dataclass(frozen=True)
class RootDatum:
    n: int

    @property
    def short_pos(self) -> list:
        out = []
        for i in range(self.n):
            for j in range(i + 1, self.n):
                for s in (-1, 1):
                    v = [0] * self.n
                    v[i] = 1
                    v[j] = s
                    out.append(tuple(v))
        return out

    @property
    def long_pos(self) -> list:
        out = []
        for i in range(self.n):
            v = [0] * self.n
            v[i] = 2
            out.append(tuple(v))
        return out

    @property
    def positive(self) -> list:
        return self.short_pos + self.long_pos

    def is_long(self, alpha: Sequence[int]) -> bool:
        return sum(abs(a) for a in alpha) == 2 and max(abs(a) for a in alpha) == 2

    def rho(self) -> tuple:
        """Half the sum of positive roots, (n, n-1, ..., 1)."""
        return tuple(self.n - i for i in range(self.n))


def is_positive(alpha: Sequence[int]) -> bool:
    for a in alpha:
        if a:
            return a > 0
    return False


@lru_cache(maxsize=None)
def _group(n: int) -> tuple:
    elems = [SignedPermutation(p, s)
             for p in itertools.permutations(range(n))
             for s in itertools.product((-1, 1), repeat=n)]
    elems.sort(key=lambda g: (g.perm, g.signs))
    return tuple(elems)


def enumerate_group(n: int) -> list:
    """All 2^n n! signed permutations, lexicographic in (perm, signs)."""
    if n < 1:
        raise ValueError("rank must be at least 1")
    return list(_group(n))


def inversion_set(sigma: SignedPermutation, roots: RootDatum) -> list:
    if sigma.n != roots.n:
        raise ValueError("rank mismatch")
    return [a for a in roots.positive if not is_positive(sigma.apply(a))]


def longest_element(n: int) -> SignedPermutation:
    return SignedPermutation(tuple(range(n)), (-1,) * n)


def poincare_w(m_size: int, t: Scalar) -> Scalar:
    """w_m(t) = prod_{i=1}^m (1 - t^i)."""
    if m_size < 0:
        raise ValueError("m_size must be non-negative")
    out = ONE
    for i in range(1, m_size + 1):
        out = out * (1 - t ** i)
    return out


def validate_signature(lam: Sequence[int], floor: int = 0) -> tuple:
    lam = tuple(int(x) for x in lam)
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"{lam} is not weakly decreasing")
    if lam and lam[-1] < -floor:
        raise ValueError(f"{lam} has a part below {-floor}")
    return lam


@dataclass(frozen=True)
class Signature:
    """lambda_1 >= ... >= lambda_n >= -e."""

    entries: tuple
    floor: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", validate_signature(self.entries, self.floor))

    @property
    def n(self) -> int:
        return len(self.entries)

    def shifted(self) -> tuple:
        """lambda + e."""
        return tuple(a + self.floor for a in self.entries)

    def __iter__(self):
        return iter(self.entries)


def multiplicities(mu: Sequence[int]) -> dict:
    out: dict = {}
    for a in mu:
        out[a] = out.get(a, 0) + 1
    return out


def w_tilde(mu: Sequence[int], m_parity: str, t: Scalar | None = None) -> Scalar:
    """The product of w_k(t) attached to the multiplicities of mu.

    Even matrix size: w_{n0}^2 prod_{l>=1} w_{n_l}.  Odd matrix size:
    w_{n0+1} w_{n0} prod_{l>=1} w_{n_l}, used for n0 = 0 as well.
    """
    mu = validate_signature(mu)
    t = -Q_INV if t is None else t
    counts = multiplicities(mu)
    n0 = counts.pop(0, 0)
    out = ONE
    for c in counts.values():
        out = out * poincare_w(c, t)
    if m_parity == "even":
        out = out * poincare_w(n0, t) ** 2
    elif m_parity == "odd":
        out = out * poincare_w(n0 + 1, t) * poincare_w(n0, t)
    else:
        raise ValueError(f"parity must be 'even' or 'odd', got {m_parity!r}")
    return out


def m_prime(n: int, m_parity: str) -> int:
    m = 2 * n if m_parity == "even" else 2 * n + 1
    return (m + 1) // 2


def stabilizer_poincare(mu: Sequence[int], m_parity: str, t: Scalar | None = None) -> Scalar:
    """W_mu({t}) = w~_mu(t) / (1 + q^-1)^{m'}, an exact Laurent polynomial in v."""
    mu = validate_signature(mu)
    return exact_divide(w_tilde(mu, m_parity, t), (1 + Q_INV) ** m_prime(len(mu), m_parity))


def poincare_sum(mu: Sequence[int], t_short: Scalar, t_long: Scalar) -> Scalar:
    """sum over the stabilizer W_mu of prod_{alpha in inversions} t_alpha."""
    mu = tuple(mu)
    n = len(mu)
    roots = RootDatum(n)
    total = Scalar()
    for g in enumerate_group(n):
        if g.apply(mu) != mu:
            continue
        term = ONE
        for a in inversion_set(g, roots):
            term = term * (t_long if roots.is_long(a) else t_short)
        total = total + term
    return total
