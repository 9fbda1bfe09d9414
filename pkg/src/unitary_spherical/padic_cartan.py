"""Truncated p-adic arithmetic over Q_p and its unramified quadratic extension,
the representatives x_lambda, K-orbit invariants, Cartan reduction for odd m,
and an exact finite-sum oracle for the rank-one (m = 2) spherical integral."""
from __future__ import annotations

import cmath
import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

DEFAULT_PREC = 64


class PrecisionError(ArithmeticError):
    """Raised when a value needed for a decision is zero at the working precision."""

    def __init__(self, message: str = "precision exhausted", needed: int | None = None) -> None:
        if needed is not None:
            message = f"{message} (try precision >= {needed})"
        super().__init__(message)
        self.needed = needed


class MembershipError(ValueError):
    pass


def vp(c: int, p: int) -> int:
    if c == 0:
        raise ValueError("valuation of 0")
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Q_p


class PadicNum:
    """p^val * unit, known modulo p^abs_prec.

    ``val`` is None for a number that is zero at its precision.  Relative
    precision is ``abs_prec - val``.
    """

    __slots__ = ("p", "val", "unit", "abs_prec")

    def __init__(self, p: int, val: int | None, unit: int, abs_prec: int) -> None:
        self.p = p
        self.val = val
        self.unit = unit
        self.abs_prec = abs_prec

    @classmethod
    def zero(cls, p: int, abs_prec: int) -> "PadicNum":
        return cls(p, None, 0, abs_prec)

    @classmethod
    def _make(cls, p: int, scaled: int, lo: int, abs_prec: int) -> "PadicNum":
        """The number scaled * p^lo, reduced modulo p^abs_prec."""
        if abs_prec <= lo:
            return cls.zero(p, abs_prec)
        s = scaled % p ** (abs_prec - lo)
        if s == 0:
            return cls.zero(p, abs_prec)
        v = 0
        while s % p == 0:
            s //= p
            v += 1
        val = lo + v
        return cls(p, val, s % p ** (abs_prec - val), abs_prec)

    @classmethod
    def from_rational(cls, p: int, x, prec: int = DEFAULT_PREC) -> "PadicNum":
        """x with ``prec`` digits of relative precision (zero gets absolute precision prec)."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, prec)
        num, den = x.numerator, x.denominator
        v = vp(num, p) - vp(den, p)
        num //= p ** vp(num, p)
        den //= p ** vp(den, p)
        mod = p ** prec
        return cls(p, v, num * pow(den, -1, mod) % mod, v + prec)

    @classmethod
    def from_parts(cls, p: int, val: int, unit: int, prec: int = DEFAULT_PREC) -> "PadicNum":
        if unit % p == 0:
            raise ValueError(f"unit part {unit} is divisible by p={p}")
        return cls(p, val, unit % p ** prec, val + prec)

    @property
    def prec(self) -> int:
        return 0 if self.val is None else self.abs_prec - self.val

    def is_zero(self) -> bool:
        return self.val is None

    def valuation(self) -> int:
        if self.val is None:
            raise PrecisionError(f"valuation undetermined: zero modulo p^{self.abs_prec}",
                                 needed=self.abs_prec + 8)
        return self.val

    def _coerce(self, other) -> "PadicNum":
        if isinstance(other, PadicNum):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other
        return PadicNum.from_rational(self.p, other, max(self.abs_prec - 0, 1) + 8)

    def __add__(self, other):
        o = self._coerce(other)
        abs_prec = min(self.abs_prec, o.abs_prec)
        live = [x for x in (self, o) if x.val is not None]
        if not live:
            return PadicNum.zero(self.p, abs_prec)
        lo = min(x.val for x in live)
        scaled = sum(x.unit * self.p ** (x.val - lo) for x in live)
        return PadicNum._make(self.p, scaled, lo, abs_prec)

    __radd__ = __add__

    def __neg__(self):
        if self.val is None:
            return self
        return PadicNum._make(self.p, -self.unit, self.val, self.abs_prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if self.val is None and o.val is None:
            return PadicNum.zero(self.p, self.abs_prec + o.abs_prec)
        if self.val is None:
            return PadicNum.zero(self.p, self.abs_prec + o.val)
        if o.val is None:
            return PadicNum.zero(self.p, o.abs_prec + self.val)
        val = self.val + o.val
        abs_prec = min(self.abs_prec + o.val, o.abs_prec + self.val)
        return PadicNum._make(self.p, self.unit * o.unit, val, abs_prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNum":
        v = self.valuation()
        rel = self.abs_prec - v
        return PadicNum(self.p, -v, pow(self.unit, -1, self.p ** rel), -v + rel)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        out = PadicNum.from_rational(self.p, 1, self.prec or self.abs_prec)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = out * base
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, (PadicNum, int, Fraction)):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def to_fraction(self) -> Fraction:
        if self.val is None:
            return Fraction(0)
        u = self.unit
        mod = self.p ** self.prec
        if u > mod // 2:
            u -= mod
        return Fraction(u) * Fraction(self.p) ** self.val

    def serialize(self) -> str:
        if self.val is None:
            return "inf,0"
        return f"{self.val},{self.unit}"

    def __repr__(self) -> str:
        if self.val is None:
            return f"O({self.p}^{self.abs_prec})"
        return f"{self.p}^{self.val}*{self.unit} + O({self.p}^{self.abs_prec})"


def smallest_nonresidue(p: int) -> int:
    for c in range(2, p):
        if pow(c, (p - 1) // 2, p) == p - 1:
            return c
    raise ValueError(f"no non-residue mod {p}")


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p ** 0.5) + 1))


@dataclass(frozen=True)
class QuadField:
    """k' = Q_p(sqrt eps) with integral basis {1, omega}, omega = (1 + sqrt eps)/2."""

    p: int
    prec: int = DEFAULT_PREC

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def e(self) -> int:
        return 1 if self.p == 2 else 0

    @property
    def eps(self) -> int:
        return 5 if self.p == 2 else smallest_nonresidue(self.p)

    @cached_property
    def kappa(self) -> PadicNum:
        # omega^2 = omega + kappa
        return self.k(Fraction(self.eps - 1, 4))

    def k(self, x) -> PadicNum:
        return PadicNum.from_rational(self.p, x, self.prec)

    def elem(self, a=0, b=0) -> "QuadExtNum":
        a = a if isinstance(a, PadicNum) else self.k(a)
        b = b if isinstance(b, PadicNum) else self.k(b)
        return QuadExtNum(self, a, b)

    @property
    def zero(self) -> "QuadExtNum":
        return self.elem(0, 0)

    @property
    def one(self) -> "QuadExtNum":
        return self.elem(1, 0)

    @property
    def omega(self) -> "QuadExtNum":
        return self.elem(0, 1)

    @property
    def sqrt_eps(self) -> "QuadExtNum":
        return self.elem(-1, 2)

    def pi_power(self, k: int) -> "QuadExtNum":
        return self.elem(PadicNum.from_parts(self.p, k, 1, self.prec), 0)


class QuadExtNum:
    __slots__ = ("field", "a", "b")

    def __init__(self, field: QuadField, a: PadicNum, b: PadicNum) -> None:
        self.field = field
        self.a = a
        self.b = b

    def _coerce(self, other) -> "QuadExtNum":
        if isinstance(other, QuadExtNum):
            return other
        if isinstance(other, PadicNum):
            return QuadExtNum(self.field, other, self.field.k(0))
        return self.field.elem(other, 0)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadExtNum(self.field, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadExtNum(self.field, -self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        return QuadExtNum(self.field, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        bd = self.b * o.b
        return QuadExtNum(self.field, self.a * o.a + self.field.kappa * bd,
                          self.a * o.b + self.b * o.a + bd)

    __rmul__ = __mul__

    def conj(self) -> "QuadExtNum":
        return QuadExtNum(self.field, self.a + self.b, -self.b)

    def norm(self) -> PadicNum:
        return self.a * self.a + self.a * self.b - self.field.kappa * self.b * self.b

    def trace(self) -> PadicNum:
        return self.a + self.a + self.b

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def valuation(self) -> int:
        vals = [x.val for x in (self.a, self.b) if x.val is not None]
        if not vals:
            raise PrecisionError("entry is zero at working precision",
                                 needed=min(self.a.abs_prec, self.b.abs_prec) + 8)
        return min(vals)

    def valuation_or_none(self) -> int | None:
        vals = [x.val for x in (self.a, self.b) if x.val is not None]
        return min(vals) if vals else None

    def inverse(self) -> "QuadExtNum":
        nrm = self.norm()
        if nrm.is_zero():
            raise PrecisionError("division by an element that is zero at working precision")
        inv = nrm.inverse()
        c = self.conj()
        return QuadExtNum(self.field, c.a * inv, c.b * inv)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def in_base_field(self) -> bool:
        return self.b.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, (QuadExtNum, PadicNum, int, Fraction)):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def to_complex_pair(self) -> tuple:
        return self.a.to_fraction(), self.b.to_fraction()

    def __repr__(self) -> str:
        return f"({self.a!r}) + ({self.b!r})*w"


# ---------------------------------------------------------------------------
# Matrices


Matrix = list


def identity(F: QuadField, m: int) -> Matrix:
    return [[F.one if i == j else F.zero for j in range(m)] for i in range(m)]


def j_matrix(F: QuadField, m: int) -> Matrix:
    return [[F.one if i + j == m - 1 else F.zero for j in range(m)] for i in range(m)]


def _zero_cap(z: QuadExtNum, y: QuadExtNum) -> int:
    """Absolute precision of z * y when z is zero at its precision."""
    vy = [c.val if c.val is not None else c.abs_prec for c in (y.a, y.b)]
    return min(z.a.abs_prec, z.b.abs_prec) + min(vy)


def mat_mul(x: Matrix, y: Matrix) -> Matrix:
    """Product; zero factors are skipped but still cap the precision of the sum."""
    m, k, n = len(x), len(y), len(y[0])
    F = x[0][0].field
    out = []
    for i in range(m):
        row = []
        xi = x[i]
        for j in range(n):
            acc = None
            cap = None
            for t in range(k):
                a, b = xi[t], y[t][j]
                if a.is_zero() or b.is_zero():
                    c = _zero_cap(a, b) if a.is_zero() else _zero_cap(b, a)
                    cap = c if cap is None else min(cap, c)
                    continue
                term = a * b
                acc = term if acc is None else acc + term
            if acc is None:
                acc = QuadExtNum(F, PadicNum.zero(F.p, cap), PadicNum.zero(F.p, cap))
            elif cap is not None and cap < max(acc.a.abs_prec, acc.b.abs_prec):
                z = PadicNum.zero(F.p, cap)
                acc = QuadExtNum(F, acc.a + z, acc.b + z)
            row.append(acc)
        out.append(row)
    return out


def conj_t(x: Matrix) -> Matrix:
    return [[x[j][i].conj() for j in range(len(x))] for i in range(len(x[0]))]


def act(k: Matrix, x: Matrix) -> Matrix:
    """k . x = k x k^*."""
    return mat_mul(mat_mul(k, x), conj_t(k))


def mat_sub(x: Matrix, y: Matrix) -> Matrix:
    return [[a - b for a, b in zip(r, s)] for r, s in zip(x, y)]


def is_zero_matrix(x: Matrix) -> bool:
    return all(e.is_zero() for row in x for e in row)


def is_hermitian(x: Matrix) -> bool:
    return is_zero_matrix(mat_sub(x, conj_t(x)))


def is_unitary(g: Matrix) -> bool:
    """g^* j g = j."""
    F = g[0][0].field
    jm = j_matrix(F, len(g))
    return is_zero_matrix(mat_sub(mat_mul(mat_mul(conj_t(g), jm), g), jm))


def is_integral(x: Matrix) -> bool:
    return all(e.valuation_or_none() is None or e.valuation_or_none() >= 0 for row in x for e in row)


def in_K(g: Matrix) -> bool:
    return is_integral(g) and is_unitary(g) and det(g).valuation() == 0


def ell(a: Matrix) -> int:
    """-min v_pi(a_ij)."""
    vals = [e.valuation_or_none() for row in a for e in row]
    vals = [v for v in vals if v is not None]
    if not vals:
        raise PrecisionError("all entries vanish at working precision")
    return -min(vals)


def det(x: Matrix) -> QuadExtNum:
    c0 = char_poly(x)[0]
    return c0 if len(x) % 2 == 0 else -c0


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _poly_mul(f: list, g: list) -> list:
    out = [None] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        for j, b in enumerate(g):
            t = a * b
            out[i + j] = t if out[i + j] is None else out[i + j] + t
    return out


def char_poly_leibniz(y: Matrix) -> list:
    """Coefficients (constant first) of det(t - y), by the Leibniz expansion."""
    m = len(y)
    F = y[0][0].field
    total = [F.zero] * (m + 1)
    for perm in itertools.permutations(range(m)):
        poly = [F.one]
        for i, j in enumerate(perm):
            entry = [-y[i][j], F.one] if i == j else [-y[i][j]]
            poly = _poly_mul(poly, entry)
        sign = _perm_sign(perm)
        for d, c in enumerate(poly):
            total[d] = total[d] + c if sign > 0 else total[d] - c
    return total


def char_poly(y: Matrix) -> list:
    """Coefficients (constant first) of det(t - y), by Berkowitz's division-free recursion."""
    F = y[0][0].field
    poly = [F.one]  # highest degree first
    for r in range(len(y)):
        row = y[r][:r]
        col = [y[i][r] for i in range(r)]
        toeplitz = [F.one, -y[r][r]]
        vec = col
        for _ in range(r):
            acc = F.zero
            for a, b in zip(row, vec):
                acc = acc + a * b
            toeplitz.append(-acc)
            vec = [sum((y[i][j] * vec[j] for j in range(r)), F.zero) for i in range(r)]
        new = []
        for i in range(r + 2):
            acc = F.zero
            for j in range(min(i, r) + 1):
                acc = acc + toeplitz[i - j] * poly[j]
            new.append(acc)
        poly = new
    return poly[::-1]


def target_char_poly(F: QuadField, m: int) -> list:
    """(t^2 - 1)^n (t - 1)^(m - 2n), the characteristic polynomial of j_m."""
    n = m // 2
    poly = [F.one]
    for _ in range(n):
        poly = _poly_mul(poly, [-F.one, F.zero, F.one])
    if m % 2:
        poly = _poly_mul(poly, [-F.one, F.one])
    return poly


def is_in_X(x: Matrix) -> bool:
    F = x[0][0].field
    m = len(x)
    if not is_hermitian(x):
        return False
    if not is_unitary(x):
        return False
    cp = char_poly(mat_mul(x, j_matrix(F, m)))
    return all((a - b).is_zero() for a, b in zip(cp, target_char_poly(F, m)))


def require_in_X(x: Matrix) -> None:
    if not is_hermitian(x):
        raise MembershipError("not hermitian at precision")
    if not is_in_X(x):
        raise MembershipError("matrix is not in X (x j x j != 1 or wrong characteristic polynomial)")


# ---------------------------------------------------------------------------
# Representatives


def make_x_lambda(lam: Sequence[int], m: int, F: QuadField) -> Matrix:
    """The representative x_lam of the K-orbit indexed by lam."""
    n = m // 2
    lam = tuple(int(a) for a in lam)
    if len(lam) != n:
        raise ValueError(f"need {n} parts for m={m}")
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError(f"{lam} is not weakly decreasing")
    if lam and lam[-1] < -F.e:
        raise ValueError(f"{lam} has a part below -e = {-F.e}")
    x = [[F.zero] * m for _ in range(m)]
    if m % 2:
        x[n][n] = F.one
    one_minus_eps = F.elem(1 - F.eps, 0)
    for i, a in enumerate(lam):
        i2 = m - 1 - i
        if a >= 0:
            x[i][i] = F.pi_power(a)
            x[i2][i2] = F.pi_power(-a)
        else:
            x[i][i] = F.pi_power(a) * one_minus_eps
            x[i][i2] = -F.sqrt_eps
            x[i2][i] = F.sqrt_eps
            x[i2][i2] = F.pi_power(-a)
    return x


@dataclass(frozen=True)
class OrbitInvariants:
    parity: int | None
    jtype: bool
    r: int | None

    def as_dict(self) -> dict:
        return {"parity": self.parity, "jtype": self.jtype, "r": self.r}


def _column_basis(y: Matrix, rank_hint: int | None = None) -> list:
    """Indices of linearly independent columns, by pivoting on minimal valuation."""
    m = len(y)
    cols = [[y[i][j] for i in range(m)] for j in range(len(y[0]))]
    work = [list(c) for c in cols]
    chosen = []
    used_rows: set = set()
    for _ in range(m):
        best = None
        for j, c in enumerate(work):
            if j in chosen:
                continue
            for i in range(m):
                if i in used_rows:
                    continue
                v = c[i].valuation_or_none()
                if v is not None and (best is None or v < best[0]):
                    best = (v, j, i)
        if best is None:
            break
        _, j, i = best
        chosen.append(j)
        used_rows.add(i)
        piv = work[j][i]
        for jj, c in enumerate(work):
            if jj in chosen:
                continue
            factor = c[i] / piv
            work[jj] = [a - factor * b for a, b in zip(c, work[j])]
        if rank_hint is not None and len(chosen) == rank_hint:
            break
    return sorted(chosen)


def orbit_invariants(x: Matrix) -> OrbitInvariants:
    F = x[0][0].field
    m = len(x)
    n = m // 2
    jm = j_matrix(F, m)
    diff = mat_sub(x, jm)
    jtype = is_integral(x) and all(
        e.valuation_or_none() is None or e.valuation_or_none() >= 1 for row in diff for e in row)
    r = -ell(diff) if jtype else None
    # parity: the +1 eigenspace of x j carries a hermitian form (via j) whose
    # determinant class in k^x / N(k'^x) records |lambda| mod 2
    y = mat_mul(x, jm)
    ypj = [[y[i][j] + (F.one if i == j else F.zero) for j in range(m)] for i in range(m)]
    dim = n + (m % 2)
    idx = _column_basis(ypj, dim)
    parity = None
    if len(idx) == dim:
        W = [[ypj[i][j] for j in idx] for i in range(m)]
        gram = mat_mul(mat_mul(conj_t(W), jm), W)
        d = det(gram)
        if not d.is_zero():
            parity = (d.valuation() - n * F.e) % 2
    return OrbitInvariants(parity, jtype, r)


# ---------------------------------------------------------------------------
# Elementary K-elements


def _pair(i: int, m: int) -> int:
    return m - 1 - i


def perm_matrix(F: QuadField, perm: Sequence[int]) -> Matrix:
    """P with P e_i = e_{perm[i]}, so (P x P^T)[perm[i]][perm[j]] = x[i][j]."""
    m = len(perm)
    P = [[F.zero] * m for _ in range(m)]
    for i, t in enumerate(perm):
        P[t][i] = F.one
    return P


def swap_perm(m: int, a: int, b: int) -> list:
    """Swap a <-> b together with their partners; for b = a' this flips the pair."""
    perm = list(range(m))
    if a == b:
        return perm
    a2, b2 = _pair(a, m), _pair(b, m)
    perm[a], perm[b] = b, a
    if b != a2:
        perm[a2], perm[b2] = b2, a2
    return perm


def apply_perm(x: Matrix, perm: Sequence[int]) -> Matrix:
    m = len(x)
    out = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            out[perm[i]][perm[j]] = x[i][j]
    return out


def levi_elementary(F: QuadField, m: int, i: int, j: int, beta: QuadExtNum) -> Matrix:
    """Levi element with A = 1 + beta E_ij on the first half (i, j < m//2, i != j)."""
    h = identity(F, m)
    h[i][j] = beta
    h[_pair(j, m)][_pair(i, m)] = -beta.conj()
    return h


def embed_k1(h3: Matrix, m: int, i: int) -> Matrix:
    """Place a 3x3 element on the coordinates (i, middle, i')."""
    F = h3[0][0].field
    idx = [i, m // 2, _pair(i, m)]
    g = identity(F, m)
    for a in range(3):
        for b in range(3):
            g[idx[a]][idx[b]] = h3[a][b]
    return g


def k1_upper(F: QuadField, d: QuadExtNum, s: PadicNum | None = None) -> Matrix:
    """[[1, -d*, f], [0, 1, d], [0, 0, 1]] with N(d) + f + f* = 0."""
    f = -(F.omega * d.norm())
    if s is not None:
        f = f + F.sqrt_eps * s
    return [[F.one, -d.conj(), f], [F.zero, F.one, d], [F.zero, F.zero, F.one]]


def k1_lower(F: QuadField, b: QuadExtNum, s: PadicNum | None = None) -> Matrix:
    """[[1, 0, 0], [b, 1, 0], [c, -b*, 1]] with N(b) + c + c* = 0."""
    c = -(F.omega * b.norm())
    if s is not None:
        c = c + F.sqrt_eps * s
    return [[F.one, F.zero, F.zero], [b, F.one, F.zero], [c, -b.conj(), F.one]]


def k1_torus(F: QuadField, alpha: QuadExtNum, u: QuadExtNum) -> Matrix:
    return [[alpha, F.zero, F.zero], [F.zero, u, F.zero], [F.zero, F.zero, alpha.conj().inverse()]]


def _k1_weyl(F: QuadField, b: QuadExtNum, s: PadicNum | None) -> Matrix:
    c = -(F.omega * b.norm())
    if s is not None:
        c = c + F.sqrt_eps * s
    return [[F.zero, F.zero, F.one], [F.zero, F.one, -b.conj()], [F.one, b, c]]


class KSampler:
    """Seeded random elements of K built from explicit coordinates."""

    def __init__(self, F: QuadField, seed: int = 0, digits: int = 12) -> None:
        self.F = F
        self.rng = random.Random(seed)
        self.digits = digits

    def integer(self) -> PadicNum:
        return self.F.k(self.rng.randrange(self.F.p ** self.digits))

    def ring_elem(self) -> QuadExtNum:
        return QuadExtNum(self.F, self.integer(), self.integer())

    def unit(self) -> QuadExtNum:
        while True:
            x = self.ring_elem()
            if x.valuation_or_none() == 0:
                return x

    def norm_one(self) -> QuadExtNum:
        b = self.unit()
        return b / b.conj()

    def k1(self) -> Matrix:
        """A random element of K_1 = K_{1,1} u K_{1,2}."""
        F = self.F
        t = k1_torus(F, self.unit(), self.norm_one())
        if self.rng.random() < 0.5:
            mid = k1_upper(F, self.ring_elem(), self.integer())
            last = _k1_weyl(F, self.ring_elem(), self.integer())
            return mat_mul(mat_mul(t, mid), last)
        pi = F.pi_power(1)
        b = self.ring_elem() * pi
        lower = k1_lower(F, b, self.integer() * pi.a)
        upper = k1_upper(F, self.ring_elem(), self.integer())
        return mat_mul(mat_mul(t, lower), upper)

    def weyl(self, m: int) -> list:
        n = m // 2
        perm = list(range(m))
        order = list(range(n))
        self.rng.shuffle(order)
        for i, t in enumerate(order):
            perm[i] = t
            perm[_pair(i, m)] = _pair(t, m)
        for i in range(n):
            if self.rng.random() < 0.5:
                perm = [(_pair(v, m) if v in (i, _pair(i, m)) else v) for v in perm]
        return perm

    def element(self, m: int, factors: int = 6) -> Matrix:
        F = self.F
        if m == 3:
            return mat_mul(self.k1(), self.k1())
        n = m // 2
        g = perm_matrix(F, self.weyl(m))
        for _ in range(factors):
            kind = self.rng.randrange(3)
            if kind == 0:
                g = mat_mul(g, embed_k1(self.k1(), m, self.rng.randrange(n)))
            elif kind == 1 and n >= 2:
                i, j = self.rng.sample(range(n), 2)
                g = mat_mul(g, levi_elementary(F, m, i, j, self.ring_elem()))
            else:
                g = mat_mul(g, perm_matrix(F, self.weyl(m)))
        return g


def random_conjugate(x: Matrix, sampler: KSampler) -> Matrix:
    return act(sampler.element(len(x)), x)


# ---------------------------------------------------------------------------
# Cartan reduction, m = 3


def _check_decreasing(lam: tuple) -> tuple:
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ArithmeticError(f"reduction produced a non-dominant signature {lam}")
    return lam


def _v(e: QuadExtNum) -> int | None:
    return e.valuation_or_none()


def _case1_holds(a: QuadExtNum, b: QuadExtNum) -> bool:
    va, vb = _v(a), _v(b)
    return va is not None and (vb is None or va <= vb)


def _m3_case1(x: Matrix, F: QuadField) -> int:
    """Pivot on a (v(a) <= v(b)), clear b, read off lambda = -min(v(a), v(g))."""
    a, b = x[0][0], x[0][1]
    lam = -(b.conj() / a)
    k = k1_lower(F, lam)
    y = act(k, x)
    if not (y[0][1].is_zero() and y[1][2].is_zero()):
        raise PrecisionError("elimination of the (1,2) entry did not close")
    va, vg = _v(y[0][0]), _v(y[2][2])
    if vg is None:
        raise PrecisionError("corner entry vanished")
    low = vg if va is None else min(va, vg)
    out = -low
    if out < -F.e:
        raise PrecisionError(f"found a part {out} below -e; precision too low")
    return out


def _m3_case2(x: Matrix, F: QuadField) -> Matrix:
    """a = 0: normalize to j_3 - 2 y y^* and move it to a Case 1 shape."""
    f = x[1][2]
    vf = _v(f)
    if vf is not None and vf <= F.e:
        return apply_perm(x, [2, 1, 0])
    if vf is not None:
        k = k1_lower(F, -(f / F.elem(2, 0)))
        x = act(k, x)
    w = F.omega
    km = [[w - F.one, -w, (w - F.one) * (w - F.one)],
          [F.one, F.zero, w],
          [F.one, -F.one, w - F.one]]
    return act(km, x)


def case3_correctors(F: QuadField) -> list:
    """K_1 elements with a unit (1,2) entry; used when v(a) > v(b) and v(g) > v(f)."""
    out = []
    for d in (F.one, F.omega, F.one + F.omega, -F.one):
        up = k1_upper(F, d)
        out.append(mat_mul(up, j_matrix(F, 3)))
    return out


def cartan_reduce_m3(x: Matrix, check: bool = True) -> tuple:
    """Signature lam with K x = K x_lam for a 3x3 x in X."""
    if len(x) != 3:
        raise ValueError("cartan_reduce_m3 needs a 3x3 matrix")
    F = x[0][0].field
    if check:
        require_in_X(x)
    for _ in range(4):
        a, b, g, f = x[0][0], x[0][1], x[2][2], x[1][2]
        if _case1_holds(a, b):
            return (_m3_case1(x, F),)
        if _case1_holds(g, f):
            return (_m3_case1(apply_perm(x, [2, 1, 0]), F),)
        if a.is_zero() or g.is_zero():
            if a.is_zero():
                x = _m3_case2(x, F)
            else:
                x = _m3_case2(apply_perm(x, [2, 1, 0]), F)
            continue
        for k in case3_correctors(F):
            y = act(k, x)
            if _case1_holds(y[0][0], y[0][1]) or _case1_holds(y[2][2], y[1][2]):
                x = y
                break
        else:
            raise PrecisionError("no Case 3 corrector produced a pivot")
    # exactly, Case 2 and Case 3 each lead to Case 1 on the next pass, so a
    # stall means entries lost their digits
    raise PrecisionError("m = 3 reduction stalled: precision exhausted", needed=F.prec + 8)


# ---------------------------------------------------------------------------
# Cartan reduction, odd m >= 5


def _min_positions(x: Matrix) -> tuple:
    m = len(x)
    ell_x = ell(x)
    pos = [(i, j) for i in range(m) for j in range(m) if _v(x[i][j]) == -ell_x]
    return ell_x, pos


def _peel(x: Matrix, F: QuadField) -> tuple:
    """x[m-1][m-1] minimal: clear the last row/column; returns (ell, inner block)."""
    m = len(x)
    g = x[m - 1][m - 1]
    ginv = g.inverse()
    w = {i: -(x[i][m - 1] * ginv) for i in range(1, m - 1)}
    wjw = F.zero
    for i in range(1, m - 1):
        wjw = wjw + w[i].conj() * w[m - 1 - i]
    c = -(x[0][m - 1] * ginv) - wjw
    k = identity(F, m)
    for i in range(1, m - 1):
        k[0][i] = -w[m - 1 - i].conj()
        k[i][m - 1] = w[i]
    k[0][m - 1] = c
    if not is_unitary(k):
        raise PrecisionError("clearing element left K at working precision")
    y = act(k, x)
    for i in range(m - 1):
        if not (y[i][m - 1].is_zero() and y[m - 1][i].is_zero()):
            raise PrecisionError("clearing the last column did not close")
    for i in range(1, m):
        if not (y[0][i].is_zero() and y[i][0].is_zero()):
            raise PrecisionError("clearing the first row did not close")
    inner = [row[1:m - 1] for row in y[1:m - 1]]
    return -g.valuation(), inner


def _to_last(m: int, i: int) -> list:
    """A pair permutation sending index i to m - 1."""
    if i == m - 1:
        return list(range(m))
    if i == 0:
        return swap_perm(m, 0, m - 1)
    if i < m // 2:
        p1 = swap_perm(m, i, 0)
    else:
        p1 = swap_perm(m, _pair(i, m), 0)
    # after p1 the index lives at 0 or m-1
    at = p1[i]
    if at == m - 1:
        return p1
    p2 = swap_perm(m, 0, m - 1)
    return [p2[v] for v in p1]


def _into_first_half(m: int, idx: Sequence[int]) -> tuple:
    """Flip pairs so every index lands in the first half; returns (perm, new indices)."""
    perm = list(range(m))
    n = m // 2
    for i in idx:
        if perm[i] > n:
            f = swap_perm(m, perm[i], _pair(perm[i], m))
            perm = [f[v] for v in perm]
    return perm, [perm[i] for i in idx]


def _classify(x: Matrix, F: QuadField) -> tuple:
    m = len(x)
    n = m // 2
    ell_x, pos = _min_positions(x)
    diag = [(i, j) for i, j in pos if i == j and i != n]
    if diag:
        return "A1", diag[0], ell_x
    off = [(i, j) for i, j in pos
           if i != j and j != _pair(i, m) and i != n and j != n]
    if off:
        return "A2", off[0], ell_x
    anti = [i for i in range(m) if i != n]
    anti_min = [i for i in anti if _v(x[i][_pair(i, m)]) == -ell_x]
    anti_non = [i for i in anti if i not in anti_min]
    if anti_min and anti_non:
        i = anti_min[0]
        j = next(j for j in anti_non if j != _pair(i, m))
        return "A3", (i, j), ell_x
    if anti_min:
        return "A4", None, ell_x
    return "MID", [p for p in pos if n in p and p != (n, n)], ell_x


def cartan_reduce_odd(x: Matrix, check: bool = True, max_steps: int = 200) -> tuple:
    """Signature lam with K x = K x_lam for odd m, by recursive peeling."""
    m = len(x)
    if m % 2 == 0:
        raise ValueError("cartan_reduce_odd needs odd m")
    F = x[0][0].field
    if check:
        require_in_X(x)
    if m == 1:
        return ()
    if m == 3:
        return cartan_reduce_m3(x, check=False)
    n = m // 2
    for _ in range(max_steps):
        kind, where, ell_x = _classify(x, F)
        if kind == "A1":
            x = apply_perm(x, _to_last(m, where[0]))
            lead, inner = _peel(x, F)
            rest = cartan_reduce_odd(inner, check=False, max_steps=max_steps)
            return _check_decreasing((lead,) + rest)
        if kind == "A2":
            perm, (i, j) = _into_first_half(m, where)
            x = apply_perm(x, perm)
            xi = x[i][j]
            v = xi.valuation()
            beta = F.omega * F.pi_power(v) / xi.conj()
            x = act(levi_elementary(F, m, i, j, beta), x)
            continue
        if kind == "A3":
            perm, (i, j) = _into_first_half(m, where)
            x = apply_perm(x, perm)
            x = act(levi_elementary(F, m, i, j, F.one), x)
            continue
        if kind == "A4":
            if ell_x != 0:
                raise ArithmeticError("anti-diagonal minimal entries with ell != 0")
            if F.e:
                # every anti-diagonal entry is a unit and x = j_m mod pi; the
                # orbit contains the block matrix with all parts equal to -1
                inv = orbit_invariants(x)
                if not (inv.jtype and inv.r == 1 and inv.parity == n % 2):
                    raise ArithmeticError(f"dyadic A4 block has unexpected invariants {inv}")
                return (-1,) * n
            x = _a4_split(x, F)
            continue
        x = _mid_fallback(x, F, where)
    raise ArithmeticError("odd-m reduction did not terminate")


def _a4_split(x: Matrix, F: QuadField) -> Matrix:
    """Non-dyadic A4: find xi_i != xi_j mod pi and shear them apart."""
    m = len(x)
    n = m // 2
    p = F.p
    xis = []
    for i in range(n):
        t = x[i][_pair(i, m)]
        xis.append(t.a.to_fraction() % p if t.b.is_zero() else None)
    pick = None
    for i in range(n):
        for j in range(i + 1, n):
            d = x[i][_pair(i, m)] - x[j][_pair(j, m)]
            if _v(d) == 0:
                pick = (i, j)
                break
        if pick:
            break
    if pick is None:
        raise ArithmeticError("A4: all anti-diagonal units agree modulo pi")
    i, j = pick
    p1 = swap_perm(m, i, 0)
    x = apply_perm(x, p1)
    j2 = p1[j]
    if j2 > n:
        f = swap_perm(m, j2, _pair(j2, m))
        x = apply_perm(x, f)
        j2 = f[j2]
    x = apply_perm(x, swap_perm(m, j2, 1))
    h = identity(F, m)
    h[m - 2][0] = F.one
    h[m - 1][1] = -F.one
    if not is_unitary(h):
        raise ArithmeticError("A4 shear is not unitary")
    return act(h, x)


def _mid_fallback(x: Matrix, F: QuadField, where) -> Matrix:
    """Minimal entries only in the middle row/column: an embedded K_1 move."""
    m = len(x)
    n = m // 2
    ell_x = ell(x)
    rows = sorted({i if j == n else j for i, j in where})
    for i in rows:
        base = i if i < n else _pair(i, m)
        for d in (F.one, F.omega, F.one + F.omega, -F.one, F.pi_power(1)):
            for maker in (k1_upper, k1_lower):
                y = act(embed_k1(maker(F, d), m, base), x)
                kind, _, ell_y = _classify(y, F)
                if ell_y == ell_x and kind != "MID":
                    return y
    raise ArithmeticError("no embedded K_1 move exposed a minimal entry")


def precision_hint(x: Matrix) -> int:
    """Suggested relative precision: twice the largest |valuation| among the entries, plus a margin."""
    F = x[0][0].field
    vals = [abs(c.val) for row in x for e in row for c in (e.a, e.b) if not c.is_zero()]
    return max([F.prec + 8] + [2 * v + 8 for v in vals])


def cartan_reduce(x: Matrix, check: bool = True) -> tuple:
    m = len(x)
    if m % 2 == 0:
        raise NotImplementedError("constructive reduction is provided for odd m only; use orbit_invariants")
    try:
        return cartan_reduce_odd(x, check=check) if m > 3 else cartan_reduce_m3(x, check=check)
    except PrecisionError as exc:
        if exc.needed is not None:
            raise
        raise PrecisionError(f"precision exhausted: {exc}", needed=precision_hint(x)) from exc


# ---------------------------------------------------------------------------
# Matrix JSON


def parse_entry(F: QuadField, text: str, prec: int) -> PadicNum:
    val, unit = (s.strip() for s in text.split(","))
    if val in ("inf", "+inf"):
        return PadicNum.zero(F.p, prec)
    return PadicNum.from_parts(F.p, int(val), int(unit), prec)


def matrix_from_json(obj: dict) -> Matrix:
    p, N, m = int(obj["p"]), int(obj["N"]), int(obj["m"])
    F = QuadField(p, N)
    rows = obj["entries"]
    if len(rows) != m or any(len(r) != m for r in rows):
        raise ValueError(f"entries must be {m}x{m}")
    return [[QuadExtNum(F, parse_entry(F, e["a"], N), parse_entry(F, e.get("b", "inf,0"), N))
             for e in row] for row in rows]


def matrix_to_json(x: Matrix) -> dict:
    """Header N is the smallest relative precision among the entries, so that
    every unit written is known to N digits and the file reloads consistently."""
    F = x[0][0].field
    parts = [c for row in x for e in row for c in (e.a, e.b) if not c.is_zero()]
    N = min([F.prec] + [c.prec for c in parts])
    if N < 1:
        raise PrecisionError("no digits left to serialize", needed=F.prec)

    def ser(c: PadicNum) -> str:
        return "inf,0" if c.is_zero() else f"{c.val},{c.unit % F.p ** N}"

    return {"p": F.p, "N": N, "m": len(x),
            "entries": [[{"a": ser(e.a), "b": ser(e.b)} for e in row] for row in x]}


def load_matrix(path: str) -> Matrix:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# Rank-one brute-force oracle (m = 2)


def _cell_norm_coords(lam: int, stratum: int, u: int, v: int, p: int, eps: int, e: int) -> tuple:
    """(a, b) with d_1(h . x_lam) = unit * pi^pre * N(a + b omega), and pre."""
    if lam >= 0:
        pl = p ** lam
        if stratum == 11:
            return 1 + u * v + pl * u, -2 * pl * u, -lam
        return v - pl, 2 * pl, -lam
    r = -lam
    pr = p ** r
    if stratum == 11:
        return pr * (1 + u * v) + u * (1 - eps), -2 * u, -r
    return pr * v + 1 - eps, -2, -r


def valuation_distribution(lam: int, p: int, N: int, stratum: int) -> dict:
    """Exact Haar masses {v_pi(d_1): mass} over (u, v) in O_k^2 for one K_1 stratum.

    Cells (u, v) mod p^depth are refined until min(v(a), v(b)) is fixed on
    the cell; an unresolved cell at depth N raises ValueError.
    """
    e = 1 if p == 2 else 0
    eps = 5 if p == 2 else smallest_nonresidue(p)
    out: dict = {}
    cells = [(0, 0)]
    for depth in range(0, N + 1):
        mod = p ** depth
        nxt = []
        for u, v in cells:
            a, b, pre = _cell_norm_coords(lam, stratum, u, v, p, eps, e)
            a %= mod
            b %= mod
            if depth and (a or b):
                mv = min(vp(a, p) if a else depth, vp(b, p) if b else depth)
                key = pre + 2 * mv
                out[key] = out.get(key, Fraction(0)) + Fraction(1, mod * mod)
                continue
            if depth == N:
                raise ValueError(f"N={N} too small for lambda={lam}: valuation not yet determined; "
                                 f"need N >= {oracle_min_precision(lam, p)}")
            for du in range(p):
                for dv in range(p):
                    nxt.append((u + du * mod, v + dv * mod))
        cells = nxt
        if not cells:
            break
    return dict(sorted(out.items()))


def oracle_min_precision(lam: int, p: int) -> int:
    e = 1 if p == 2 else 0
    return 2 * (e + max(lam, 0) + 1) + 1


def omega_bruteforce_m2(lam: int, s: complex, p: int, N: int | None = None) -> complex:
    """sum over both K_1 strata of vol * q^{-s v_pi(d_1)} for x = x_lam, m = 2."""
    e = 1 if p == 2 else 0
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if lam < -e:
        raise ValueError(f"lambda must be >= -e = {-e}")
    if complex(s).real < 0:
        raise ValueError("need Re s >= 0")
    need = oracle_min_precision(lam, p)
    N = need if N is None else N
    if N < need:
        raise ValueError(f"N={N} too small for lambda={lam}; need N >= {need}")
    q = p
    total = 0j
    weights = {11: Fraction(q, q + 1), 12: Fraction(1, q + 1)}
    for stratum, w in weights.items():
        for val, mass in valuation_distribution(lam, p, N, stratum).items():
            total += float(w * mass) * cmath.exp(-s * val * cmath.log(q))
    return total


def bruteforce_distributions(lam: int, p: int, N: int) -> dict:
    return {st: valuation_distribution(lam, p, N, st) for st in (11, 12)}


def d1_direct(lam: int, stratum: int, u: int, v: int, F: QuadField) -> PadicNum:
    """d_1(h . x_lam) computed from the 2x2 matrices themselves (cross-check)."""
    x = make_x_lambda((lam,), 2, F)
    se = F.sqrt_eps
    U, V = F.elem(u), F.elem(v)
    if stratum == 11:
        h = [[F.one, V / se], [U * se, F.one + U * V]]
    else:
        pi = F.pi_power(1)
        h = [[pi * U * se, F.one + pi * U * V], [F.one, V / se]]
    y = act(h, x)
    return y[1][1].a
