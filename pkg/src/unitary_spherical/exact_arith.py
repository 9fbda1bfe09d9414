"""Exact arithmetic: Gaussian rationals, Laurent polynomials in v = q^(1/2),
multivariate Laurent polynomials in X_1..X_n and unreduced rational functions.

Every polynomial is stored flat: a dict from the exponent tuple
``(k, e_1, ..., e_n)`` to a :class:`GaussianRational`, where ``k`` is the
power of ``v``.  A :class:`Scalar` is the special case with no ``X``
variables.  Values are treated as immutable once built.
"""
from __future__ import annotations

import cmath
import heapq
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

DEFAULT_POLE_THRESHOLD = 1e-9


class ZeroDenominatorError(ZeroDivisionError):
    def __init__(self) -> None:
        super().__init__("zero denominator")


class InexactDivisionError(ArithmeticError):
    """Raised when a polynomial division leaves a remainder.

    ``remainder`` holds a nonzero witness (the undivided part at the point
    where the division was abandoned).
    """

    def __init__(self, remainder) -> None:
        super().__init__("inexact division")
        self.remainder = remainder


class NearPoleError(ValueError):
    def __init__(self, magnitude: float) -> None:
        super().__init__(f"near-pole evaluation (|den| = {magnitude:.3e})")
        self.magnitude = magnitude


class RankMismatchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Gaussian rationals


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0) -> None:
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __add__(self, other):
        o = _gr(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _gr(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _gr(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = _gr(other)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return GaussianRational(self.re * o.re, 0)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        if not self:
            raise ZeroDenominatorError()
        if not self.im:
            return GaussianRational(1 / self.re, 0)
        d = self.re * self.re + self.im * self.im
        return GaussianRational(self.re / d, -self.im / d)

    def __truediv__(self, other):
        o = _gr(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _gr(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        base = self if k >= 0 else self.inverse()
        out = GaussianRational(1)
        for _ in range(abs(k)):
            out = out * base
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other) -> bool:
        o = _gr(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def canonical(self) -> str:
        """Render as ``a/b+c/d*i`` (denominators always written)."""
        return (f"{self.re.numerator}/{self.re.denominator}"
                f"{'+' if self.im >= 0 else '-'}"
                f"{abs(self.im.numerator)}/{self.im.denominator}*i")

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        t = text.strip()
        if not t.endswith("*i"):
            raise ValueError(f"bad Gaussian rational {text!r}")
        body = t[:-2]
        cut = max(body.rfind("+"), body.rfind("-"))
        if cut <= 0:
            raise ValueError(f"bad Gaussian rational {text!r}")
        return cls(Fraction(body[:cut]), Fraction(body[cut:]))

    def __repr__(self) -> str:
        if not self.im:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


I = GaussianRational(0, 1)
_ONE = GaussianRational(1)


def _gr(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    return None


# ---------------------------------------------------------------------------
# Flat Laurent core


def _add_keys(a: tuple, b: tuple) -> tuple:
    return tuple([x + y for x, y in zip(a, b)])


def _sub_keys(a: tuple, b: tuple) -> tuple:
    return tuple([x - y for x, y in zip(a, b)])


class _Laurent:
    """Shared machinery for :class:`Scalar` and :class:`MultiLaurent`."""

    __slots__ = ("nvars", "_t", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple, GaussianRational] | None = None,
                 *, _trusted: bool = False) -> None:
        self.nvars = nvars
        self._hash = None
        if _trusted:
            self._t = terms
            return
        clean = {}
        if terms:
            width = nvars + 1
            for k, c in terms.items():
                k = tuple(int(x) for x in k)
                if len(k) != width:
                    raise RankMismatchError(f"exponent {k} does not have {width} entries")
                c = GaussianRational.coerce(c)
                if c:
                    clean[k] = clean[k] + c if k in clean else c
                    if not clean[k]:
                        del clean[k]
        self._t = clean

    # construction helpers -------------------------------------------------
    def _make(self, terms):
        return self._build(self.nvars, terms)

    @staticmethod
    def _build(nvars, terms):
        if nvars == 0:
            return Scalar._from_flat(terms)
        return MultiLaurent._from_flat(nvars, terms)

    def flat_terms(self) -> dict:
        return dict(self._t)

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self) -> bool:
        return bool(self._t)

    def __len__(self) -> int:
        return len(self._t)

    # coercion -------------------------------------------------------------
    def _lift(self, other):
        """Bring ``other`` to a flat dict with ``self.nvars`` X-variables."""
        if isinstance(other, _Laurent):
            if other.nvars == self.nvars:
                return other._t
            if other.nvars == 0:
                pad = (0,) * self.nvars
                return {k + pad: c for k, c in other._t.items()}
            raise RankMismatchError(
                f"variable count mismatch: {self.nvars} vs {other.nvars}")
        g = _gr(other)
        if g is None:
            return None
        return {(0,) * (self.nvars + 1): g} if g else {}

    def _result_nvars(self, other) -> int:
        if isinstance(other, _Laurent) and other.nvars > self.nvars:
            return other.nvars
        return self.nvars

    # ring operations ------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, _Laurent) and other.nvars > self.nvars:
            return other.__add__(self)
        if isinstance(other, RationalFn):
            return NotImplemented
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out = dict(self._t)
        for k, c in o.items():
            if k in out:
                s = out[k] + c
                if s:
                    out[k] = s
                else:
                    del out[k]
            else:
                out[k] = c
        return self._make(out)

    __radd__ = __add__

    def __neg__(self):
        return self._make({k: -c for k, c in self._t.items()})

    def __sub__(self, other):
        if isinstance(other, RationalFn):
            return NotImplemented
        if isinstance(other, _Laurent):
            return self + (-other)
        g = _gr(other)
        if g is None:
            return NotImplemented
        return self + (-g)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, _Laurent) and other.nvars > self.nvars:
            return other.__mul__(self)
        if isinstance(other, RationalFn):
            return NotImplemented
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out: dict = {}
        for ka, ca in self._t.items():
            for kb, cb in o.items():
                k = _add_keys(ka, kb)
                c = ca * cb
                if k in out:
                    s = out[k] + c
                    if s:
                        out[k] = s
                    else:
                        del out[k]
                else:
                    out[k] = c
        return self._make(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.unit_inverse() ** (-k)
        out = self._make({(0,) * (self.nvars + 1): _ONE})
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, RationalFn):
            return NotImplemented
        if isinstance(other, _Laurent):
            if other.nvars > self.nvars:
                return exact_divide(other._make(other._lift(self)), other)
            return exact_divide(self, self._make(self._lift(other)))
        g = _gr(other)
        if g is None:
            return NotImplemented
        inv = g.inverse()
        return self._make({k: c * inv for k, c in self._t.items()})

    def is_unit(self) -> bool:
        """Units of a Laurent ring over a field are the nonzero monomials."""
        return len(self._t) == 1

    def unit_inverse(self):
        if not self.is_unit():
            raise InexactDivisionError(self)
        (k, c), = self._t.items()
        return self._make({tuple(-x for x in k): c.inverse()})

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalFn):
            return NotImplemented
        if isinstance(other, _Laurent):
            if other.nvars != self.nvars:
                if self.nvars and other.nvars:
                    return False
                lo, hi = (self, other) if self.nvars == 0 else (other, self)
                return hi._t == hi._lift(lo)
            return self._t == other._t
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self._t == o

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def conjugate_coeffs(self):
        """Complex-conjugate every Gaussian coefficient (v and X untouched)."""
        return self._make({k: c.conjugate() for k, c in self._t.items()})

    def sorted_items(self) -> list:
        """Terms ordered by X-exponent vector, then by the power of v."""
        return sorted(self._t.items(), key=lambda kc: (kc[0][1:], kc[0][0]))

    def canonical(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for k, c in self.sorted_items():
            mono = [f"v^{k[0]}"] + [f"X{i + 1}^{e}" for i, e in enumerate(k[1:])]
            parts.append(f"({c.canonical()})*" + "*".join(mono))
        return " + ".join(parts)

    def pretty(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for k, c in self.sorted_items():
            mono = []
            if k[0]:
                mono.append("v" if k[0] == 1 else f"v^{k[0]}")
            for i, e in enumerate(k[1:]):
                if e:
                    mono.append(f"X{i + 1}" if e == 1 else f"X{i + 1}^{e}")
            coeff = repr(c)
            if mono:
                if c == 1:
                    parts.append("*".join(mono))
                elif c == -1:
                    parts.append("-" + "*".join(mono))
                else:
                    parts.append(coeff + "*" + "*".join(mono))
            else:
                parts.append(coeff)
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.pretty()})"

    def _exponent_bounds(self):
        keys = list(self._t)
        cols = list(zip(*keys))
        return [min(c) for c in cols], [max(c) for c in cols]


class Scalar(_Laurent):
    """Laurent polynomial in v = q^(1/2) with Gaussian rational coefficients."""

    __slots__ = ()

    def __init__(self, coeffs: Mapping[int, object] | None = None) -> None:
        super().__init__(0, {(k,): c for k, c in (coeffs or {}).items()})

    @classmethod
    def _from_flat(cls, terms):
        obj = cls.__new__(cls)
        _Laurent.__init__(obj, 0, terms, _trusted=True)
        return obj

    @classmethod
    def const(cls, c) -> "Scalar":
        return cls({0: c})

    @classmethod
    def v_power(cls, k: int, c=1) -> "Scalar":
        return cls({k: c})

    @classmethod
    def q_power(cls, k: int, c=1) -> "Scalar":
        """c * q^k (so v^(2k))."""
        return cls({2 * k: c})

    @property
    def coeffs(self) -> dict:
        return {k[0]: c for k, c in self._t.items()}

    def constant_value(self):
        """Return the GaussianRational if this scalar has no v-dependence."""
        if not self._t:
            return GaussianRational(0)
        if set(self._t) != {(0,)}:
            raise ValueError(f"{self.pretty()} is not constant in v")
        return self._t[(0,)]

    def eval(self, q_val: float) -> complex:
        sq = math.sqrt(q_val)
        return sum((complex(c) * sq ** k[0] for k, c in self._t.items()), 0j)


class MultiLaurent(_Laurent):
    """Laurent polynomial in X_1..X_n (X_i = q^(z_i)) with Scalar coefficients."""

    __slots__ = ()

    def __init__(self, n: int, terms: Mapping[tuple, object] | None = None) -> None:
        if n < 1:
            raise RankMismatchError("MultiLaurent needs at least one variable")
        flat = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != n:
                raise RankMismatchError(f"exponent {alpha} has wrong length for n={n}")
            if isinstance(c, Scalar):
                for (k,), g in c._t.items():
                    key = (k,) + alpha
                    flat[key] = flat[key] + g if key in flat else g
            else:
                key = (0,) + alpha
                g = GaussianRational.coerce(c)
                flat[key] = flat[key] + g if key in flat else g
        super().__init__(n, flat)

    @classmethod
    def _from_flat(cls, n, terms):
        obj = cls.__new__(cls)
        _Laurent.__init__(obj, n, terms, _trusted=True)
        return obj

    @classmethod
    def from_flat(cls, n: int, terms: Mapping[tuple, object]) -> "MultiLaurent":
        obj = cls.__new__(cls)
        _Laurent.__init__(obj, n, terms)
        return obj

    @classmethod
    def const(cls, n: int, c=1) -> "MultiLaurent":
        if isinstance(c, Scalar):
            return cls(n, {(0,) * n: c})
        return cls(n, {(0,) * n: c})

    @classmethod
    def monomial(cls, alpha: Sequence[int], c=1) -> "MultiLaurent":
        return cls(len(alpha), {tuple(alpha): c})

    @classmethod
    def var(cls, n: int, i: int) -> "MultiLaurent":
        alpha = [0] * n
        alpha[i] = 1
        return cls.monomial(alpha)

    @property
    def n(self) -> int:
        return self.nvars

    @property
    def terms(self) -> dict:
        """View as exponent vector -> Scalar."""
        out: dict = {}
        for k, c in self._t.items():
            out.setdefault(k[1:], {})[(k[0],)] = c
        return {a: Scalar._from_flat(d) for a, d in out.items()}

    def exponents(self) -> set:
        return {k[1:] for k in self._t}

    def coefficient(self, alpha: Sequence[int]) -> Scalar:
        alpha = tuple(alpha)
        return Scalar._from_flat({(k[0],): c for k, c in self._t.items() if k[1:] == alpha})

    def linear_substitute(self, matrix: Sequence[Sequence[int]]) -> "MultiLaurent":
        """X^alpha -> X^(M alpha) for an integer matrix M (rows index output)."""
        n = self.nvars
        out = {}
        for k, c in self._t.items():
            a = k[1:]
            new = tuple(sum(matrix[r][j] * a[j] for j in range(n)) for r in range(n))
            key = (k[0],) + new
            if key in out:
                s = out[key] + c
                if s:
                    out[key] = s
                else:
                    del out[key]
            else:
                out[key] = c
        return MultiLaurent._from_flat(n, out)


def as_multi(x, n: int) -> MultiLaurent:
    if isinstance(x, MultiLaurent):
        if x.nvars != n:
            raise RankMismatchError(f"expected {n} variables, got {x.nvars}")
        return x
    if isinstance(x, Scalar):
        return MultiLaurent._from_flat(n, {k + (0,) * n: c for k, c in x._t.items()})
    return MultiLaurent.const(n, x)


# ---------------------------------------------------------------------------
# Exact division


def exact_divide(num, den):
    """Return ``p`` with ``p * den == num`` exactly, or raise.

    Works for Scalars and MultiLaurents alike (v is just one more Laurent
    variable).  The quotient's support must lie in the box cut out by the
    Newton polytopes, which bounds the lex-order long division.
    """
    if not isinstance(den, _Laurent):
        den = Scalar.const(den)
    if not isinstance(num, _Laurent):
        num = Scalar.const(num)
    nv = max(num.nvars, den.nvars)
    if num.nvars != den.nvars and min(num.nvars, den.nvars) != 0:
        raise RankMismatchError(f"variable count mismatch: {num.nvars} vs {den.nvars}")
    holder = num if num.nvars == nv else den
    nt = holder._lift(num)
    dt = holder._lift(den)
    if not dt:
        raise ZeroDenominatorError()
    if not nt:
        return holder._make({})
    if len(dt) == 1:
        (dk, dc), = dt.items()
        inv = dc.inverse()
        return holder._make({_sub_keys(k, dk): c * inv for k, c in nt.items()})

    nkeys = list(nt)
    dkeys = list(dt)
    width = nv + 1
    lo = [min(k[j] for k in nkeys) - min(k[j] for k in dkeys) for j in range(width)]
    hi = [max(k[j] for k in nkeys) - max(k[j] for k in dkeys) for j in range(width)]
    rem = dict(nt)
    if any(a > b for a, b in zip(lo, hi)):
        raise InexactDivisionError(holder._make(rem))

    lead = max(dkeys)
    lead_inv = dt[lead].inverse()
    dterms = [(k, c) for k, c in dt.items()]
    heap = [tuple(-x for x in k) for k in rem]
    heapq.heapify(heap)
    quot = {}
    while heap:
        key = tuple(-x for x in heapq.heappop(heap))
        c = rem.get(key)
        if c is None:
            continue
        tk = _sub_keys(key, lead)
        if any(t < a or t > b for t, a, b in zip(tk, lo, hi)):
            raise InexactDivisionError(holder._make(rem))
        coef = c * lead_inv
        quot[tk] = coef
        for dk, dcoef in dterms:
            kk = _add_keys(tk, dk)
            prod = coef * dcoef
            if kk in rem:
                s = rem[kk] - prod
                if s:
                    rem[kk] = s
                else:
                    del rem[kk]
            else:
                rem[kk] = -prod
                heapq.heappush(heap, tuple(-x for x in kk))
    return holder._make(quot)


# ---------------------------------------------------------------------------
# Rational functions


class RationalFn:
    """Unreduced quotient num/den of MultiLaurents in n variables."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1, n: int | None = None) -> None:
        if n is None:
            n = next((x.nvars for x in (num, den) if isinstance(x, MultiLaurent)), None)
            if n is None:
                raise RankMismatchError("cannot infer variable count")
        self.num = as_multi(num, n)
        self.den = as_multi(den, n)
        if self.den.is_zero():
            raise ZeroDenominatorError()

    @property
    def n(self) -> int:
        return self.num.nvars

    def _coerce(self, other):
        if isinstance(other, RationalFn):
            if other.n != self.n:
                raise RankMismatchError(f"variable count mismatch: {self.n} vs {other.n}")
            return other
        if isinstance(other, (_Laurent, int, Fraction, GaussianRational)):
            return RationalFn(as_multi(other, self.n), 1, self.n)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.den == self.den:
            return RationalFn(self.num + o.num, self.den)
        return RationalFn(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFn(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            raise ZeroDenominatorError()
        return RationalFn(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if k >= 0:
            return RationalFn(self.num ** k, self.den ** k)
        if self.num.is_zero():
            raise ZeroDenominatorError()
        return RationalFn(self.den ** (-k), self.num ** (-k))

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num * o.den == o.num * self.den

    __hash__ = None  # equality is not structural

    def to_polynomial(self) -> MultiLaurent:
        """Exact quotient num/den, raising InexactDivisionError if not polynomial."""
        return exact_divide(self.num, self.den)

    def cancel_content(self) -> "RationalFn":
        """Divide out the gcd (in v) of every coefficient of num and den."""
        if self.num.is_zero():
            return RationalFn(self.num, MultiLaurent.const(self.n, 1))
        g = None
        for part in (self.num, self.den):
            for c in part.terms.values():
                g = c if g is None else scalar_gcd(g, c)
        num, den = self.num, self.den
        if len(g.coeffs) > 1:
            num, den = exact_divide(num, g), exact_divide(den, g)
        # clear the v-power so that den has lowest v-degree zero
        shift = Scalar.v_power(-min(k[0] for k in den.flat_terms()))
        return RationalFn(num * shift, den * shift)

    def map_parts(self, fn) -> "RationalFn":
        return RationalFn(fn(self.num), fn(self.den))

    def pretty(self) -> str:
        if self.den == 1:
            return self.num.pretty()
        return f"({self.num.pretty()}) / ({self.den.pretty()})"

    def __repr__(self) -> str:
        return f"RationalFn({self.pretty()})"


def _poly_rem(a: dict, b: dict) -> dict:
    """Remainder of ordinary polynomials given as degree -> GaussianRational."""
    a = dict(a)
    db = max(b)
    lead = b[db]
    while a and max(a) >= db:
        da = max(a)
        f = a[da] / lead
        for k, c in b.items():
            kk = k + da - db
            val = a.get(kk, GaussianRational(0)) - f * c
            if val:
                a[kk] = val
            else:
                a.pop(kk, None)
    return a


def scalar_gcd(a: Scalar, b: Scalar) -> Scalar:
    """Monic gcd of two Laurent polynomials in v, up to units (so no v-power factor)."""
    polys = []
    for x in (a, b):
        cs = x.coeffs
        if cs:
            lo = min(cs)
            polys.append({k - lo: c for k, c in cs.items()})
    if not polys:
        return Scalar.const(0)
    f = polys[0]
    g = polys[1] if len(polys) > 1 else {}
    while g:
        f, g = g, _poly_rem(f, g)
    lead = f[max(f)]
    return Scalar({k: c / lead for k, c in f.items()})


def weyl_substitute(p, sigma):
    """X^alpha -> X^(sigma(alpha)), extended linearly (a ring homomorphism).

    ``sigma`` is any object with ``n`` and ``apply(vector)``, normally a
    :class:`~unitary_spherical.weyl_roots.SignedPermutation`.
    """
    if isinstance(p, RationalFn):
        return RationalFn(weyl_substitute(p.num, sigma), weyl_substitute(p.den, sigma))
    if not isinstance(p, MultiLaurent):
        return p
    if sigma.n != p.nvars:
        raise RankMismatchError(f"sigma has rank {sigma.n}, polynomial has {p.nvars} variables")
    out = {}
    for k, c in p._t.items():
        out[(k[0],) + tuple(sigma.apply(k[1:]))] = c
    return MultiLaurent._from_flat(p.nvars, out)


# ---------------------------------------------------------------------------
# Evaluation


def eval_complex(p, q_val: float, z: Sequence[complex] = (),
                 threshold: float = DEFAULT_POLE_THRESHOLD) -> complex:
    """Evaluate at v = sqrt(q_val), X_j = q_val**z_j using complex floats."""
    if q_val <= 1:
        raise ValueError("q_val must exceed 1")
    if isinstance(p, RationalFn):
        d = eval_complex(p.den, q_val, z)
        if abs(d) < threshold:
            raise NearPoleError(abs(d))
        return eval_complex(p.num, q_val, z) / d
    if isinstance(p, (int, Fraction, GaussianRational)):
        return complex(GaussianRational.coerce(p))
    if p.nvars and len(z) != p.nvars:
        raise RankMismatchError(f"need {p.nvars} coordinates, got {len(z)}")
    lq = math.log(q_val)
    sq = math.sqrt(q_val)
    total = 0j
    for k, c in p._t.items():
        w = sum(a * zj for a, zj in zip(k[1:], z))
        w = complex(w)
        x = q_val ** w.real if w.imag == 0 else cmath.exp(w * lq)
        total += complex(c) * sq ** k[0] * x
    return total


def specialize(p, values: Sequence[Scalar]):
    """Substitute X_i -> values[i] (Scalars); returns a Scalar.

    Negative powers require the corresponding value to be a unit
    (a single-term Scalar).  For a RationalFn a (num, den) pair of Scalars
    is returned so the caller can decide how to compare.
    """
    if isinstance(p, RationalFn):
        return specialize(p.num, values), specialize(p.den, values)
    vals = [x if isinstance(x, Scalar) else Scalar.const(x) for x in values]
    if len(vals) != p.nvars:
        raise RankMismatchError(f"need {p.nvars} values, got {len(vals)}")
    cache: dict = {}

    def power(i, e):
        if (i, e) not in cache:
            cache[(i, e)] = vals[i] ** e
        return cache[(i, e)]

    total = Scalar()
    for k, c in p._t.items():
        term = Scalar._from_flat({(k[0],): c})
        for i, e in enumerate(k[1:]):
            if e:
                term = term * power(i, e)
        total = total + term
    return total


ONE = Scalar.const(1)
V = Scalar.v_power(1)
Q = Scalar.q_power(1)
Q_INV = Scalar.q_power(-1)
