"""Finitely supported K-invariant functions on X, orbit volumes, the spherical
Fourier transform in the P-basis, and numerical Plancherel/inversion checks."""
from __future__ import annotations

import cmath
import json
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exact_arith import ONE, Q_INV, MultiLaurent, NearPoleError, Scalar, eval_complex, exact_divide
from .hall_littlewood import (
    _order_key,
    eval_on_angles,
    p_poly,
    plancherel_density,
    stabilizer_value,
    torus_grid,
)
from .spherical import ParameterError, SpaceParams, psi_scalar, q_pair_z0, zeta_point
from .weyl_roots import m_prime, poincare_w, w_tilde

THREADS_ENV = "UNITARY_SPHERICAL_THREADS"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _measure_constant_intro(params: SpaceParams) -> Scalar:
    """w_n(-1/q) w_{m'}(-1/q) / (1 + 1/q)^{m'}."""
    t = -Q_INV
    mp = m_prime(params.n, params.parity)
    return exact_divide(poincare_w(params.n, t) * poincare_w(mp, t), (1 + Q_INV) ** mp)


def _assert_measure_constants(max_m: int = 9) -> None:
    for m in range(2, max_m + 1):
        params = SpaceParams(m, 0)
        zero = (0,) * params.n
        a = _measure_constant_intro(params)
        b = stabilizer_value(zero, params.tspec)
        if a != b:
            raise AssertionError(f"measure constants disagree for m={m}: {a} vs {b}")


_assert_measure_constants()


def shifted(lam: Sequence[int], params: SpaceParams) -> tuple:
    return tuple(a + params.e for a in params.signature(lam))


def _re_z0_power(mu: Sequence[int], params: SpaceParams) -> Scalar:
    """q^{-2<mu, Re z_0>} as a v-power."""
    n = params.n
    k = 0
    for i, a in enumerate(mu, start=1):
        # Re z_{0,i} is -(n-i+1/2) (even m) or -(n-i+1) (odd m); q = v^2
        k += a * (4 * (n - i + 1) if params.odd else 2 * (2 * (n - i) + 1))
    return Scalar.v_power(k)


def volume_orbit(lam: Sequence[int], params: SpaceParams) -> Scalar:
    """v(K . x_lam) = q^{-2<lam+e, Re z_0>} w~_0(-1/q) / w~_{lam+e}(-1/q)."""
    mu = shifted(lam, params)
    ratio = exact_divide(w_tilde((0,) * params.n, params.parity), w_tilde(mu, params.parity))
    return _re_z0_power(mu, params) * ratio


def volume_ratio_law(lam: Sequence[int], mu: Sequence[int], params: SpaceParams) -> bool:
    """v_lam / v_mu = q^{2<mu - lam, Re z_0>} w~_{mu+e} / w~_{lam+e}, cross-multiplied."""
    a, b = shifted(lam, params), shifted(mu, params)
    lhs = volume_orbit(lam, params) * w_tilde(a, params.parity) * _re_z0_power(b, params)
    rhs = volume_orbit(mu, params) * w_tilde(b, params.parity) * _re_z0_power(a, params)
    return lhs == rhs


def fourier_scalar(lam: Sequence[int], params: SpaceParams) -> Scalar:
    """S with F(ch_lam) = S * P_{lam+e}; the w~ factors cancel against the volume."""
    mu = shifted(lam, params)
    return q_pair_z0(mu, params) * _re_z0_power(mu, params)


@dataclass
class SchwartzFn:
    """A finite combination sum c_lam ch_lam of orbit indicators."""

    params: SpaceParams
    terms: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for lam, c in self.terms.items():
            lam = self.params.signature(lam)
            c = complex(c)
            if c != 0:
                clean[lam] = clean.get(lam, 0) + c
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def indicator(cls, lam: Sequence[int], params: SpaceParams) -> "SchwartzFn":
        return cls(params, {tuple(lam): 1})

    def __add__(self, other: "SchwartzFn") -> "SchwartzFn":
        if other.params != self.params:
            raise ParameterError("adding functions on different spaces")
        out = dict(self.terms)
        for lam, c in other.terms.items():
            out[lam] = out.get(lam, 0) + c
        return SchwartzFn(self.params, out)

    def __mul__(self, c) -> "SchwartzFn":
        return SchwartzFn(self.params, {lam: c * v for lam, v in self.terms.items()})

    __rmul__ = __mul__

    def __neg__(self) -> "SchwartzFn":
        return self * -1

    def __sub__(self, other: "SchwartzFn") -> "SchwartzFn":
        return self + (-other)

    def value(self, lam: Sequence[int]) -> complex:
        return self.terms.get(tuple(lam), 0j)

    def is_zero(self) -> bool:
        return not self.terms

    def to_json(self) -> dict:
        return {"m": self.params.m, "e": self.params.e,
                "terms": [{"lambda": list(lam), "coeff": [c.real, c.imag]}
                          for lam, c in self.terms.items()]}

    @classmethod
    def from_json(cls, obj: dict) -> "SchwartzFn":
        params = SpaceParams(int(obj["m"]), int(obj.get("e", 0)))
        terms: dict = {}
        for t in obj.get("terms", []):
            re, im = t["coeff"]
            lam = tuple(int(a) for a in t["lambda"])
            terms[lam] = terms.get(lam, 0) + complex(re, im)
        return cls(params, terms)

    @classmethod
    def load(cls, path: str) -> "SchwartzFn":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    @classmethod
    def random(cls, params: SpaceParams, size: int, max_part: int, rng: random.Random) -> "SchwartzFn":
        pool = dominant_signatures(params, max_part)
        chosen = rng.sample(pool, min(size, len(pool)))
        return cls(params, {lam: complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for lam in chosen})


def dominant_signatures(params: SpaceParams, max_part: int) -> list:
    """All lam in the signature set with -e <= lam_n <= ... <= lam_1 <= max_part."""
    lo = -params.e
    out = []

    def rec(prefix: list, cap: int) -> None:
        if len(prefix) == params.n:
            out.append(tuple(prefix))
            return
        for a in range(lo, cap + 1):
            rec(prefix + [a], a)

    rec([], max_part)
    return sorted(out, key=lambda lam: _order_key(tuple(a + params.e for a in lam)))


@dataclass
class FourierImage:
    """sum over mu of (exact scalar S_mu) * (complex c_mu) * P_mu."""

    params: SpaceParams
    terms: dict  # mu -> (Scalar, complex)

    def coefficients(self, q_val: float) -> dict:
        return {mu: complex(s.eval(q_val)) * c for mu, (s, c) in self.terms.items()}

    def evaluate_on_angles(self, q_val: float, theta: np.ndarray) -> np.ndarray:
        out = np.zeros(theta.shape[0], dtype=complex)
        for mu, coeff in self.coefficients(q_val).items():
            out += coeff * eval_on_angles(p_poly(mu, self.params.n, self.params.tspec), q_val, theta)
        return out

    def polynomial(self) -> dict:
        return {mu: (str(s), c) for mu, (s, c) in self.terms.items()}


def fourier(phi: SchwartzFn) -> FourierImage:
    params = phi.params
    terms = {}
    for lam, c in phi.terms.items():
        mu = shifted(lam, params)
        terms[mu] = (fourier_scalar(lam, params), c)
    return FourierImage(params, terms)


def _quadrature(values: Callable[[np.ndarray], np.ndarray], theta: np.ndarray) -> complex:
    """Mean of values(theta) over the grid, chunked over threads and summed in order."""
    threads = _threads()
    if threads == 1 or theta.shape[0] < 4096:
        return complex(np.mean(values(theta)))
    chunks = np.array_split(theta, threads)
    with ThreadPoolExecutor(threads) as pool:
        sums = list(pool.map(lambda c: complex(np.sum(values(c))), chunks))
    return sum(sums) / theta.shape[0]


def _check_grid(q_val: float, grid: int) -> None:
    if q_val <= 1:
        raise ValueError("q_val must exceed 1")
    if grid < 8 or grid & (grid - 1):
        raise ValueError("grid must be a power of two, at least 8")


def total_mass(params: SpaceParams, q_val: float, grid: int) -> float:
    _check_grid(q_val, grid)
    theta = torus_grid(params.n, grid)
    return float(np.mean(plancherel_density(params.n, params.tspec, q_val, theta)))


def plancherel_lhs(phi: SchwartzFn, psi: SchwartzFn, q_val: float) -> complex:
    total = 0j
    for lam, c in phi.terms.items():
        d = psi.value(lam)
        if d:
            total += c * d.conjugate() * complex(volume_orbit(lam, phi.params).eval(q_val))
    return total


def plancherel_rhs(phi: SchwartzFn, psi: SchwartzFn, q_val: float, grid: int) -> complex:
    _check_grid(q_val, grid)
    params = phi.params
    theta_all = torus_grid(params.n, grid)
    fphi, fpsi = fourier(phi), fourier(psi)

    def integrand(theta: np.ndarray) -> np.ndarray:
        dens = plancherel_density(params.n, params.tspec, q_val, theta)
        return fphi.evaluate_on_angles(q_val, theta) * np.conj(fpsi.evaluate_on_angles(q_val, theta)) * dens

    return _quadrature(integrand, theta_all)


@dataclass(frozen=True)
class CheckResult:
    lhs: complex
    rhs: complex
    coarse: complex | None = None

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative(self) -> float:
        return self.residual / max(1.0, abs(self.lhs))


def plancherel_check(phi: SchwartzFn, psi: SchwartzFn, q_val: float, grid: int,
                     doubling: bool = False) -> CheckResult:
    """(sum phi conj(psi) vol, int F(phi) conj(F(psi)) d mu); with ``doubling`` also the grid/2 value."""
    if phi.params != psi.params:
        raise ParameterError("phi and psi live on different spaces")
    lhs = plancherel_lhs(phi, psi, q_val)
    rhs = plancherel_rhs(phi, psi, q_val, grid)
    coarse = plancherel_rhs(phi, psi, q_val, grid // 2) if doubling and grid >= 16 else None
    return CheckResult(lhs, rhs, coarse)


def psi_on_angles(lam: Sequence[int], params: SpaceParams, q_val: float, theta: np.ndarray) -> np.ndarray:
    num, den = psi_scalar(lam, params)
    scale = complex(num.eval(q_val)) / complex(den.eval(q_val))
    mu = shifted(lam, params)
    return scale * eval_on_angles(p_poly(mu, params.n, params.tspec), q_val, theta)


def inversion_check(phi: SchwartzFn, lam_eval: Sequence[int], q_val: float, grid: int,
                    conjugate: bool = True) -> CheckResult:
    """Reconstruct phi(x_lam) as int F(phi)(z) conj(Psi(x_lam; z)) d mu(z).

    With ``conjugate=False`` the kernel is Psi itself; for odd m that version
    returns (-1)^{|lam+e|} phi(x_lam) because Psi(x_lam; .) is not real on the
    unitary axis.
    """
    _check_grid(q_val, grid)
    params = phi.params
    lam_eval = params.signature(lam_eval)
    fphi = fourier(phi)
    theta_all = torus_grid(params.n, grid)

    def integrand(theta: np.ndarray) -> np.ndarray:
        kern = psi_on_angles(lam_eval, params, q_val, theta)
        if conjugate:
            kern = np.conj(kern)
        dens = plancherel_density(params.n, params.tspec, q_val, theta)
        return fphi.evaluate_on_angles(q_val, theta) * kern * dens

    return CheckResult(_quadrature(integrand, theta_all), phi.value(lam_eval))


def _shift_row(lam: Sequence[int], params: SpaceParams, q_val: float, z: Sequence[complex]) -> list:
    n = params.n
    shift = 1j * math.pi / math.log(q_val)
    num, den = psi_scalar(lam, params)
    scale = complex(num.eval(q_val)) / complex(den.eval(q_val))
    P = p_poly(shifted(lam, params), n, params.tspec)
    return [scale * eval_complex(P, q_val, [z[i] + (shift if (k >> i) & 1 else 0) for i in range(n)])
            for k in range(2 ** n)]


_RANK_PROBE = (0.137, -0.211, 0.089, 0.173)


def rank_signatures(params: SpaceParams, q_val: float = 2.0, max_part: int = 6) -> list:
    """2^n signatures, taken greedily in the P-expansion order of lam + e,
    keeping each one that raises the rank at a fixed probe point.

    Psi(x_lam; .) only sees the sign characters of {0, pi i/log q}^n whose
    parity matches |lam+e|, so the result has 2^{n-1} signatures of each parity.
    """
    n = params.n
    lq = math.log(q_val)
    z = [complex(_RANK_PROBE[i % 4], (0.7 + 0.9 * i) / lq) for i in range(n)]
    chosen: list = []
    rows: list = []
    for lam in dominant_signatures(params, max_part):
        row = _shift_row(lam, params, q_val, z)
        trial = np.array(rows + [row])
        trial = trial / np.max(np.abs(trial), axis=1)[:, None]
        if np.linalg.matrix_rank(trial, tol=1e-9) == len(rows) + 1:
            chosen.append(lam)
            rows.append(row)
            if len(chosen) == 2 ** n:
                return chosen
    raise ArithmeticError(f"no {2 ** n} independent rows among parts <= {max_part}")


def rank_matrix(params: SpaceParams, q_val: float, z: Sequence[complex]) -> np.ndarray:
    """[Psi(x_{lam_j}; z + u_k)] for u over {0, pi i / log q}^n."""
    if len(z) != params.n:
        raise ParameterError(f"need {params.n} coordinates")
    return np.array([_shift_row(lam, params, q_val, z) for lam in rank_signatures(params, q_val)],
                    dtype=complex)


def rank_basis_check(params: SpaceParams, q_val: float, z: Sequence[complex]) -> float:
    """|det| of the row-normalized rank matrix."""
    M = rank_matrix(params, q_val, z)
    norms = np.max(np.abs(M), axis=1)
    if np.any(norms == 0):
        return 0.0
    return float(abs(np.linalg.det(M / norms[:, None])))


def rank_samples(params: SpaceParams, q_val: float, count: int, seed: int) -> list:
    """(z, |det|) at ``count`` seeded points of the unitary strip."""
    rng = random.Random(seed)
    lq = math.log(q_val)
    out = []
    for _ in range(count):
        z = [complex(rng.uniform(-0.5, 0.5), rng.uniform(0, 2 * math.pi) / lq) for _ in range(params.n)]
        out.append((z, rank_basis_check(params, q_val, z)))
    return out
