"""Spherical functions on the space of unitary hermitian matrices over a p-adic field."""
from .exact_arith import GaussianRational, MultiLaurent, RationalFn, Scalar
from .hall_littlewood import TSpec, p_poly, q_poly
from .padic_cartan import (
    PadicNum,
    PrecisionError,
    QuadExtNum,
    QuadField,
    cartan_reduce,
    make_x_lambda,
    omega_bruteforce_m2,
    orbit_invariants,
)
from .schwartz_plancherel import SchwartzFn, fourier, volume_orbit
from .spherical import SpaceParams, omega_closed_rank1, omega_explicit, psi_normalized
from .weyl_roots import SignedPermutation

__all__ = [
    "GaussianRational", "MultiLaurent", "RationalFn", "Scalar",
    "TSpec", "p_poly", "q_poly",
    "PadicNum", "PrecisionError", "QuadExtNum", "QuadField", "cartan_reduce", "make_x_lambda",
    "omega_bruteforce_m2", "orbit_invariants",
    "SchwartzFn", "fourier", "volume_orbit",
    "SpaceParams", "omega_closed_rank1", "omega_explicit", "psi_normalized",
    "SignedPermutation",
]
