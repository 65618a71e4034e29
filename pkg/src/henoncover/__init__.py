"""Escaping-set machinery for generalized complex Henon maps.

Maps are finite compositions of factors (x, y) -> (y, p(y) - a*x) with p
monic of degree >= 2.  The package computes filtration radii, forward and
backward Green's functions, the Bottcher coordinate near the y-axis at
infinity, an explicit covering chart of the escaping set with its lift
polynomial and deck transformations, affine symmetry groups, and
sub-level ("Short C^2") classifications, each paired with runnable
verification of its defining identities.
"""

from .henon import (
    ComplexPolynomial,
    DegreeTooLow,
    HenonError,
    HenonMap,
    NonFinite,
    NotMonic,
    Point,
    SimpleFactor,
    ZeroJacobianFactor,
    apply,
    apply_inverse,
    iterate,
    make_henon,
)
from .filtration import (
    FiltrationRadius,
    OrbitClass,
    OrbitTag,
    Region,
    classify_point,
    filtration_radius,
    region_of,
)
from .green import GreenValue, Membership, green_minus, green_plus, membership
from .boettcher import (
    BoettcherRegion,
    alpha_of_loop,
    bottcher_phi,
    certify_region,
    dlambda_dy,
    dphi_dy,
    lambda_inverse,
    q_correction,
)
from .cover import (
    CoverChart,
    CoverPoint,
    DeckLabel,
    build_chart,
    covering_map,
    deck,
    lift_H,
    load_chart,
    psi_integral,
    psi_tilde,
    psi_tilde_inverse,
    r_series,
    save_chart,
)
from .symmetry import (
    AffineMap,
    SymmetryReport,
    compute_d0,
    commutes_with_power,
    find_affine_symmetries,
    verify_cyclic,
)
from .shortc2 import SublevelClass, SublevelTag, annulus_coordinate, classify_sublevel

__version__ = "0.1.0"

__all__ = [
    "ComplexPolynomial", "SimpleFactor", "HenonMap", "Point",
    "HenonError", "DegreeTooLow", "NotMonic", "ZeroJacobianFactor", "NonFinite",
    "make_henon", "apply", "apply_inverse", "iterate",
    "Region", "FiltrationRadius", "OrbitClass", "OrbitTag",
    "region_of", "filtration_radius", "classify_point",
    "GreenValue", "Membership", "green_plus", "green_minus", "membership",
    "BoettcherRegion", "certify_region", "q_correction", "bottcher_phi",
    "lambda_inverse", "dphi_dy", "dlambda_dy", "alpha_of_loop",
    "CoverChart", "CoverPoint", "DeckLabel", "build_chart", "psi_integral",
    "r_series", "psi_tilde", "psi_tilde_inverse", "lift_H", "deck",
    "covering_map", "save_chart", "load_chart",
    "AffineMap", "SymmetryReport", "compute_d0", "commutes_with_power",
    "find_affine_symmetries", "verify_cyclic",
    "SublevelClass", "SublevelTag", "classify_sublevel", "annulus_coordinate",
    "__version__",
]
