"""Filtration of C^2 into V, V+ and V-, certified radius, escape classes.

V_R = {|x|,|y| <= R},  V+_R = {|y| >= max(|x|, R)},  V-_R = {|x| >= max(|y|, R)}.
A filtration radius makes V+ forward-invariant and V- backward-invariant; it is
found by doubling from a coefficient bound and certified on boundary samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import functools

import numpy as np

from .henon import HenonError, HenonMap, Point, apply_inverse_xy, apply_xy

__all__ = [
    "Region",
    "FiltrationRadius",
    "OrbitTag",
    "OrbitClass",
    "CertificationFailed",
    "region_of",
    "filtration_radius",
    "classify_point",
]

# escape requires V+ membership *and* this multiple of R as a margin
ESCAPE_MARGIN = 2.0


class Region(Enum):
    V = "V"
    Vplus = "Vplus"
    Vminus = "Vminus"


class OrbitTag(Enum):
    ESCAPED_FORWARD = "EscapedForward"
    ESCAPED_BACKWARD = "EscapedBackward"
    BOUNDED_UP_TO = "BoundedUpTo"


@dataclass(frozen=True)
class FiltrationRadius:
    R: float
    certification_samples: int

    def __post_init__(self):
        if not self.R > 1.0:
            raise ValueError("filtration radius must exceed 1")


@dataclass(frozen=True)
class OrbitClass:
    tag: OrbitTag
    n: int

    @property
    def escaped(self) -> bool:
        return self.tag is not OrbitTag.BOUNDED_UP_TO


class CertificationFailed(HenonError):
    def __init__(self, budget: float):
        self.budget = budget
        super().__init__(f"no radius up to {budget} certified the filtration")


def region_of(z: Point, R: float) -> Region:
    """Ties resolved in the order Vplus, Vminus, V (deterministic)."""
    ax, ay = abs(z.x), abs(z.y)
    if ay >= max(ax, R):
        return Region.Vplus
    if ax >= max(ay, R):
        return Region.Vminus
    return Region.V


def _coefficient_floor(H: HenonMap) -> float:
    worst = 2.0
    for f in H.factors:
        worst = max(worst, 1.0 + abs(f.a) + sum(abs(c) for c in f.p.coeffs))
    return worst


def _boundary_samples(R: float, n: int, rng) -> tuple:
    """Sample points on {|y| = max(|x|, R)}; swap coords for the V- boundary."""
    n_flat = n // 2
    th1 = rng.uniform(0.0, 2 * np.pi, n)
    th2 = rng.uniform(0.0, 2 * np.pi, n)
    # piece with |x| <= R, |y| = R
    rx_flat = rng.uniform(0.0, R, n_flat)
    ry_flat = np.full(n_flat, R)
    # piece with |x| = |y| >= R, log-spread outward
    r_out = R * np.exp(rng.uniform(0.0, np.log(50.0), n - n_flat))
    rx = np.concatenate([rx_flat, r_out])
    ry = np.concatenate([ry_flat, r_out])
    return rx * np.exp(1j * th1), ry * np.exp(1j * th2)


def _certifies(H: HenonMap, R: float, n_samples: int, margin: float) -> bool:
    rng = np.random.default_rng(20240617)
    x, y = _boundary_samples(R, n_samples, rng)
    fx, fy = apply_xy(H, x, y)
    fwd_ok = np.abs(fy) >= (1.0 + margin) * np.maximum(np.abs(fx), R)
    # backward invariance of V-: boundary has the roles of x and y swapped
    bx, by = _boundary_samples(R, n_samples, rng)
    gx, gy = apply_inverse_xy(H, by, bx)
    bwd_ok = np.abs(gx) >= (1.0 + margin) * np.maximum(np.abs(gy), R)
    return bool(np.all(fwd_ok) and np.all(bwd_ok))


@functools.lru_cache(maxsize=64)
def filtration_radius(
    H: HenonMap, n_samples: int = 2048, margin: float = 1e-6
) -> FiltrationRadius:
    """Doubling search from the coefficient floor, sample-certified.

    Certification checks that images of boundary samples of V+ stay in V+
    with a strict relative margin (and the mirror statement for H^{-1} on
    V-).  Raises CertificationFailed past 2^20 times the floor.
    """
    R = _coefficient_floor(H)
    budget = R * 2.0**20
    while R <= budget:
        if _certifies(H, R, n_samples, margin):
            return FiltrationRadius(R, 2 * n_samples)
        R *= 2.0
    raise CertificationFailed(budget)


def classify_point(
    H: HenonMap,
    z: Point,
    R: FiltrationRadius,
    N_max: int,
    forward: bool = True,
) -> OrbitClass:
    """First n <= N_max with H^n(z) in the escape region, else bounded.

    Forward escape means V+ membership with |y| > 2R; the backward variant
    iterates H^{-1} and tests V- with |x| > 2R.
    """
    x, y = complex(z.x), complex(z.y)
    r = R.R
    cutoff = ESCAPE_MARGIN * r
    for n in range(N_max + 1):
        ax, ay = abs(x), abs(y)
        if forward:
            if ay >= max(ax, r) and ay > cutoff:
                return OrbitClass(OrbitTag.ESCAPED_FORWARD, n)
        else:
            if ax >= max(ay, r) and ax > cutoff:
                return OrbitClass(OrbitTag.ESCAPED_BACKWARD, n)
        if max(ax, ay) > 1e150:
            # cannot be classified in the requested direction; treat as
            # bounded-budget (the other direction's escape test missed it)
            return OrbitClass(OrbitTag.BOUNDED_UP_TO, N_max)
        if n == N_max:
            break
        x, y = apply_xy(H, x, y) if forward else apply_inverse_xy(H, x, y)
    return OrbitClass(OrbitTag.BOUNDED_UP_TO, N_max)
