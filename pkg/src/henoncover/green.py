"""Forward and backward Green's functions of a generalized Henon map.

G+(z) is the normalized escape rate lim d^-n log+ ||H^n(z)||; it vanishes
exactly on the non-escaping set and satisfies G+(H(z)) = d * G+(z).  Once
an orbit is deep in V+, the remaining limit equals log|phi| at that orbit
point, so the value is refined through the Bottcher product rather than by
iterating to overflow.  G- mirrors this under H^{-1} through V-, with the
backward product normalized by the constant kappa from the inverse's
leading coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .boettcher import phi_series
from .filtration import (
    ESCAPE_MARGIN,
    FiltrationRadius,
    OrbitTag,
    classify_point,
    filtration_radius,
)
from .henon import (
    HenonMap,
    Point,
    apply_inverse_xy,
    apply_xy,
    inverse_leading_constant,
)

__all__ = [
    "GreenValue",
    "Membership",
    "green_plus",
    "green_minus",
    "membership",
    "green_plus_grid",
    "escape_time_grid",
]

# extra forward pushes allowed when the product bound fails at the escape step
MAX_PUSH = 6
FALLBACK_TAIL = np.log(4.0)


@dataclass(frozen=True)
class GreenValue:
    value: float
    error_bound: float
    depth: int

    def __post_init__(self):
        if self.value < 0 or self.error_bound < 0:
            raise ValueError("Green data must be nonnegative")


class Membership(Enum):
    ESCAPING = "Escaping"
    NON_ESCAPING_UP_TO_BUDGET = "NonEscapingUpToBudget"


def _bounded_value(H: HenonMap, R: float, N_max: int) -> GreenValue:
    err = float(H.d) ** -N_max * max(1.0, np.log(ESCAPE_MARGIN * R))
    return GreenValue(0.0, err, N_max)


def green_plus(
    H: HenonMap,
    z: Point,
    tol: float = 1e-10,
    N_max: int = 256,
    R: FiltrationRadius | None = None,
) -> GreenValue:
    """G+(z) with a reported error bound and the orbit depth used."""
    if R is None:
        R = filtration_radius(H)
    r = R.R
    cutoff = ESCAPE_MARGIN * r
    d = H.d
    x, y = complex(z.x), complex(z.y)
    for n in range(N_max + 1):
        if abs(y) >= max(abs(x), r) and abs(y) > cutoff:
            break
        if max(abs(x), abs(y)) > 1e150:
            return _bounded_value(H, r, N_max)
        if n == N_max:
            return _bounded_value(H, r, N_max)
        x, y = apply_xy(H, x, y)
    else:  # pragma: no cover
        return _bounded_value(H, r, N_max)

    for push in range(MAX_PUSH + 1):
        S, err, ok, _ = phi_series(H, np.array([x]), np.array([y]), tol)
        depth = n + push
        scale = float(d) ** -depth
        if ok[0]:
            value = scale * (np.log(abs(y)) + S[0].real)
            return GreenValue(max(value, 0.0), scale * float(err[0]), depth)
        x, y = apply_xy(H, x, y)
    # product bound kept failing: raw logarithm with a conservative tail
    depth = n + MAX_PUSH
    scale = float(d) ** -depth
    return GreenValue(
        max(scale * np.log(abs(y)), 0.0), scale * FALLBACK_TAIL, depth
    )


def _backward_series(H: HenonMap, x: complex, y: complex, tol: float, max_steps: int = 64):
    """sum d^-(j+1) log|1 + w_j| along the backward orbit, w from x' kappa/x^d."""
    d = H.d
    kappa = inverse_leading_constant(H)
    xcap = 10.0 ** (280.0 / d)
    total = 0.0
    err = 0.0
    c_est = 10.0
    for j in range(max_steps):
        scale = float(d) ** -(j + 1)
        if abs(x) > xcap:
            err += scale * 2.0 * c_est / abs(x)
            break
        nx, ny = apply_inverse_xy(H, x, y)
        w = nx * kappa / x**d - 1.0
        if abs(w) > 0.5:
            return total, err, False
        term = scale * np.log(abs(1.0 + w))
        total += term
        c_est = max(abs(w) * abs(x), 1e-300)
        if abs(term) < tol:
            err += 2.0 * abs(term)
            break
        x, y = nx, ny
    else:
        err += float(d) ** -(max_steps + 1)
    return total, err, True


def green_minus(
    H: HenonMap,
    z: Point,
    tol: float = 1e-10,
    N_max: int = 256,
    R: FiltrationRadius | None = None,
) -> GreenValue:
    """G-(z): the mirror of green_plus under H^{-1} and V-."""
    if R is None:
        R = filtration_radius(H)
    r = R.R
    cutoff = ESCAPE_MARGIN * r
    d = H.d
    kappa = inverse_leading_constant(H)
    x, y = complex(z.x), complex(z.y)
    for n in range(N_max + 1):
        if abs(x) >= max(abs(y), r) and abs(x) > cutoff:
            break
        if max(abs(x), abs(y)) > 1e150:
            return _bounded_value(H, r, N_max)
        if n == N_max:
            return _bounded_value(H, r, N_max)
        x, y = apply_inverse_xy(H, x, y)
    else:  # pragma: no cover
        return _bounded_value(H, r, N_max)

    offset = -np.log(abs(kappa)) / (d - 1.0)
    for push in range(MAX_PUSH + 1):
        tail, err, ok = _backward_series(H, x, y, tol)
        depth = n + push
        scale = float(d) ** -depth
        if ok:
            value = scale * (np.log(abs(x)) + offset + tail)
            return GreenValue(max(value, 0.0), scale * err, depth)
        x, y = apply_inverse_xy(H, x, y)
    depth = n + MAX_PUSH
    scale = float(d) ** -depth
    return GreenValue(
        max(scale * np.log(abs(x)), 0.0),
        scale * (FALLBACK_TAIL + abs(offset)),
        depth,
    )


def membership(H: HenonMap, z: Point, budget: int = 256) -> Membership:
    """Escaping iff the forward orbit reaches the escape region in budget."""
    R = filtration_radius(H)
    cls = classify_point(H, z, R, budget)
    if cls.tag is OrbitTag.ESCAPED_FORWARD:
        return Membership.ESCAPING
    return Membership.NON_ESCAPING_UP_TO_BUDGET


# ---------------------------------------------------------------------------
# Vector grid evaluation (renderer backend).  Same formulas as green_plus,
# run over flat arrays with masks; deterministic for a fixed input order.

def escape_time_grid(H: HenonMap, xs, ys, R: float, N_max: int):
    """First escape step per point (N_max where the budget ran out)."""
    x = np.asarray(xs, dtype=complex).ravel().copy()
    y = np.asarray(ys, dtype=complex).ravel().copy()
    n_pts = x.size
    steps = np.full(n_pts, N_max, dtype=np.int64)
    alive = np.arange(n_pts)
    cutoff = ESCAPE_MARGIN * R
    for n in range(N_max + 1):
        if alive.size == 0:
            break
        ax, ay = np.abs(x[alive]), np.abs(y[alive])
        esc = (ay >= np.maximum(ax, R)) & (ay > cutoff)
        blown = ~esc & (np.maximum(ax, ay) > 1e150)
        steps[alive[esc]] = n
        alive = alive[~esc & ~blown]
        if n == N_max or alive.size == 0:
            break
        x[alive], y[alive] = apply_xy(H, x[alive], y[alive])
    return steps.reshape(np.asarray(xs).shape)


def green_plus_grid(H: HenonMap, xs, ys, R: float, N_max: int, tol: float = 1e-10):
    """G+ over an array of points; returns (values, error_bounds, depths)."""
    shape = np.asarray(xs).shape
    x = np.asarray(xs, dtype=complex).ravel().copy()
    y = np.asarray(ys, dtype=complex).ravel().copy()
    n_pts = x.size
    d = H.d
    vals = np.zeros(n_pts)
    errs = np.full(n_pts, float(d) ** -N_max * max(1.0, np.log(ESCAPE_MARGIN * R)))
    depths = np.full(n_pts, N_max, dtype=np.int64)
    esc_step = np.full(n_pts, -1, dtype=np.int64)
    ex = np.zeros(n_pts, dtype=complex)
    ey = np.zeros(n_pts, dtype=complex)

    cutoff = ESCAPE_MARGIN * R
    alive = np.arange(n_pts)
    for n in range(N_max + 1):
        if alive.size == 0:
            break
        ax, ay = np.abs(x[alive]), np.abs(y[alive])
        esc = (ay >= np.maximum(ax, R)) & (ay > cutoff)
        if esc.any():
            eidx = alive[esc]
            esc_step[eidx] = n
            ex[eidx] = x[eidx]
            ey[eidx] = y[eidx]
        blown = ~esc & (np.maximum(ax, ay) > 1e150)
        alive = alive[~esc & ~blown]
        if n == N_max or alive.size == 0:
            break
        x[alive], y[alive] = apply_xy(H, x[alive], y[alive])

    todo = np.flatnonzero(esc_step >= 0)
    for push in range(MAX_PUSH + 1):
        if todo.size == 0:
            break
        S, perr, ok, _ = phi_series(H, ex[todo], ey[todo], tol)
        good = ok
        gidx = todo[good]
        depth = esc_step[gidx] + push
        scale = float(d) ** (-depth.astype(float))
        vals[gidx] = np.maximum(
            scale * (np.log(np.abs(ey[gidx])) + S[good].real), 0.0
        )
        errs[gidx] = scale * perr[good]
        depths[gidx] = depth
        todo = todo[~good]
        if todo.size and push < MAX_PUSH:
            ex[todo], ey[todo] = apply_xy(H, ex[todo], ey[todo])
    if todo.size:
        depth = esc_step[todo] + MAX_PUSH
        scale = float(d) ** (-depth.astype(float))
        vals[todo] = np.maximum(scale * np.log(np.abs(ey[todo])), 0.0)
        errs[todo] = scale * FALLBACK_TAIL
        depths[todo] = depth

    return vals.reshape(shape), errs.reshape(shape), depths.reshape(shape)
