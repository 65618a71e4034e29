import numpy as np
import pytest

from henoncover import (
    Point,
    SublevelTag,
    annulus_coordinate,
    apply,
    classify_sublevel,
    green_plus,
    make_henon,
)
from henoncover.shortc2 import NotEscaping


def escaping_points(rng, H, n, g_min=0.02):
    out = []
    while len(out) < n:
        z = Point(complex(*rng.uniform(-8, 8, 2)), complex(*rng.uniform(-8, 8, 2)))
        g = green_plus(H, z)
        if g.value > g_min:
            out.append((z, g.value))
    return out


def test_fixed_point_in_k_plus():
    H = make_henon([([0, 0, 1], 1.0)])
    for c in (0.1, 1.0, 10.0):
        cls = classify_sublevel(H, c, Point(0, 0))
        assert cls.tag is SublevelTag.IN_K_PLUS_UP_TO_BUDGET
        assert cls.green_value.value == 0.0


def test_classification_follows_green(rng, href):
    for z, g in escaping_points(rng, href, 25):
        below = classify_sublevel(href, 2.0 * g, z)
        above = classify_sublevel(href, 0.5 * g, z)
        assert below.tag is SublevelTag.IN_OMEGA_PRIME
        assert 0 < below.green_value.value < 2.0 * g
        assert above.tag is SublevelTag.OUTSIDE_OMEGA


def test_deep_point_outside_small_sublevel(href, href_radius):
    c = 0.5
    y = 20.0 * href_radius.R * np.exp(2.0 * c)  # G+ ~ log|y| >> c
    cls = classify_sublevel(href, c, Point(0.0, y))
    assert cls.tag is SublevelTag.OUTSIDE_OMEGA
    assert abs(cls.green_value.value - np.log(y)) <= 1e-2 * np.log(y)


def test_ambiguous_band_flagged(rng, href):
    (z, g), = escaping_points(rng, href, 1)
    cls = classify_sublevel(href, g, z)
    assert cls.tag is SublevelTag.OUTSIDE_OMEGA
    assert cls.ambiguous


def test_monotone_in_threshold(rng, href):
    for z, g in escaping_points(rng, href, 15):
        c1 = classify_sublevel(href, 1.2 * g, z)
        c2 = classify_sublevel(href, 2.4 * g, z)
        if c1.tag is SublevelTag.IN_OMEGA_PRIME and not c2.ambiguous:
            assert c2.tag is SublevelTag.IN_OMEGA_PRIME


def test_annulus_modulus_is_green(rng, href, href_chart):
    for z, g in escaping_points(rng, href, 30):
        zeta = annulus_coordinate(href_chart, z)
        assert abs(abs(zeta) - np.exp(g)) <= 1e-8 * np.exp(g)


def test_annulus_range_inside_sublevel(rng, href, href_chart):
    c = 1.5
    found = 0
    while found < 15:
        pts = escaping_points(rng, href, 10)
        for z, g in pts:
            cls = classify_sublevel(href, c, z)
            if cls.tag is SublevelTag.IN_OMEGA_PRIME:
                found += 1
                zeta = annulus_coordinate(href_chart, z)
                assert 1.0 < abs(zeta) < np.exp(c)


def test_annulus_power_law(rng, href, href_chart):
    for z, _ in escaping_points(rng, href, 40):
        z1 = annulus_coordinate(href_chart, z)
        z2 = annulus_coordinate(href_chart, apply(href, z))
        assert abs(abs(z2) - abs(z1) ** href.d) <= 1e-8 * abs(z1) ** href.d


def test_sublevel_equivariance(rng, href):
    c = 0.8
    used = 0
    while used < 60:
        z = Point(complex(*rng.uniform(-6, 6, 2)), complex(*rng.uniform(-6, 6, 2)))
        c1 = classify_sublevel(href, c, z, budget=128)
        c2 = classify_sublevel(href, href.d * c, apply(href, z), budget=128)
        if c1.ambiguous or c2.ambiguous:
            continue
        used += 1
        assert c1.tag is c2.tag


def test_not_escaping_raises(href_chart):
    # a fixed point of the reference map: y = x, x^2 - 1.8x - 1.1 = 0
    x = (1.8 - np.sqrt(1.8**2 + 4 * 1.1)) / 2.0
    with pytest.raises(NotEscaping):
        annulus_coordinate(href_chart, Point(x, x), budget=12)
