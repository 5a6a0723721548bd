import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from uwoc_track.cone import (BracketError, ConeRegion, UnreachableRateError, build_cone,
                             contains, contains_many, edge_rate, solve_slant_height)
from uwoc_track.optics import OpticalLink, Transmitter

LINK = OpticalLink()


def test_slant_height_against_brentq():
    oracle = brentq(lambda d: edge_rate(LINK, d, 1e-4) - 1e7, 1.0, 20.0, xtol=1e-12)
    assert solve_slant_height(LINK) == pytest.approx(oracle, abs=1e-6)


def test_rate_at_slant_height_is_the_minimum():
    d_c = solve_slant_height(LINK)
    assert edge_rate(LINK, d_c, 1e-4) == pytest.approx(1e7, rel=1e-6)


def test_stricter_requirements_shrink_the_cone():
    base = solve_slant_height(LINK)
    assert solve_slant_height(LINK, min_bit_rate=2e7) < base
    assert solve_slant_height(LINK, target_ber=1e-9) < base
    assert solve_slant_height(OpticalLink(tx=Transmitter(power_tx=1.0))) > base


def test_unreachable_and_bracket_errors():
    with pytest.raises(UnreachableRateError):
        solve_slant_height(LINK, min_bit_rate=1e30)
    with pytest.raises(BracketError):
        solve_slant_height(LINK, min_bit_rate=1.0, bracket=(1e-3, 5.0))
    with pytest.raises(ValueError):
        solve_slant_height(LINK, bracket=(5.0, 1.0))


def test_containment_boundaries_closed():
    cone = ConeRegion((0, 0, 0), math.radians(30), 4.0)
    assert contains(cone, (0, 0, 0)).inside
    assert contains(cone, (0, 0, 4.0)).inside
    assert not contains(cone, (0, 0, 4.0 + 1e-9)).inside
    # on the FOV edge, slightly inside radially
    e = 3.0
    inside = contains(cone, (e * math.sin(cone.half_angle) * 0.999999, 0, e * math.cos(cone.half_angle)))
    assert inside.inside
    assert not contains(cone, (e * math.sin(math.radians(30.01)), 0, e * math.cos(math.radians(30.01)))).inside
    assert not contains(cone, (0, 0, -1.0)).inside


def test_moving_apex():
    cone = ConeRegion((0, 0, 0), math.radians(30), 4.0).moved_to((10.0, -2.0, 0.0))
    assert contains(cone, (10.0, -2.0, 3.0)).inside
    assert not contains(cone, (0.0, 0.0, 3.0)).inside


def test_invalid_cone():
    with pytest.raises(ValueError, match="slant_height > 0"):
        ConeRegion((0, 0, 0), 0.5, 0.0)
    with pytest.raises(ValueError, match="half_angle"):
        ConeRegion((0, 0, 0), math.pi / 2, 1.0)


@given(st.lists(st.tuples(st.floats(-6, 6), st.floats(-6, 6), st.floats(-1, 6)), min_size=1,
                max_size=50))
@settings(max_examples=100, deadline=None)
def test_vectorised_containment_matches_scalar(points):
    cone = build_cone(LINK, apex=(0.3, -0.2, 0.0))
    inside, d, psi = contains_many(cone, np.array(points))
    for p, i, di, pi in zip(points, inside, d, psi):
        c = contains(cone, p)
        assert c.inside == bool(i)
        assert c.distance == pytest.approx(di, rel=1e-15, abs=1e-300)
        assert c.incidence_angle == pytest.approx(pi, abs=1e-12)
