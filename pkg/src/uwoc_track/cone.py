"""Cone-shaped beam region below the ship receiver.

The region has its apex at the receiver on the surface, a vertical axis
pointing down into the water (world z measures depth), half-angle equal to
the receiver FOV, and a slant height equal to the range at which the link
rate along the FOV edge drops to the required minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .optics import LinkGeometry, OpticalLink, bit_rate

AXIS = (0.0, 0.0, 1.0)
DEFAULT_BRACKET = (1e-3, 150.0)


class UnreachableRateError(ValueError):
    """The minimum rate is not met even at the short end of the bracket."""


class BracketError(ValueError):
    """No sign change of the rate residual inside the bracket."""


@dataclass(frozen=True)
class ConeRegion:
    apex: tuple[float, float, float]
    half_angle: float
    slant_height: float

    def __post_init__(self):
        object.__setattr__(self, "apex", tuple(float(c) for c in self.apex))
        if not self.slant_height > 0:
            raise ValueError("cone: slant_height > 0 violated")
        if not 0 < self.half_angle < math.pi / 2:
            raise ValueError("cone: 0 < half_angle < pi/2 violated")

    @property
    def axis(self) -> tuple[float, float, float]:
        return AXIS

    @property
    def height(self) -> float:
        return self.slant_height * math.cos(self.half_angle)

    def moved_to(self, apex) -> "ConeRegion":
        return ConeRegion(tuple(apex), self.half_angle, self.slant_height)


class Containment(NamedTuple):
    inside: bool
    distance: float
    incidence_angle: float


def edge_rate(link: OpticalLink, distance: float, target_ber: float) -> float:
    """Bit rate at ``distance`` along the FOV edge (incidence = FOV half-angle)."""
    psi = link.rx.fov_half_angle
    geom = LinkGeometry(distance, psi, distance * math.cos(psi))
    return bit_rate(link, geom, target_ber)


def solve_slant_height(link: OpticalLink, target_ber: float = 1e-4, min_bit_rate: float = 1e7,
                       bracket: tuple[float, float] = DEFAULT_BRACKET, tol: float = 1e-6) -> float:
    """Range along the FOV edge where the bit rate equals ``min_bit_rate``.

    The edge rate is strictly decreasing in distance, so plain bisection on
    ``log(rate) - log(min_bit_rate)`` brackets a unique root.
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got {bracket!r}")
    if not min_bit_rate > 0:
        raise ValueError("min_bit_rate must be > 0")
    log_target = math.log(min_bit_rate)

    def residual(d):
        return math.log(edge_rate(link, d, target_ber)) - log_target

    f_lo = residual(lo)
    if f_lo < 0:
        raise UnreachableRateError(
            f"rate {edge_rate(link, lo, target_ber):.6g} bit/s at d = {lo} m is already below "
            f"{min_bit_rate:.6g} bit/s")
    f_hi = residual(hi)
    if f_hi > 0:
        raise BracketError(f"rate still above {min_bit_rate:.6g} bit/s at d = {hi} m")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def build_cone(link: OpticalLink, target_ber: float = 1e-4, min_bit_rate: float = 1e7,
               apex=(0.0, 0.0, 0.0), **solver_kw) -> ConeRegion:
    d_c = solve_slant_height(link, target_ber, min_bit_rate, **solver_kw)
    return ConeRegion(tuple(apex), link.rx.fov_half_angle, d_c)


def contains(cone: ConeRegion, point) -> Containment:
    """Closed containment test; the apex itself counts as inside with angle 0."""
    dx = point[0] - cone.apex[0]
    dy = point[1] - cone.apex[1]
    dz = point[2] - cone.apex[2]
    d = math.sqrt(dx * dx + dy * dy + dz * dz)
    if d == 0.0:
        return Containment(True, 0.0, 0.0)
    psi = math.acos(max(-1.0, min(1.0, dz / d)))
    return Containment(d <= cone.slant_height and psi <= cone.half_angle, d, psi)


def contains_many(cone: ConeRegion, points: np.ndarray):
    """Vectorised :func:`contains`; returns ``(inside, distance, angle)`` arrays."""
    p = np.asarray(points, dtype=float) - np.asarray(cone.apex)
    d = np.sqrt(np.sum(p * p, axis=-1))
    with np.errstate(invalid="ignore", divide="ignore"):
        psi = np.arccos(np.clip(p[..., 2] / d, -1.0, 1.0))
    psi = np.where(d == 0.0, 0.0, psi)
    inside = (d <= cone.slant_height) & (psi <= cone.half_angle)
    return inside, d, psi
