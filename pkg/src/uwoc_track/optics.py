"""Directed line-of-sight IM/DD optical channel with solar background noise.

Covers the path from emitted optical power to the achievable OOK bit rate at
a target BER: Lambertian source, concentrator-equipped receiver, exponential
water attenuation, and a Gaussian solar shot-noise floor.

Angles are radians, lengths metres, powers watts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ELECTRON_CHARGE = 1.602176634e-19  # C, exact SI value
MIN_HALF_ANGLE = 1e-6  # rad; keeps the Lambert order finite

SOLAR_MODELS = ("surface", "literal", "single")


class OpticsDomainError(ValueError):
    """Raised when a channel quantity is evaluated outside its domain."""


@dataclass(frozen=True)
class Transmitter:
    power_tx: float = 0.1
    half_angle: float = math.radians(15.0)
    filter_bandwidth: float = 30.0  # nm

    def __post_init__(self):
        if not self.power_tx > 0:
            raise ValueError("transmitter: power_tx > 0 violated")
        if not 0 < self.half_angle < math.pi / 2:
            raise ValueError("transmitter: 0 < half_angle < pi/2 violated")
        if not self.filter_bandwidth > 0:
            raise ValueError("transmitter: filter_bandwidth > 0 violated")


@dataclass(frozen=True)
class Receiver:
    area: float = 1e-4  # m^2 (1 cm^2)
    fov_half_angle: float = math.radians(30.0)
    refractive_index: float = 1.52
    responsivity: float = 0.6  # A/W

    def __post_init__(self):
        if not self.area > 0:
            raise ValueError("receiver: area > 0 violated")
        if not 0 < self.fov_half_angle < math.pi / 2:
            raise ValueError("receiver: 0 < fov_half_angle < pi/2 violated")
        if not self.refractive_index >= 1:
            raise ValueError("receiver: refractive_index >= 1 violated")
        if not self.responsivity > 0:
            raise ValueError("receiver: responsivity > 0 violated")


@dataclass(frozen=True)
class Water:
    attenuation: float = 0.15  # 1/m
    transmittance: float = 0.95
    surface_irradiance: float = 0.7645  # W/(m^2 nm) at 532 nm

    def __post_init__(self):
        if not self.attenuation > 0:
            raise ValueError("water: attenuation > 0 violated")
        if not 0 < self.transmittance <= 1:
            raise ValueError("water: 0 < transmittance <= 1 violated")
        if not self.surface_irradiance >= 0:
            raise ValueError("water: surface_irradiance >= 0 violated")


@dataclass(frozen=True)
class LinkGeometry:
    distance: float
    incidence_angle: float
    depth: float

    def __post_init__(self):
        if not self.distance >= 0:
            raise ValueError("geometry: distance >= 0 violated")
        if not self.depth >= 0:
            raise ValueError("geometry: depth >= 0 violated")
        if not 0 <= self.incidence_angle <= math.pi:
            raise ValueError("geometry: incidence_angle in [0, pi] violated")


@dataclass(frozen=True)
class OpticalLink:
    """Transmitter, receiver and water bundled with the solar-noise model.

    ``solar_model`` selects how the background power is formed:

    ``"surface"``
        surface irradiance collected over the bare detector area,
        ``E_s(0) * eps_t * dlambda * A_r``.  Default; yields a 10 Mbps range
        of about 4.405 m with the stock parameters.
    ``"literal"``
        depth-attenuated irradiance multiplied by a second
        ``exp(-K_a * depth)`` factor and collected over the effective area.
    ``"single"``
        as ``"literal"`` but with the attenuation factor applied once.
    """

    tx: Transmitter = Transmitter()
    rx: Receiver = Receiver()
    water: Water = Water()
    solar_model: str = "surface"

    def __post_init__(self):
        if self.solar_model not in SOLAR_MODELS:
            raise ValueError(f"solar_model must be one of {SOLAR_MODELS}, got {self.solar_model!r}")


@dataclass(frozen=True)
class LinkBudget:
    received_power: float
    photocurrent: float
    noise_power: float
    noise_variance: float
    snr: float
    ber: float
    bit_rate: float


def lambert_mode(half_angle: float) -> float:
    """Lambertian order ``m = -ln 2 / ln(cos half_angle)``."""
    if not MIN_HALF_ANGLE <= half_angle < math.pi / 2:
        raise OpticsDomainError(
            f"half_angle must lie in [{MIN_HALF_ANGLE}, pi/2), got {half_angle!r}")
    c = math.cos(half_angle)
    if c <= 0.0 or c >= 1.0:
        raise OpticsDomainError(f"cos(half_angle) = {c!r} gives no finite Lambert order")
    return -math.log(2.0) / math.log(c)


def radiant_intensity(tx: Transmitter, distance: float, pointing_angle: float) -> float:
    if not distance > 0:
        raise OpticsDomainError(f"distance must be > 0, got {distance!r}")
    if abs(pointing_angle) > math.pi / 2:
        raise OpticsDomainError(f"|pointing_angle| must be <= pi/2, got {pointing_angle!r}")
    m = lambert_mode(tx.half_angle)
    return tx.power_tx * (m + 1.0) / (2.0 * math.pi * distance ** 2) * math.cos(pointing_angle) ** m


def concentrator_gain(rx: Receiver, incidence_angle: float) -> float:
    if abs(incidence_angle) > rx.fov_half_angle:
        return 0.0
    return rx.refractive_index ** 2 / math.sin(rx.fov_half_angle) ** 2


def effective_area(rx: Receiver, incidence_angle: float) -> float:
    """Collecting area seen at ``incidence_angle``; exactly 0 outside the FOV."""
    g = concentrator_gain(rx, incidence_angle)
    if g == 0.0:
        return 0.0
    return g * rx.area * math.cos(incidence_angle)


def channel_loss(water: Water, path_length: float) -> float:
    if path_length < 0:
        raise OpticsDomainError(f"path_length must be >= 0, got {path_length!r}")
    return math.exp(-water.attenuation * path_length)


def received_power(tx: Transmitter, rx: Receiver, water: Water, geom: LinkGeometry) -> float:
    # transmitter points straight up, receiver straight down: phi == psi
    a_eff = effective_area(rx, geom.incidence_angle)
    if a_eff == 0.0:
        if not geom.distance > 0:
            raise OpticsDomainError("distance must be > 0")
        return 0.0
    i_s = radiant_intensity(tx, geom.distance, geom.incidence_angle)
    return i_s * a_eff * channel_loss(water, geom.distance)


def received_photocurrent(tx: Transmitter, rx: Receiver, water: Water, geom: LinkGeometry) -> float:
    return rx.responsivity * received_power(tx, rx, water, geom)


def solar_noise_power(rx: Receiver, water: Water, tx_filter_bandwidth: float, depth: float,
                      incidence_angle: float, single_attenuation: bool = False) -> float:
    """Solar background power at ``depth`` through a band-pass filter.

    The downwelling irradiance is already attenuated to ``depth`` and a
    further ``exp(-K_a * depth)`` factor is applied unless
    ``single_attenuation`` is set.
    """
    if depth < 0:
        raise OpticsDomainError(f"depth must be >= 0, got {depth!r}")
    irradiance = water.surface_irradiance * math.exp(-water.attenuation * depth)
    extra = 1.0 if single_attenuation else math.exp(-water.attenuation * depth)
    return (irradiance * water.transmittance * tx_filter_bandwidth * extra
            * effective_area(rx, incidence_angle))


def surface_noise_power(rx: Receiver, water: Water, tx_filter_bandwidth: float) -> float:
    return water.surface_irradiance * water.transmittance * tx_filter_bandwidth * rx.area


def link_noise_power(link: OpticalLink, geom: LinkGeometry) -> float:
    """Background power according to ``link.solar_model``."""
    if link.solar_model == "surface":
        return surface_noise_power(link.rx, link.water, link.tx.filter_bandwidth)
    return solar_noise_power(link.rx, link.water, link.tx.filter_bandwidth, geom.depth,
                             geom.incidence_angle,
                             single_attenuation=link.solar_model == "single")


def noise_variance(noise_power: float, responsivity: float, bit_rate: float) -> float:
    """Shot-noise variance ``2 e R P_b B`` in A^2."""
    if not bit_rate > 0:
        raise OpticsDomainError(f"bit_rate must be > 0, got {bit_rate!r}")
    return 2.0 * ELECTRON_CHARGE * responsivity * noise_power * bit_rate


def q_function(x: float) -> float:
    """Standard normal upper-tail probability."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def q_inverse(p: float) -> float:
    """Inverse of :func:`q_function` on ``(0, 0.5]``.

    Bisection over ``[0, 40]`` run until the bracket stops shrinking, which
    leaves the root at full double precision.
    """
    if not 0.0 < p <= 0.5:
        raise OpticsDomainError(f"q_inverse needs p in (0, 0.5], got {p!r}")
    if p == 0.5:
        return 0.0
    lo, hi = 0.0, 40.0
    if q_function(hi) > p:
        raise OpticsDomainError(f"p = {p!r} is below the representable tail at x = 40")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if q_function(mid) > p:
            lo = mid
        else:
            hi = mid
    # pick whichever endpoint reproduces p more closely
    return lo if abs(q_function(lo) - p) <= abs(q_function(hi) - p) else hi


def snr(photocurrent: float, noise_var: float) -> float:
    if noise_var < 0:
        raise OpticsDomainError("noise variance must be >= 0")
    if noise_var == 0.0:
        if photocurrent == 0.0:
            return 0.0
        raise ZeroDivisionError("noise-free limit: SNR is unbounded")
    return photocurrent ** 2 / noise_var


def ber(snr_value: float) -> float:
    if snr_value < 0:
        raise OpticsDomainError("SNR must be >= 0")
    return q_function(math.sqrt(snr_value))


def bit_rate(link: OpticalLink, geom: LinkGeometry, target_ber: float) -> float:
    """Highest OOK bit rate meeting ``target_ber`` for ``geom``; 0 outside the FOV."""
    if not 0.0 < target_ber < 0.5:
        raise OpticsDomainError(f"target_ber must lie in (0, 0.5), got {target_ber!r}")
    if not geom.distance > 0:
        raise OpticsDomainError("distance must be > 0")
    i_b = received_photocurrent(link.tx, link.rx, link.water, geom)
    if i_b == 0.0:
        return 0.0
    p_b = link_noise_power(link, geom)
    if p_b == 0.0:
        raise OpticsDomainError("zero background power: bit rate is unbounded")
    q = q_inverse(target_ber)
    return (i_b / q) ** 2 / (2.0 * ELECTRON_CHARGE * link.rx.responsivity * p_b)


def link_budget(link: OpticalLink, geom: LinkGeometry, target_ber: float) -> LinkBudget:
    p_rx = received_power(link.tx, link.rx, link.water, geom)
    i_b = link.rx.responsivity * p_rx
    p_b = link_noise_power(link, geom)
    b = bit_rate(link, geom, target_ber)
    if b > 0:
        var = noise_variance(p_b, link.rx.responsivity, b)
        s = snr(i_b, var)
        e = ber(s)
    else:
        var, s, e = 0.0, 0.0, 0.5
    return LinkBudget(p_rx, i_b, p_b, var, s, e, b)


def bit_rate_array(link: OpticalLink, distance, depth, target_ber: float) -> np.ndarray:
    """Vectorised :func:`bit_rate` for a receiver looking straight down.

    ``distance`` and ``depth`` broadcast together; the incidence angle is
    ``arccos(depth / distance)``.  Points with zero distance give NaN.
    """
    d = np.asarray(distance, dtype=float)
    h = np.asarray(depth, dtype=float)
    d, h = np.broadcast_arrays(d, h)
    m = lambert_mode(link.tx.half_angle)
    rx, water = link.rx, link.water
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_psi = np.clip(h / d, -1.0, 1.0)
        psi = np.arccos(cos_psi)
        in_fov = psi <= rx.fov_half_angle
        gain = rx.refractive_index ** 2 / math.sin(rx.fov_half_angle) ** 2
        a_eff = np.where(in_fov, gain * rx.area * cos_psi, 0.0)
        i_s = link.tx.power_tx * (m + 1.0) / (2.0 * math.pi * d ** 2) * cos_psi ** m
        i_b = rx.responsivity * i_s * a_eff * np.exp(-water.attenuation * d)
        if link.solar_model == "surface":
            p_b = np.full_like(d, surface_noise_power(rx, water, link.tx.filter_bandwidth))
        else:
            irr = water.surface_irradiance * np.exp(-water.attenuation * h)
            extra = 1.0 if link.solar_model == "single" else np.exp(-water.attenuation * h)
            p_b = irr * water.transmittance * link.tx.filter_bandwidth * extra * a_eff
        q = q_inverse(target_ber)
        rate = np.where(in_fov, (i_b / q) ** 2 / (2.0 * ELECTRON_CHARGE * rx.responsivity * p_b), 0.0)
    rate = np.where(d > 0, rate, np.nan)
    return rate
