"""Closed-loop AUV/ship tracking runs and the link connectivity metrics.

A run samples the ship reference, corrupts the controller's view of the
state with measurement noise, applies the PD or NLPD law, adds the
disturbance pulse, and advances the vehicle with RK4.  Link geometry, cone
containment, bit rate and the Lyapunov value are then evaluated for every
row in one vectorised pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cone import ConeRegion, contains_many, solve_slant_height
from .control import GainSchedule, lyapunov_series, make_control_law
from .optics import OpticalLink, bit_rate_array
from .rng import normals
from .vehicle import AuvParams, DivergenceError, Wrench, make_stepper

DEFAULT_DEPTH = 3.8157  # m; puts the start point (5, 5) at 8.03 m range
CONTROLLER_KINDS = ("pd", "nlpd", "none")  # "none" applies zero thrust


@dataclass(frozen=True)
class DisturbanceSpec:
    start: float = 30.0
    duration: float = 1.0
    wrench: Wrench = Wrench(350.0, 350.0, 350.0)

    def __post_init__(self):
        object.__setattr__(self, "wrench", Wrench(*self.wrench))
        if not self.duration > 0:
            raise ValueError("disturbance: duration > 0 violated")

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class NoiseSpec:
    sigma_pos: float = 0.02
    sigma_yaw: float = 0.005
    sigma_vel: float = 0.02
    seed: int = 20210331

    def __post_init__(self):
        for name in ("sigma_pos", "sigma_yaw", "sigma_vel"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"noise: {name} >= 0 violated")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("noise: seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class ControllerConfig:
    kind: str = "pd"
    schedule: GainSchedule = field(default_factory=GainSchedule.pd)
    velocity_frame: str = "world"

    def __post_init__(self):
        if self.kind not in CONTROLLER_KINDS:
            raise ValueError(f"controller: type must be one of {CONTROLLER_KINDS}, got {self.kind!r}")
        if self.velocity_frame not in ("world", "body"):
            raise ValueError("controller: velocity_frame must be 'world' or 'body'")

    @classmethod
    def pd(cls, kp: float = 300.0, kv: float = 250.0, **kw) -> "ControllerConfig":
        return cls("pd", GainSchedule.pd(kp, kv), **kw)

    @classmethod
    def nlpd(cls, schedule: GainSchedule | None = None, **kw) -> "ControllerConfig":
        return cls("nlpd", schedule or GainSchedule.nlpd_default(), **kw)


@dataclass(frozen=True)
class Scenario:
    name: str = "nominal"
    duration: float = 150.0
    dt: float = 0.005
    initial_eta: tuple[float, float, float] = (5.0, 5.0, 0.0)
    initial_nu: tuple[float, float, float] = (0.0, 0.0, 0.0)
    depth: float = DEFAULT_DEPTH
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    disturbance: Optional[DisturbanceSpec] = None
    noise: Optional[NoiseSpec] = None
    mass_scale: float = 1.0
    vehicle: AuvParams = AuvParams()
    link: OpticalLink = OpticalLink()
    target_ber: float = 1e-4
    min_bit_rate: float = 1e7
    rmse_window: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("scenario: duration > 0 violated")
        if not self.dt > 0:
            raise ValueError("scenario: dt > 0 violated")
        n = self.duration / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError("scenario: duration / dt must be a whole number of steps")
        if not self.depth > 0:
            raise ValueError("scenario: depth > 0 violated")
        if not self.mass_scale > 0:
            raise ValueError("scenario: mass_scale > 0 violated")
        if not 0 < self.target_ber < 0.5:
            raise ValueError("scenario: target_ber in (0, 0.5) violated")
        if not self.min_bit_rate > 0:
            raise ValueError("scenario: min_bit_rate > 0 violated")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass
class Metrics:
    t_a: Optional[float]
    t_b: Optional[float]
    delta_t: Optional[float]
    rmse_x: Optional[float]
    rmse_y: Optional[float]
    rmse_rho: Optional[float]
    rmse_window: Optional[tuple[float, float]]
    max_distance_after_disturbance: Optional[float] = None

    @property
    def established(self) -> bool:
        return self.t_b is not None

    def as_dict(self) -> dict:
        return {
            "t_a": self.t_a, "t_b": self.t_b, "delta_t": self.delta_t,
            "rmse_x": self.rmse_x, "rmse_y": self.rmse_y, "rmse_rho": self.rmse_rho,
            "rmse_window": None if self.rmse_window is None else list(self.rmse_window),
            "max_distance_after_disturbance": self.max_distance_after_disturbance,
            "established": self.established,
        }


COLUMNS = ("t", "x", "y", "rho", "u", "v", "r", "x_ref", "y_ref", "rho_ref",
           "tau1", "tau2", "tau3", "d", "psi", "bit_rate", "inside_cone", "lyapunov_v")


@dataclass
class RunRecord:
    scenario: Scenario
    cone: ConeRegion
    rows: dict
    metrics: Metrics

    def __len__(self) -> int:
        return len(self.rows["t"])


def disturbance_wrench(t: float, spec: Optional[DisturbanceSpec]) -> Wrench:
    """Pulse wrench on the half-open window ``[start, start + duration)``."""
    if spec is not None and spec.start <= t < spec.end:
        return spec.wrench
    return Wrench()


def measurement_noise(spec: Optional[NoiseSpec], n: int) -> np.ndarray:
    """``(n, 6)`` additive noise ``(dx, dy, drho, du, dv, dr)`` for the controller's view.

    Row ``k`` uses normals ``6k .. 6k + 5`` of the seeded stream.
    """
    if spec is None:
        return np.zeros((n, 6))
    z = normals(spec.seed, 6 * n).reshape(n, 6)
    return z * np.array([spec.sigma_pos, spec.sigma_pos, spec.sigma_yaw,
                         spec.sigma_vel, spec.sigma_vel, spec.sigma_vel])


def reference_table(t: np.ndarray, radius: float = 10.0, omega: float = 0.1,
                    yaw_amplitude: float = math.pi / 2) -> np.ndarray:
    """Vectorised ship reference; columns are position, velocity, acceleration."""
    s, c = np.sin(omega * t), np.cos(omega * t)
    w2 = omega * omega
    return np.column_stack([
        radius * s, radius * c, yaw_amplitude * s,
        radius * omega * c, -radius * omega * s, yaw_amplitude * omega * c,
        -radius * w2 * s, -radius * w2 * c, -yaw_amplitude * w2 * s,
    ])


def _open_loop(x, y, rho, u, v, r, ref):
    return (0.0, 0.0, 0.0)


def run(scenario: Scenario) -> RunRecord:
    sc = scenario
    n = sc.steps
    dt = sc.dt
    plant = sc.vehicle.scaled(sc.vehicle.mass_scale * sc.mass_scale)
    # the controller keeps the nominal inertia
    law = make_control_law(sc.vehicle, sc.controller.schedule, sc.controller.velocity_frame)
    if sc.controller.kind == "none":
        law = _open_loop
    advance = make_stepper(plant, dt)
    t = np.arange(n + 1) * dt
    refs = reference_table(t)
    ref_rows = refs.tolist()
    noise = measurement_noise(sc.noise, n + 1).tolist() if sc.noise is not None else None
    dist = sc.disturbance
    if dist is not None:
        k_on = np.flatnonzero((t >= dist.start) & (t < dist.end))
        pulse = (int(k_on[0]), int(k_on[-1])) if k_on.size else (n + 1, -1)
        tw1, tw2, tw3 = dist.wrench
    else:
        pulse = (n + 1, -1)

    state = tuple(float(v) for v in sc.initial_eta) + tuple(float(v) for v in sc.initial_nu)
    states = [state]
    taus = []
    for k in range(n + 1):
        x, y, p, u, v, r = state
        if noise is not None:
            w = noise[k]
            tau = law(x + w[0], y + w[1], p + w[2], u + w[3], v + w[4], r + w[5], ref_rows[k])
        else:
            tau = law(x, y, p, u, v, r, ref_rows[k])
        taus.append(tau)
        if k == n:
            break
        if pulse[0] <= k <= pulse[1]:
            force = (tau[0] + tw1, tau[1] + tw2, tau[2] + tw3)
        else:
            force = tau
        try:
            state = advance(state, force)
        except DivergenceError as exc:
            raise DivergenceError(exc.component, exc.value, float(t[k + 1])) from None
        states.append(state)

    d_c = solve_slant_height(sc.link, sc.target_ber, sc.min_bit_rate)
    cone = ConeRegion((0.0, 0.0, 0.0), sc.link.rx.fov_half_angle, d_c)
    rows = _assemble_rows(sc, cone, t, np.array(states), refs, np.array(taus))
    return RunRecord(sc, cone, rows, compute_metrics(rows, sc))


def _assemble_rows(sc: Scenario, cone: ConeRegion, t, states, refs, taus) -> dict:
    rel = np.column_stack([states[:, 0] - refs[:, 0], states[:, 1] - refs[:, 1],
                           np.full(len(t), sc.depth)])
    inside, d, psi = contains_many(cone, rel)
    rate = bit_rate_array(sc.link, d, sc.depth, sc.target_ber)

    rho = states[:, 2]
    eta_tilde = refs[:, 0:3] - states[:, 0:3]
    eta_tilde[:, 2] = np.arctan2(np.sin(eta_tilde[:, 2]), np.cos(eta_tilde[:, 2]))
    c, s = np.cos(rho), np.sin(rho)
    u, v, r = states[:, 3], states[:, 4], states[:, 5]
    nu_tilde = np.column_stack([refs[:, 3] - (c * u - s * v), refs[:, 4] - (s * u + c * v),
                                refs[:, 5] - r])
    lyap = lyapunov_series(eta_tilde, nu_tilde, rho, sc.vehicle, sc.controller.schedule)

    wrapped = np.arctan2(np.sin(rho), np.cos(rho))
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    return {
        "t": t, "x": states[:, 0], "y": states[:, 1], "rho": wrapped,
        "u": u, "v": v, "r": r,
        "x_ref": refs[:, 0], "y_ref": refs[:, 1], "rho_ref": refs[:, 2],
        "tau1": taus[:, 0], "tau2": taus[:, 1], "tau3": taus[:, 2],
        "d": d, "psi": psi, "bit_rate": rate, "inside_cone": inside, "lyapunov_v": lyap,
        "rho_unwrapped": rho,
    }


# -- metrics -----------------------------------------------------------------

def cone_arrival_time(rows: dict) -> Optional[float]:
    """First time the AUV is inside the cone; ``None`` if it never is."""
    inside = np.asarray(rows["inside_cone"], dtype=bool)
    if inside.size == 0:
        raise ValueError("rows are empty")
    if not inside.any():
        return None
    return float(rows["t"][int(np.argmax(inside))])


def _stay_start(inside: np.ndarray, from_index: int = 0) -> Optional[int]:
    """Index from which ``inside`` holds through the end, searching ``from_index`` on."""
    if not inside[-1]:
        return None
    outside = np.flatnonzero(~inside[from_index:])
    if outside.size == 0:
        return from_index
    return from_index + int(outside[-1]) + 1


def communication_established_time(rows: dict) -> Optional[float]:
    """Earliest time after which the AUV never leaves the cone."""
    inside = np.asarray(rows["inside_cone"], dtype=bool)
    if inside.size == 0:
        raise ValueError("rows are empty")
    k = _stay_start(inside)
    return None if k is None else float(rows["t"][k])


def restoring_time(rows: dict, disturbance_start: float) -> Optional[float]:
    """Time from the first exit at or after the disturbance onset to the final re-entry.

    ``None`` when the AUV does not leave the cone after the onset;
    ``math.inf`` when it leaves and never settles back inside.
    """
    t = np.asarray(rows["t"])
    inside = np.asarray(rows["inside_cone"], dtype=bool)
    if inside.size == 0:
        raise ValueError("rows are empty")
    after = np.flatnonzero((t >= disturbance_start) & ~inside)
    if after.size == 0:
        return None
    k_exit = int(after[0])
    k_back = _stay_start(inside, k_exit)
    if k_back is None:
        return math.inf
    return float(t[k_back] - t[k_exit])


_COMPONENTS = {"x": ("x_ref", "x"), "y": ("y_ref", "y"), "rho": ("rho_ref", "rho")}


def rmse(rows: dict, component: str, window: tuple[float, float]) -> float:
    ref_key, key = _COMPONENTS[component]
    t = np.asarray(rows["t"])
    lo, hi = window
    sel = (t >= lo) & (t <= hi)
    if not sel.any():
        raise ValueError(f"RMSE window {window!r} selects no rows")
    err = np.asarray(rows[ref_key])[sel] - np.asarray(rows[key])[sel]
    if component == "rho":
        err = np.arctan2(np.sin(err), np.cos(err))
    return float(np.sqrt(np.mean(err * err)))


def compute_metrics(rows: dict, scenario: Scenario) -> Metrics:
    t_a = cone_arrival_time(rows)
    t_b = communication_established_time(rows)
    dist = scenario.disturbance
    delta_t = restoring_time(rows, dist.start) if dist is not None else None
    max_d = None
    if dist is not None:
        sel = np.asarray(rows["t"]) >= dist.start
        if sel.any():
            max_d = float(np.max(np.asarray(rows["d"])[sel]))
    window = scenario.rmse_window
    if window is None and t_b is not None:
        window = (t_b, scenario.duration)
    if window is None:
        return Metrics(t_a, t_b, delta_t, None, None, None, None, max_d)
    return Metrics(t_a, t_b, delta_t, rmse(rows, "x", window), rmse(rows, "y", window),
                   rmse(rows, "rho", window), tuple(window), max_d)
