"""PD and nonlinear-PD (NLPD) trajectory tracking for the 3-DOF AUV.

Both laws share the computed-torque structure

    tau = R(rho)^T [M(eta) a_ref + C(nu, eta) v_ref + D(nu, eta) v_ref
                    + K_p(.) eta_err + K_v(.) vel_err]

where the NLPD gains follow a saturated power law of the error magnitude and
the PD law is the constant-gain special case (exponent 1).

The feedforward and feedback are evaluated directly in the body frame:
``R^T M(eta) = M R^T``, ``R^T C(nu, eta) = (C(nu) - M R^T Rdot) R^T`` and
``R^T D(nu, eta) = D(nu) R^T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .vehicle import AuvParams, AuvState, Wrench, world_frame_terms, wrap_angle

AXES = ("x", "y", "rho")
VELOCITY_FRAMES = ("world", "body")


class GainLaw(NamedTuple):
    """``a |e|^(mu - 1)`` above the breakpoint ``b``, ``a b^(mu - 1)`` below."""

    a: float
    b: float = 1.0
    mu: float = 1.0

    def __call__(self, error: float) -> float:
        return gain_value(self.a, self.b, self.mu, error)


def _check_law(law: GainLaw, where: str) -> None:
    if not law.a > 0:
        raise ValueError(f"{where}: a > 0 violated")
    if not law.b > 0:
        raise ValueError(f"{where}: b > 0 violated")
    if not 0.0 <= law.mu <= 1.0:
        raise ValueError(f"{where}: mu in [0, 1] violated")


@dataclass(frozen=True)
class GainSchedule:
    position: tuple[GainLaw, GainLaw, GainLaw]
    velocity: tuple[GainLaw, GainLaw, GainLaw]

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(GainLaw(*g) for g in self.position))
        object.__setattr__(self, "velocity", tuple(GainLaw(*g) for g in self.velocity))
        if len(self.position) != 3 or len(self.velocity) != 3:
            raise ValueError("gain schedule needs one law per axis (x, y, rho)")
        for fam, laws in (("p", self.position), ("v", self.velocity)):
            for axis, law in zip(AXES, laws):
                _check_law(law, f"k_{fam}[{axis}]")

    @classmethod
    def pd(cls, kp: float = 300.0, kv: float = 250.0) -> "GainSchedule":
        return cls((GainLaw(kp),) * 3, (GainLaw(kv),) * 3)

    @classmethod
    def nlpd_default(cls) -> "GainSchedule":
        # translational axes shaped, yaw kept at the PD gains
        p = GainLaw(6000.0, 0.1, 0.5)
        v = GainLaw(500.0, 0.1, 0.5)
        return cls((p, p, GainLaw(300.0)), (v, v, GainLaw(250.0)))

    @property
    def is_linear(self) -> bool:
        return all(g.mu == 1.0 for g in self.position + self.velocity)


def gain_value(a: float, b: float, mu: float, error: float) -> float:
    e = abs(error)
    if e >= b:
        return a * e ** (mu - 1.0)
    return a * b ** (mu - 1.0)


def gain(k_family: str, axis: int | str, error: float, schedule: GainSchedule) -> float:
    """Scheduled gain ``k_p`` or ``k_v`` for one axis."""
    j = AXES.index(axis) if isinstance(axis, str) else axis
    if k_family == "p":
        law = schedule.position[j]
    elif k_family == "v":
        law = schedule.velocity[j]
    else:
        raise ValueError(f"k_family must be 'p' or 'v', got {k_family!r}")
    return gain_value(law.a, law.b, law.mu, error)


class ReferenceState(NamedTuple):
    eta_ref: tuple[float, float, float]
    eta_ref_dot: tuple[float, float, float]
    eta_ref_ddot: tuple[float, float, float]


def ship_reference(t: float, radius: float = 10.0, omega: float = 0.1,
                   yaw_amplitude: float = math.pi / 2) -> ReferenceState:
    """Circling ship: ``(R sin wt, R cos wt, A sin wt)`` with exact derivatives."""
    s, c = math.sin(omega * t), math.cos(omega * t)
    w2 = omega * omega
    return ReferenceState(
        (radius * s, radius * c, yaw_amplitude * s),
        (radius * omega * c, -radius * omega * s, yaw_amplitude * omega * c),
        (-radius * w2 * s, -radius * w2 * c, -yaw_amplitude * w2 * s),
    )


class TrackingError(NamedTuple):
    eta_tilde: tuple[float, float, float]
    nu_tilde: tuple[float, float, float]


def tracking_error(state: AuvState, ref: ReferenceState, frame: str = "world") -> TrackingError:
    """Position error ``eta_ref - eta`` (yaw wrapped) and velocity error.

    With ``frame="world"`` the velocity error is ``eta_ref_dot - R(rho) nu``.
    ``frame="body"`` subtracts the body velocity from the world reference
    velocity componentwise.
    """
    x, y, rho = state.eta
    u, v, r = state.nu
    er, dr, _ = ref
    e = (er[0] - x, er[1] - y, wrap_angle(er[2] - rho))
    if frame == "world":
        c, s = math.cos(rho), math.sin(rho)
        ve = (dr[0] - (c * u - s * v), dr[1] - (s * u + c * v), dr[2] - r)
    elif frame == "body":
        ve = (dr[0] - u, dr[1] - v, dr[2] - r)
    else:
        raise ValueError(f"frame must be one of {VELOCITY_FRAMES}, got {frame!r}")
    return TrackingError(e, ve)


def control_tau(eta, nu, ref: ReferenceState, params: AuvParams,
                schedule: GainSchedule, frame: str = "world") -> tuple[float, float, float]:
    """Scalar-math NLPD law; hot path of the simulator."""
    x, y, rho = eta
    u, v, r = nu
    er, dr, ddr = ref
    c, s = math.cos(rho), math.sin(rho)

    ex = er[0] - x
    ey = er[1] - y
    ep = math.atan2(math.sin(er[2] - rho), math.cos(er[2] - rho))
    if frame == "world":
        vx = dr[0] - (c * u - s * v)
        vy = dr[1] - (s * u + c * v)
    else:
        vx = dr[0] - u
        vy = dr[1] - v
    vp = dr[2] - r

    pl, vl = schedule.position, schedule.velocity
    fx = gain_value(*pl[0], ex) * ex + gain_value(*vl[0], vx) * vx
    fy = gain_value(*pl[1], ey) * ey + gain_value(*vl[1], vy) * vy
    fp = gain_value(*pl[2], ep) * ep + gain_value(*vl[2], vp) * vp

    # reference velocity/acceleration and feedback rotated into the body frame
    a1, a2 = c * ddr[0] + s * ddr[1], -s * ddr[0] + c * ddr[1]
    b1, b2, b3 = c * dr[0] + s * dr[1], -s * dr[0] + c * dr[1], dr[2]
    g1, g2 = c * fx + s * fy, -s * fx + c * fy

    m11, m22, m33 = params.inertia
    d1 = params.d11_lin + params.d11_quad * abs(u)
    d2 = params.d22_lin + params.d22_quad * abs(v)
    d3 = params.d33_lin + params.d33_quad * abs(r)
    # [C(nu) - M R^T Rdot] applied to b; R^T Rdot = r [[0,-1,0],[1,0,0],[0,0,0]]
    k1 = -m22 * v * b3 + m11 * r * b2
    k2 = m11 * u * b3 - m22 * r * b1
    k3 = m22 * v * b1 - m11 * u * b2
    return (m11 * a1 + k1 + d1 * b1 + g1,
            m22 * a2 + k2 + d2 * b2 + g2,
            m33 * ddr[2] + k3 + d3 * b3 + fp)


def make_control_law(params: AuvParams, schedule: GainSchedule, frame: str = "world"):
    """Bind :func:`control_tau` to fixed parameters for the simulation loop.

    The returned ``law(x, y, rho, u, v, r, ref)`` takes ``ref`` as the flat
    9-sequence ``(eta_ref, eta_ref_dot, eta_ref_ddot)``.
    """
    if frame not in VELOCITY_FRAMES:
        raise ValueError(f"frame must be one of {VELOCITY_FRAMES}, got {frame!r}")
    world = frame == "world"
    m11, m22, m33 = params.inertia
    l1, l2, l3 = params.d11_lin, params.d22_lin, params.d33_lin
    q1, q2, q3 = params.d11_quad, params.d22_quad, params.d33_quad
    (pa1, pb1, pm1), (pa2, pb2, pm2), (pa3, pb3, pm3) = [
        (g.a, g.b, g.mu - 1.0) for g in schedule.position]
    (va1, vb1, vm1), (va2, vb2, vm2), (va3, vb3, vm3) = [
        (g.a, g.b, g.mu - 1.0) for g in schedule.velocity]
    cos, sin, atan2 = math.cos, math.sin, math.atan2

    def law(x, y, rho, u, v, r, ref):
        rx, ry, rp, dx, dy, dp, ax, ay, ap = ref
        c, s = cos(rho), sin(rho)
        ex = rx - x
        ey = ry - y
        ep = atan2(sin(rp - rho), cos(rp - rho))
        if world:
            vx = dx - (c * u - s * v)
            vy = dy - (s * u + c * v)
        else:
            vx = dx - u
            vy = dy - v
        vp = dp - r
        e = abs(ex)
        fx = pa1 * (e if e >= pb1 else pb1) ** pm1 * ex
        e = abs(vx)
        fx += va1 * (e if e >= vb1 else vb1) ** vm1 * vx
        e = abs(ey)
        fy = pa2 * (e if e >= pb2 else pb2) ** pm2 * ey
        e = abs(vy)
        fy += va2 * (e if e >= vb2 else vb2) ** vm2 * vy
        e = abs(ep)
        fp = pa3 * (e if e >= pb3 else pb3) ** pm3 * ep
        e = abs(vp)
        fp += va3 * (e if e >= vb3 else vb3) ** vm3 * vp
        b1, b2 = c * dx + s * dy, -s * dx + c * dy
        return (m11 * (c * ax + s * ay) - m22 * v * dp + m11 * r * b2
                + (l1 + q1 * abs(u)) * b1 + c * fx + s * fy,
                m22 * (-s * ax + c * ay) + m11 * u * dp - m22 * r * b1
                + (l2 + q2 * abs(v)) * b2 - s * fx + c * fy,
                m33 * ap + m22 * v * b1 - m11 * u * b2 + (l3 + q3 * abs(r)) * dp + fp)

    return law


def nlpd_tau(state: AuvState, ref: ReferenceState, params: AuvParams,
             schedule: GainSchedule, frame: str = "world") -> Wrench:
    if frame not in VELOCITY_FRAMES:
        raise ValueError(f"frame must be one of {VELOCITY_FRAMES}, got {frame!r}")
    return Wrench(*control_tau(state.eta, state.nu, ref, params, schedule, frame))


def pd_tau(state: AuvState, ref: ReferenceState, params: AuvParams,
           kp: float, kv: float, frame: str = "world") -> Wrench:
    if not (kp > 0 and kv > 0):
        raise ValueError("PD gains must be positive")
    return nlpd_tau(state, ref, params, GainSchedule.pd(kp, kv), frame)


def nlpd_tau_matrix(state: AuvState, ref: ReferenceState, params: AuvParams,
                    schedule: GainSchedule, frame: str = "world") -> Wrench:
    """Same law written with the world-frame matrices; reference path for tests."""
    from .vehicle import rotation

    terms = world_frame_terms(state, params)
    err = tracking_error(state, ref, frame)
    kp = np.diag([gain("p", j, err.eta_tilde[j], schedule) for j in range(3)])
    kv = np.diag([gain("v", j, err.nu_tilde[j], schedule) for j in range(3)])
    dr = np.asarray(ref.eta_ref_dot)
    inner = (terms.M @ np.asarray(ref.eta_ref_ddot) + terms.C @ dr + terms.D @ dr
             + kp @ np.asarray(err.eta_tilde) + kv @ np.asarray(err.nu_tilde))
    return Wrench(*(rotation(state.eta[2]).T @ inner))


def potential(x, a: float, b: float, mu: float):
    """Closed form of ``int_0^x z k(z) dz`` for the saturated power-law gain."""
    x = np.abs(np.asarray(x, dtype=float))
    inner = a * b ** (mu - 1.0) * x * x / 2.0
    outer = a * b ** (mu + 1.0) / 2.0 + a * (x ** (mu + 1.0) - b ** (mu + 1.0)) / (mu + 1.0)
    out = np.where(x <= b, inner, outer)
    return float(out) if out.ndim == 0 else out


def lyapunov_value(error: TrackingError, state: AuvState, params: AuvParams,
                   schedule: GainSchedule) -> float:
    """Kinetic energy of the velocity error plus the gain-induced potential.

    The velocity error must be the world-frame one for the value to be a
    Lyapunov function of the closed loop.
    """
    m = world_frame_terms(state, params).M
    ve = np.asarray(error.nu_tilde)
    v = 0.5 * float(ve @ m @ ve)
    for j, law in enumerate(schedule.position):
        v += potential(error.eta_tilde[j], *law)
    return v


def lyapunov_series(eta_tilde: np.ndarray, nu_tilde: np.ndarray, rho: np.ndarray,
                    params: AuvParams, schedule: GainSchedule) -> np.ndarray:
    """Vectorised :func:`lyapunov_value` over ``(n, 3)`` error arrays."""
    m11, m22, m33 = params.inertia
    c, s = np.cos(rho), np.sin(rho)
    # velocity error in body axes: M(eta) = R M R^T
    b1 = c * nu_tilde[:, 0] + s * nu_tilde[:, 1]
    b2 = -s * nu_tilde[:, 0] + c * nu_tilde[:, 1]
    v = 0.5 * (m11 * b1 ** 2 + m22 * b2 ** 2 + m33 * nu_tilde[:, 2] ** 2)
    for j, law in enumerate(schedule.position):
        v = v + potential(eta_tilde[:, j], *law)
    return v
