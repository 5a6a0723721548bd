"""Three-DOF horizontal-plane AUV model.

Body-frame rigid-body dynamics with diagonal inertia, Coriolis/centripetal
coupling and linear-plus-quadratic damping, the yaw kinematic transform to
the earth-fixed frame, the equivalent earth-fixed formulation, and a fixed
step RK4 integrator.

State layout used throughout: ``eta = (x, y, rho)`` in the world frame and
``nu = (u, v, r)`` in the body frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np


class DivergenceError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, component: str, value: float, t: float | None = None):
        self.component = component
        self.value = value
        self.t = t
        where = "" if t is None else f" at t = {t!r} s"
        super().__init__(f"state component {component!r} became {value!r}{where}")


class Wrench(NamedTuple):
    surge: float = 0.0
    sway: float = 0.0
    yaw: float = 0.0


ZERO_WRENCH = Wrench()


@dataclass(frozen=True)
class AuvParams:
    m11: float = 100.0
    m22: float = 250.0
    m33: float = 80.0
    d11_lin: float = 70.0
    d22_lin: float = 100.0
    d33_lin: float = 50.0
    d11_quad: float = 100.0
    d22_quad: float = 200.0
    d33_quad: float = 100.0
    mass_scale: float = 1.0

    def __post_init__(self):
        for name in ("m11", "m22", "m33"):
            if not getattr(self, name) > 0:
                raise ValueError(f"vehicle: {name} > 0 violated")
        for name in ("d11_lin", "d22_lin", "d33_lin", "d11_quad", "d22_quad", "d33_quad"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"vehicle: {name} >= 0 violated")
        if not self.mass_scale > 0:
            raise ValueError("vehicle: mass_scale > 0 violated")

    @property
    def inertia(self) -> tuple[float, float, float]:
        s = self.mass_scale
        return (self.m11 * s, self.m22 * s, self.m33 * s)

    def scaled(self, mass_scale: float) -> "AuvParams":
        return replace(self, mass_scale=mass_scale)


@dataclass(frozen=True)
class AuvState:
    eta: tuple[float, float, float] = (0.0, 0.0, 0.0)
    nu: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(float(v) for v in self.eta))
        object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))

    def wrapped(self) -> "AuvState":
        x, y, rho = self.eta
        return AuvState((x, y, wrap_angle(rho)), self.nu)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.atan2(math.sin(a), math.cos(a))
    return math.pi if w == -math.pi else w


def inertia_matrix(params: AuvParams) -> np.ndarray:
    return np.diag(params.inertia)


def coriolis_matrix(nu, params: AuvParams) -> np.ndarray:
    u, v, _ = nu
    m11, m22, _ = params.inertia
    return np.array([
        [0.0, 0.0, -m22 * v],
        [0.0, 0.0, m11 * u],
        [m22 * v, -m11 * u, 0.0],
    ])


def damping_coefficients(nu, params: AuvParams) -> tuple[float, float, float]:
    u, v, r = nu
    return (params.d11_lin + params.d11_quad * abs(u),
            params.d22_lin + params.d22_quad * abs(v),
            params.d33_lin + params.d33_quad * abs(r))


def damping_matrix(nu, params: AuvParams) -> np.ndarray:
    return np.diag(damping_coefficients(nu, params))


def rotation(rho: float) -> np.ndarray:
    c, s = math.cos(rho), math.sin(rho)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_rate(rho: float, r: float) -> np.ndarray:
    """Time derivative of :func:`rotation` for yaw rate ``r``."""
    c, s = math.cos(rho), math.sin(rho)
    return r * np.array([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]])


def world_kinematics(state: AuvState) -> np.ndarray:
    return rotation(state.eta[2]) @ np.asarray(state.nu)


def body_acceleration(state: AuvState, params: AuvParams, tau=ZERO_WRENCH,
                      tau_w=ZERO_WRENCH) -> tuple[float, float, float]:
    """``M^-1 (tau + tau_w - C(nu) nu - D(nu) nu)``; restoring forces are zero."""
    return _nu_dot(*state.nu, tau[0] + tau_w[0], tau[1] + tau_w[1], tau[2] + tau_w[2], params)


class WorldTerms(NamedTuple):
    M: np.ndarray
    C: np.ndarray
    D: np.ndarray


def world_frame_terms(state: AuvState, params: AuvParams) -> WorldTerms:
    """Inertia, Coriolis and damping matrices expressed in the world frame."""
    rho = state.eta[2]
    R = rotation(rho)
    Rinv = R.T
    Rdot = rotation_rate(rho, state.nu[2])
    M = inertia_matrix(params)
    M_eta = Rinv.T @ M @ Rinv
    C_eta = Rinv.T @ (coriolis_matrix(state.nu, params) - M @ Rinv @ Rdot) @ Rinv
    D_eta = Rinv.T @ damping_matrix(state.nu, params) @ Rinv
    return WorldTerms(M_eta, C_eta, D_eta)


def world_acceleration(eta, eta_dot, params: AuvParams, tau=ZERO_WRENCH,
                       tau_w=ZERO_WRENCH) -> np.ndarray:
    """Earth-fixed form ``M(eta) eta_ddot = R (tau + tau_w) - (C + D)(nu, eta) eta_dot``."""
    R = rotation(eta[2])
    nu = R.T @ np.asarray(eta_dot, dtype=float)
    terms = world_frame_terms(AuvState(eta, nu), params)
    force = R @ (np.asarray(tau, dtype=float) + np.asarray(tau_w, dtype=float))
    rhs = force - (terms.C + terms.D) @ np.asarray(eta_dot, dtype=float)
    return np.linalg.solve(terms.M, rhs)


def _nu_dot(u, v, r, f1, f2, f3, params):
    m11, m22, m33 = params.inertia
    d1 = params.d11_lin + params.d11_quad * abs(u)
    d2 = params.d22_lin + params.d22_quad * abs(v)
    d3 = params.d33_lin + params.d33_quad * abs(r)
    # C(nu) nu, expanded
    c1 = -m22 * v * r
    c2 = m11 * u * r
    c3 = m22 * v * u - m11 * u * v
    return ((f1 - c1 - d1 * u) / m11,
            (f2 - c2 - d2 * v) / m22,
            (f3 - c3 - d3 * r) / m33)


_NAMES = ("x", "y", "rho", "u", "v", "r")


def make_stepper(params: AuvParams, dt: float):
    """Return ``advance(s, force)`` performing one RK4 step of size ``dt``.

    ``s`` is the flat state ``(x, y, rho, u, v, r)`` and ``force`` the total
    body wrench, held constant over the step.  Coefficients are bound once so
    the closure does no attribute lookups.
    """
    m11, m22, m33 = params.inertia
    a1, a2, a3 = params.d11_lin, params.d22_lin, params.d33_lin
    q1, q2, q3 = params.d11_quad, params.d22_quad, params.d33_quad
    cos, sin = math.cos, math.sin
    h = 0.5 * dt
    w = dt / 6.0

    def deriv(p, u, v, r, f1, f2, f3):
        c, s = cos(p), sin(p)
        return (c * u - s * v, s * u + c * v, r,
                (f1 + m22 * v * r - (a1 + q1 * (u if u >= 0 else -u)) * u) / m11,
                (f2 - m11 * u * r - (a2 + q2 * (v if v >= 0 else -v)) * v) / m22,
                (f3 - (m22 - m11) * u * v - (a3 + q3 * (r if r >= 0 else -r)) * r) / m33)

    def advance(s, force):
        x, y, p, u, v, r = s
        f1, f2, f3 = force
        k1 = deriv(p, u, v, r, f1, f2, f3)
        k2 = deriv(p + h * k1[2], u + h * k1[3], v + h * k1[4], r + h * k1[5], f1, f2, f3)
        k3 = deriv(p + h * k2[2], u + h * k2[3], v + h * k2[4], r + h * k2[5], f1, f2, f3)
        k4 = deriv(p + dt * k3[2], u + dt * k3[3], v + dt * k3[4], r + dt * k3[5], f1, f2, f3)
        out = (x + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
               y + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
               p + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
               u + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
               v + w * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4]),
               r + w * (k1[5] + 2.0 * k2[5] + 2.0 * k3[5] + k4[5]))
        if not math.isfinite(out[0] + out[1] + out[2] + out[3] + out[4] + out[5]):
            for name, val in zip(_NAMES, out):
                if not math.isfinite(val):
                    raise DivergenceError(name, val)
        return out

    return advance


def rk4_step(s, force, dt, params):
    """One RK4 step on the flat state ``(x, y, rho, u, v, r)``."""
    return make_stepper(params, dt)(s, force)


def step(state: AuvState, params: AuvParams, tau=ZERO_WRENCH, tau_w=ZERO_WRENCH,
         dt: float = 0.005) -> AuvState:
    """Advance ``state`` by ``dt`` with classical RK4 (zero-order-hold forces)."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    force = (tau[0] + tau_w[0], tau[1] + tau_w[1], tau[2] + tau_w[2])
    s = rk4_step(state.eta + state.nu, force, dt, params)
    return AuvState(s[:3], s[3:])
