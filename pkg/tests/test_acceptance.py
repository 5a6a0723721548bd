"""Acceptance suite: one check per criterion, one PASS/FAIL line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
import pytest

from uwoc_track.config import preset
from uwoc_track.cone import solve_slant_height
from uwoc_track.export import timeseries_text
from uwoc_track.optics import (LinkGeometry, OpticalLink, ber, bit_rate, link_noise_power,
                               noise_variance, q_function, q_inverse, received_photocurrent, snr)
from uwoc_track.sim import DEFAULT_DEPTH, run
from uwoc_track.vehicle import AuvParams, AuvState, coriolis_matrix, make_stepper, world_frame_terms

RESULTS: dict[int, tuple[bool, str]] = {}

REFERENCE_RMSE_PD = (0.4583, 0.4557)


@lru_cache(maxsize=None)
def record(name: str, controller: str):
    cfg = preset(name).with_values(controller__type=controller)
    t0 = time.perf_counter()
    rec = run(cfg.scenario)
    return rec, time.perf_counter() - t0


def improvement(pd, nlpd, key):
    a, b = getattr(pd.metrics, key), getattr(nlpd.metrics, key)
    return (a - b) / a


def report(n: int, ok: bool, detail: str) -> bool:
    RESULTS[n] = (ok, detail)
    return ok


# -- criteria ----------------------------------------------------------------

def criterion_1():
    link = OpticalLink()
    times = []
    for _ in range(5):
        t0 = time.perf_counter()
        d_c = solve_slant_height(link, 1e-4, 1e7)
        times.append(time.perf_counter() - t0)
    c30 = math.cos(math.radians(30.0))
    h_c = d_c * c30
    lo, hi = 4.2 * c30, 4.6 * c30
    ok = 4.2 <= d_c <= 4.6 and lo <= h_c <= hi and lo <= DEFAULT_DEPTH <= hi and max(times) < 0.01
    return report(1, ok, f"d_C = {d_c:.5f} m, h_C = {h_c:.5f} m (band [{lo:.4f}, {hi:.4f}] "
                         f"holds 3.8157), solve {1e3 * max(times):.2f} ms")


def criterion_2():
    rec, _ = record("nominal", "pd")
    text = timeseries_text(rec)
    header, first = text.split("\n")[:2]
    d0 = float(first.split(",")[header.split(",").index("d")])
    return report(2, abs(d0 - 8.03) <= 0.02, f"first-row d = {d0:.4f} m")


def criterion_3():
    rec, _ = record("nominal", "pd")
    m, rows = rec.metrics, rec.rows
    after = rows["t"] > m.t_b
    with np.errstate(divide="ignore"):
        log_rate = np.log10(rows["bit_rate"][after])
    ok = (m.t_a is not None and 1.5 <= m.t_a <= 2.6
          and bool(np.all(rows["d"][after] < rec.cone.slant_height))
          and bool(np.all(log_rate >= 7.0)))
    rmse_hit = all(abs(got - want) <= 0.3 * want
                   for got, want in zip((m.rmse_x, m.rmse_y), REFERENCE_RMSE_PD))
    note = "within" if rmse_hit else "documented miss vs"
    return report(3, ok, f"t_a = {m.t_a:.3f} s, t_b = {m.t_b:.3f} s, max d after t_b = "
                         f"{rows['d'][after].max():.4f} m, min log10 B = {log_rate.min():.3f}; "
                         f"RMSE x/y = {m.rmse_x:.4f}/{m.rmse_y:.4f} ({note} "
                         f"{REFERENCE_RMSE_PD[0]}/{REFERENCE_RMSE_PD[1]} +-30%)")


def criterion_4():
    pd, _ = record("nominal", "pd")
    nl, _ = record("nominal", "nlpd")
    ix, iy = improvement(pd, nl, "rmse_x"), improvement(pd, nl, "rmse_y")
    return report(4, ix >= 0.5 and iy >= 0.5,
                  f"RMSE improvement x = {100 * ix:.2f}%, y = {100 * iy:.2f}% (need >= 50%)")


def _robustness(n: int, name: str):
    try:
        pd, _ = record(name, "pd")
        nl, _ = record(name, "nlpd")
    except Exception as exc:  # divergence or anything else is a failure
        return report(n, False, f"run failed: {exc}")
    dt_pd = pd.metrics.delta_t
    exits = dt_pd is not None and math.isfinite(dt_pd) and 0.3 <= dt_pd <= 2.5
    d_pd = pd.metrics.max_distance_after_disturbance
    d_nl = nl.metrics.max_distance_after_disturbance
    ix, iy = improvement(pd, nl, "rmse_x"), improvement(pd, nl, "rmse_y")
    ok = exits and d_nl < d_pd and ix >= 0.25 and iy >= 0.25
    dt_txt = "no exit" if dt_pd is None else f"{dt_pd:.3f} s"
    return report(n, ok, f"PD delta_t = {dt_txt} (need exit, [0.3, 2.5] s; max d {d_pd:.4f} m "
                         f"vs d_C {pd.cone.slant_height:.4f} m); NLPD max d {d_nl:.4f} m "
                         f"< PD; improvement x = {100 * ix:.2f}%, y = {100 * iy:.2f}%")


def criterion_5():
    return _robustness(5, "case1")


def criterion_6():
    return _robustness(6, "case2")


def criterion_7():
    rec, _ = record("nominal", "nlpd")
    v = rec.rows["lyapunov_v"]
    t = rec.rows["t"]
    rise = np.diff(v)
    allowed = 1e-6 * (1.0 + v[:-1])
    worst = float(np.max(rise - allowed))
    k20 = int(np.searchsorted(t, 20.0))
    drop = 1.0 - v[k20] / v[0]
    ok = worst <= 0.0 and drop > 0.99
    return report(7, ok, f"V0 = {v[0]:.1f}, {int(np.sum(rise > allowed))} steps above tolerance, "
                         f"decrease by 20 s = {100 * drop:.6f}%")


def _world_inertia_mp(rho, m):
    c, s = mpmath.cos(rho), mpmath.sin(rho)
    r = mpmath.matrix([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    return r * mpmath.diag(m) * r.T


def criterion_8():
    rng = np.random.default_rng(8)
    p = AuvParams()
    exact = True
    for nu in rng.uniform(-5, 5, size=(1000, 3)):
        c = coriolis_matrix(nu, p)
        f = [Fraction(x) for x in nu]
        exact &= sum(f[i] * Fraction(c[i, j]) * f[j] for i in range(3) for j in range(3)) == 0
    worst = 0.0
    # 50-digit central difference: truncation and cancellation both far below 1e-10
    with mpmath.workdps(50):
        h = mpmath.mpf("1e-20")
        for row in rng.uniform(-3, 3, size=(100, 6)):
            eta, nu = tuple(row[:3]), tuple(row[3:])
            rho, r = mpmath.mpf(eta[2]), mpmath.mpf(nu[2])
            m_dot = (_world_inertia_mp(rho + h * r, p.inertia)
                     - _world_inertia_mp(rho - h * r, p.inertia)) / (2 * h)
            c_eta = world_frame_terms(AuvState(eta, nu), p).C
            s = np.array([[float(m_dot[i, j]) / 2 - c_eta[i, j] for j in range(3)]
                          for i in range(3)])
            worst = max(worst, float(np.max(np.abs(s + s.T))))
    return report(8, exact and worst <= 1e-10,
                  f"nu^T C nu == 0 exactly for 1000 draws: {exact}; "
                  f"max |S + S^T| = {worst:.2e} (need <= 1e-10)")


def criterion_9():
    rng = np.random.default_rng(9)
    link = OpticalLink()
    worst = 0.0
    for _ in range(100):
        d = rng.uniform(0.5, 20.0)
        psi = rng.uniform(0.0, link.rx.fov_half_angle)
        target = 10.0 ** rng.uniform(-12, -2)
        g = LinkGeometry(d, psi, d * math.cos(psi))
        b = bit_rate(link, g, target)
        var = noise_variance(link_noise_power(link, g), link.rx.responsivity, b)
        e = ber(snr(received_photocurrent(link.tx, link.rx, link.water, g), var))
        worst = max(worst, abs(e - target) / target)
    xs = np.linspace(0.0, 8.0, 4001)
    q_err = max(abs(q_inverse(q_function(x)) - x) for x in xs)
    return report(9, worst <= 1e-9 and q_err <= 1e-9,
                  f"max BER rel error = {worst:.2e}; max |Qinv(Q(x)) - x| = {q_err:.2e}")


def criterion_10():
    p = AuvParams()
    s0 = (0.0, 0.0, 0.2, 1.0, 0.6, 0.4)
    force = (200.0, 100.0, 100.0)

    def integrate(dt, total=5.0):
        adv = make_stepper(p, dt)
        s = s0
        for _ in range(int(round(total / dt))):
            s = adv(s, force)
        return np.array(s)

    ref = integrate(0.000625)
    ratio = np.linalg.norm(integrate(0.005) - ref) / np.linalg.norm(integrate(0.0025) - ref)
    return report(10, 12.0 <= ratio <= 20.0, f"error ratio = {ratio:.3f} (need [12, 20])")


def criterion_11():
    cfg = preset("case1")
    texts, times = [], []
    for _ in range(2):
        t0 = time.perf_counter()
        rec = run(cfg.scenario)
        times.append(time.perf_counter() - t0)
        texts.append(timeseries_text(rec).encode())
    same = texts[0] == texts[1]
    return report(11, same and max(times) < 1.0,
                  f"CSV byte-identical: {same}; run times {times[0]:.3f} s, {times[1]:.3f} s "
                  f"(need < 1 s)")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


def line(n: int) -> str:
    ok, detail = RESULTS[n]
    return f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}"


@pytest.mark.parametrize("n", range(1, 12))
def test_criterion(n):
    ok = CRITERIA[n - 1]()
    print(line(n))
    assert ok, line(n)


if __name__ == "__main__":
    failed = 0
    for i, check in enumerate(CRITERIA, 1):
        failed += not check()
        print(line(i), flush=True)
    sys.exit(1 if failed else 0)
