import math

import numpy as np
import pytest

from finslergamma import (FlowParams, FlowSolverError, check_dEdt_identity,
                          decay_rates, evolve, integrate, observables,
                          operators_for, step)
from finslergamma.heatflow import RATE_SENTINEL

from conftest import asym21, euclid, gauss_interval, uniform_circle


def test_constant_is_fixed_point():
    sp = gauss_interval(asym21(), res=96)
    ops = operators_for(sp)
    u = np.full(sp.n_nodes, 1.7)
    assert np.allclose(step(ops, u, 0.1), u, atol=1e-13)
    states = evolve(ops, u, FlowParams(tau=0.05, t_end=0.5))
    assert all(s.energy < 1e-30 and abs(s.variance) < 1e-14 for s in states)


def test_mass_conservation():
    sp = gauss_interval(asym21(), res=96)
    ops = operators_for(sp)
    rng = np.random.default_rng(0)
    u = 1.0 + 0.3 * rng.standard_normal(sp.n_nodes)
    m0 = integrate(sp, u)
    for _ in range(100):
        u = step(ops, u, 1e-3)
    assert abs(integrate(sp, u) - m0) < 1e-12


def test_fourier_mode_amplitude_oracle():
    sp = uniform_circle(euclid(), res=128)
    ops = operators_for(sp)
    x = sp.coords[:, 0]
    u0 = 1.0 + 0.1 * np.cos(2 * np.pi * x)
    states = evolve(ops, u0, FlowParams(tau=1e-4, t_end=0.01, stride=10))
    amplitude = 2.0 * integrate(sp, states[-1].u * np.cos(2 * np.pi * x))
    assert amplitude == pytest.approx(0.1 * math.exp(-4 * math.pi**2 * 0.01), rel=0.01)


def test_variance_nonincreasing_and_energy_monotone():
    for norm in (euclid(), asym21()):
        sp = gauss_interval(norm, res=96)
        ops = operators_for(sp)
        rng = np.random.default_rng(1)
        u0 = 1.0 + 0.5 * rng.standard_normal(sp.n_nodes)
        states = evolve(ops, u0, FlowParams(tau=2e-3, t_end=0.1))
        var = [s.variance for s in states]
        en = [s.energy for s in states]
        assert all(b <= a + 1e-12 for a, b in zip(var, var[1:]))
        assert all(b <= a + 1e-12 * (1 + a) for a, b in zip(en, en[1:]))
        assert states[-1].variance <= states[0].variance


def test_comparison_principle():
    for norm in (euclid(), asym21()):
        sp = gauss_interval(norm, res=96)
        ops = operators_for(sp)
        x = sp.coords[:, 0]
        u0 = 1.0 + 0.2 * np.sin(3 * x)
        states = evolve(ops, u0, FlowParams(tau=5e-3, t_end=0.25, stride=5))
        lo, hi = u0.min(), u0.max()
        for s in states:
            assert s.u.min() >= lo - 1e-8
            assert s.u.max() <= hi + 1e-8


def test_ergodicity_on_positively_curved_space():
    sp = gauss_interval(euclid(), res=96)
    ops = operators_for(sp)
    x = sp.coords[:, 0]
    u0 = 1.0 + 0.3 * np.sin(2 * x)
    mean = integrate(sp, u0)
    states = evolve(ops, u0, FlowParams(tau=2e-2, t_end=16.0, stride=20))
    dev = states[-1].u - mean
    assert math.sqrt(integrate(sp, dev * dev)) < 1e-6


def test_decay_rates_sentinel_and_validation():
    sp = gauss_interval(euclid(), res=96)
    ops = operators_for(sp)
    states = evolve(ops, np.ones(sp.n_nodes), FlowParams(tau=1e-2, t_end=0.2))
    rates = decay_rates(states)
    assert rates["variance_rate"] == RATE_SENTINEL
    assert rates["entropy_rate"] == RATE_SENTINEL
    with pytest.raises(ValueError):
        decay_rates(states[:5])


def test_linear_circle_variance_rate():
    sp = uniform_circle(euclid(), res=128)
    ops = operators_for(sp)
    x = sp.coords[:, 0]
    u0 = 1.0 + 0.1 * np.cos(2 * np.pi * x)
    states = evolve(ops, u0, FlowParams(tau=5e-5, t_end=0.02, stride=4))
    rates = decay_rates(states)
    assert rates["variance_rate"] == pytest.approx(2 * (2 * np.pi) ** 2, rel=0.02)


def test_gaussian_rates_beat_curvature_bound():
    # K = 1 (Euclidean) and K = 0.25 (two-slope) at N = infinity
    for norm, K in ((euclid(), 1.0), (asym21(), 0.25)):
        sp = gauss_interval(norm, res=128)
        ops = operators_for(sp)
        x = sp.coords[:, 0]
        var_x = integrate(sp, x * x) - integrate(sp, x) ** 2
        u0 = 1.0 + 0.1 * x / math.sqrt(var_x)
        states = evolve(ops, u0, FlowParams(tau=4e-3, t_end=1.6, stride=8))
        rates = decay_rates(states)
        assert rates["variance_rate"] >= 2 * K * 0.95
        assert rates["entropy_rate"] >= 2 * K * 0.95


def test_dEdt_identity_stationary_and_convergence():
    sp = uniform_circle(euclid(), res=64)
    ops = operators_for(sp)
    states = evolve(ops, np.full(64, 2.0), FlowParams(tau=1e-3, t_end=5e-3))
    assert check_dEdt_identity(ops, states).residual == 0.0

    for norm in (euclid(), asym21()):
        residuals = []
        for res in (128, 256):
            spc = uniform_circle(norm, res=res)
            opsc = operators_for(spc)
            x = spc.coords[:, 0]
            u0 = 1.0 + 0.1 * np.sin(2 * np.pi * x)
            tau = 0.2 * spc.h[0]  # halving h halves tau
            states = evolve(opsc, u0, FlowParams(tau=tau, t_end=5 * tau, tol=1e-13))
            residuals.append(check_dEdt_identity(opsc, states[-2:]).residual)
        assert residuals[0] / residuals[1] >= 1.8


def test_dEdt_reports_gradient_zero_band_separately():
    spc = uniform_circle(asym21(), res=128)
    ops = operators_for(spc)
    x = spc.coords[:, 0]
    u0 = 1.0 + 0.1 * np.sin(2 * np.pi * x)
    tau = 0.05 * spc.h[0] ** 2
    states = evolve(ops, u0, FlowParams(tau=tau, t_end=5 * tau, tol=1e-13))
    rep = check_dEdt_identity(ops, states[-2:])
    assert rep.excluded_nodes > 0
    assert rep.residual <= rep.residual_unmasked


def test_solver_failure_is_reported():
    sp = gauss_interval(asym21(), res=96)
    ops = operators_for(sp)
    u = 1.0 + 0.3 * np.sin(sp.coords[:, 0])
    with pytest.raises(FlowSolverError) as err:
        step(ops, u, 1.0, tol=1e-300, max_iter=3)
    assert err.value.residual > 0


def test_observables_flag_nonpositive_data():
    sp = gauss_interval(euclid(), res=96)
    ops = operators_for(sp)
    state = observables(ops, 0.0, sp.coords[:, 0])  # sign-changing
    assert math.isnan(state.entropy) and math.isnan(state.fisher)
    state = observables(ops, 0.0, 1.0 + 0.1 * sp.coords[:, 0] ** 2)
    assert np.isfinite(state.entropy) and np.isfinite(state.fisher)


def test_randers_2d_flow_smoke():
    from finslergamma import Domain, RandersNorm, build_space

    norm = RandersNorm(np.eye(2), (0.5, 0.0))
    sp = build_space(Domain("torus", (1.0, 1.0), (16, 16)), norm, "0")
    ops = operators_for(sp)
    x, y = sp.coords[:, 0], sp.coords[:, 1]
    u0 = 1.0 + 0.1 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
    states = evolve(ops, u0, FlowParams(tau=1e-3, t_end=1e-2, stride=2))
    assert states[-1].variance < states[0].variance
    assert abs(integrate(sp, states[-1].u) - integrate(sp, states[0].u)) < 1e-12
