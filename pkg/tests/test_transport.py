import numpy as np
import pytest

from finslergamma import (Domain, build_space, lp_transport_cost,
                          quantile_transport_cost, transport_cost_sq,
                          wasserstein2)
from finslergamma.transport import _pair_cost_matrix, coarsen_measure

from conftest import asym21, euclid, gauss_interval


def dirac(space, point):
    mu = np.zeros(space.n_nodes)
    mu[space.node_index(point)] = 1.0
    return mu


def test_identity_transport_is_free():
    sp = gauss_interval(asym21(), res=64)
    assert transport_cost_sq(sp, sp.cell_mass, sp.cell_mass) == pytest.approx(0.0, abs=1e-15)
    assert wasserstein2(sp, sp.cell_mass) == pytest.approx(0.0, abs=1e-8)


def test_dirac_asymmetry():
    sp = build_space(Domain("interval", (2.0,), (9,)), asym21(), "0")
    d0, d1 = dirac(sp, [0.0]), dirac(sp, [1.0])
    assert wasserstein2(sp, d0, d1) == pytest.approx(2.0)
    assert wasserstein2(sp, d1, d0) == pytest.approx(1.0)


def test_quantile_matches_lp_oracle_on_32_nodes():
    sp = build_space(Domain("interval", (4.0,), (32,)), asym21(), "x**2/2")
    rng = np.random.default_rng(0)
    x = sp.coords[:, 0]
    for _ in range(5):
        a, b = rng.uniform(0.1, 0.5, size=2)
        mu = (1.0 + a * np.sin(x)) * sp.cell_mass
        mu /= mu.sum()
        nu = (1.0 + b * np.cos(2 * x)) * sp.cell_mass
        nu /= nu.sum()
        quantile = quantile_transport_cost(sp, mu, nu)
        C = _pair_cost_matrix(sp, sp.coords, sp.coords)
        lp = lp_transport_cost(C, mu, nu)
        assert abs(quantile - lp) < 1e-10


def test_quantile_requires_1d_interval():
    circle = build_space(Domain("circle", (1.0,), (32,)), euclid(), "0")
    with pytest.raises(ValueError):
        quantile_transport_cost(circle, circle.cell_mass, circle.cell_mass)


def test_marginal_validation():
    sp = gauss_interval(euclid(), res=32)
    bad = np.ones(sp.n_nodes)  # mass 32, not 1
    with pytest.raises(ValueError):
        quantile_transport_cost(sp, bad, sp.cell_mass)


def test_lp_cap():
    C = np.zeros((80, 80))
    with pytest.raises(ValueError):
        lp_transport_cost(C, np.full(80, 1 / 80), np.full(80, 1 / 80))


def test_coarsen_measure_preserves_mass_and_centroid():
    sp = build_space(Domain("torus", (1.0, 1.0), (16, 16)), euclid(2), "0")
    mu = sp.cell_mass.copy()
    points, weights = coarsen_measure(sp, mu, max_support=64)
    assert len(weights) <= 64
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    mean_fine = mu @ sp.coords
    mean_coarse = weights @ points
    assert np.allclose(mean_fine, mean_coarse, atol=1e-12)


def test_2d_transport_periodic_shift():
    sp = build_space(Domain("torus", (1.0, 1.0), (16, 16)), euclid(2), "0")
    x, y = sp.coords[:, 0], sp.coords[:, 1]
    # a one-cell shift costs at most the shift distance squared
    mu = np.roll(sp.cell_mass.reshape(16, 16), 1, axis=0).reshape(-1)
    cost = transport_cost_sq(sp, mu, sp.cell_mass)
    assert 0.0 <= cost <= (1.0 / 16) ** 2 + 1e-12
