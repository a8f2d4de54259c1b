import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqkernel import AdaptiveGrid, adaptive_estimate, build_grid, lambda_star, level_estimates, select_index
from seqkernel.adaptive import check_grid_windows
from seqkernel.errors import DomainError, ValidationError
from seqkernel.process import ModelConfig, NoiseSpec, demo_function, simulate_path

Z0 = 1.0 / math.sqrt(2.0)


def test_lambda_star_on_unit_range():
    # 4 sqrt(2) sqrt(1/15) = 4 sqrt(2/15)
    assert lambda_star(1.0, 2.0) == pytest.approx(4 * math.sqrt(2 / 15), rel=1e-14)
    assert lambda_star(1.0, 2.0) == pytest.approx(1.460593486680443, rel=1e-12)


def test_lambda_star_simulation_range():
    assert lambda_star(1.6, 1.8) == pytest.approx(4 * math.sqrt(2) * math.sqrt(0.2 / (4.2 * 4.6)), rel=1e-14)
    assert lambda_star(1.6, 1.8) == pytest.approx(0.5753, abs=5e-4)


def test_grid_n_20000():
    g = build_grid(20_000)
    assert g.d_n == pytest.approx(2019.4906, rel=1e-6)
    assert g.m == 8 and len(g.betas) == 9
    assert g.betas[0] == 1.6 and g.betas[-1] == pytest.approx(1.8)
    assert all(a == pytest.approx(b - 1) for a, b in zip(g.alphas, g.betas))
    assert g.lambda_check == pytest.approx(1.05 * g.lambda_star)


@pytest.mark.parametrize("n", [3, 100, 1000, 10**4, 10**6])
def test_grid_monotone(n):
    g = build_grid(n)
    assert np.all(np.diff(g.h_checks) > 0)
    assert np.all(np.diff(g.N_values) > 0)
    assert g.m == math.floor(math.log(n / math.log(n))) + 1


@pytest.mark.parametrize("kwargs", [dict(beta_low=1.8, beta_high=1.6), dict(beta_low=0.5),
                                    dict(lambda_factor=1.0), dict(n=2)])
def test_grid_rejects(kwargs):
    args = dict(n=1000) | kwargs
    with pytest.raises(ValidationError):
        build_grid(**args)


def test_select_all_equal_picks_largest_bandwidth():
    g = build_grid(20_000)
    k, om = select_index([0.3] * (g.m + 1), g)
    assert k == g.m
    # the max over j <= k of -lambda / N_j is attained at j = k
    assert om == pytest.approx([-g.lambda_check / N for N in g.N_values], rel=1e-14)


def test_select_jump_case():
    g = AdaptiveGrid.from_betas(10_000, (1.6, 1.7, 1.8), lambda_check=0.6)
    N0, N1 = g.N_values[:2]
    k, om = select_index([0.0, 10.0, 0.0], g)
    assert om[0] == -0.6 / N0
    assert om[1] == 10.0 - 0.6 / N0
    assert om[2] == 10.0 - 0.6 / N1
    assert k == 0


def test_select_single_level():
    g = AdaptiveGrid.from_betas(10_000, (1.7,), lambda_check=0.6)
    assert select_index([0.42], g)[0] == 0
    with pytest.raises(ValidationError):
        select_index([0.1, 0.2], g)


@settings(max_examples=300)
@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9))
def test_selector_total(est):
    g = build_grid(20_000)
    k, om = select_index(est, g)
    slack = g.lambda_check / np.asarray(g.N_values)
    assert om[0] <= slack[0]
    assert om[k] <= slack[k]
    assert all(om[j] > slack[j] for j in range(k + 1, g.m + 1))


def test_noiseless_constant_every_level(constant_noiseless_path):
    path = constant_noiseless_path(0.9, n=200, y0=1e100)
    g = build_grid(200)
    levels = level_estimates(path, 0.5, g)
    assert all(r.hit and r.estimate == pytest.approx(0.9, rel=1e-12) for r in levels)
    res = adaptive_estimate(path, 0.5, g)
    assert res.k_selected == g.m and res.estimate == pytest.approx(0.9, rel=1e-12)


def test_duplicate_level_leaves_estimate_unchanged():
    n = 10_000
    base = build_grid(n)
    betas = list(base.betas)
    for seed in range(15):
        path = simulate_path(ModelConfig(n, demo_function(0.7), NoiseSpec(), seed))
        a = adaptive_estimate(path, Z0, AdaptiveGrid.from_betas(n, betas, base.lambda_check))
        dup = betas[:3] + [betas[2]] + betas[3:]
        b = adaptive_estimate(path, Z0, AdaptiveGrid.from_betas(n, dup, base.lambda_check))
        assert a.estimate == b.estimate


def test_deterministic():
    g = build_grid(10_000)
    cfg = ModelConfig(10_000, demo_function(0.7), NoiseSpec(), seed=7)
    a = adaptive_estimate(simulate_path(cfg), Z0, g)
    b = adaptive_estimate(simulate_path(cfg), Z0, g)
    assert a == b
    assert [r.estimate for r in a.per_level] == [r.estimate for r in b.per_level]


def test_invalid_level_window_is_named():
    g = build_grid(1000)
    with pytest.raises(DomainError, match="grid level 0"):
        check_grid_windows(g, Z0)
    path = simulate_path(ModelConfig(1000, demo_function(0.7), NoiseSpec(), 0))
    with pytest.raises(DomainError, match="grid level"):
        adaptive_estimate(path, Z0, g)
    with pytest.raises(ValidationError):
        level_estimates(path, Z0, build_grid(2000))
