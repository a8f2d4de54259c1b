"""End-to-end acceptance checks against the published risk tables.

Full scale by default (M = 30000, tolerance max(3 se, 15%), a few
minutes on one core); ``SEQKERNEL_DESK=1`` switches to the desk-scale
fallback M = 3000 with tolerance max(3 se, 20%).
``SEQKERNEL_THREADS`` sets the worker count.  Each test prints one
PASS/FAIL line, collected again in the terminal summary.
"""

import math
import os

import numpy as np
import pytest

from seqkernel import (PUBLISHED_RISKS, ModelConfig, NoiseSpec, bandwidth, build_grid, constant_function,
                       demo_function, estimate_at, make_window, nonsequential_baseline, preset, run_risk,
                       select_index, simulate_path, zeta_diagnostics)
from seqkernel.adaptive import adaptive_estimate
from seqkernel.cli import render, risk_rows
from seqkernel.process import Path

from conftest import ACCEPTANCE_LINES

FULL = os.environ.get("SEQKERNEL_DESK", "") in ("", "0")
M = 30_000 if FULL else 3_000
REL = 0.15 if FULL else 0.20
EPS_SWEEP = (0.05, 0.1, 0.2, 0.3)
N_VALUES = (1000, 5000, 10000, 20000)

pytestmark = pytest.mark.slow


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def cells(table, published, rel):
    """Per-cell (n, risk, target, tolerance, ok); a missing row is a failed cell."""
    out = []
    for n, target in zip(N_VALUES, published):
        try:
            row = table.row(n)
        except KeyError:
            out.append((n, math.nan, target, math.nan, False))
            continue
        tol = max(3 * row.std_error, rel * target)
        out.append((n, row.risk, target, tol, abs(row.risk - target) <= tol))
    return out


def fmt(cs):
    return "; ".join(f"n={n}: {r:.4f} vs {t:.3f} (tol {tol:.4f}){'' if ok else ' X'}" for n, r, t, tol, ok in cs)


_tables = {}


def table(name, **overrides):
    key = (name, tuple(sorted(overrides.items())))
    if key not in _tables:
        _tables[key] = run_risk(preset(name, replications=M, **overrides), keep_samples=True)
    return _tables[key]


def test_criterion_1_gaussian_table():
    cs = cells(table("paper-7.1-gaussian"), PUBLISHED_RISKS["paper-7.1-gaussian"], REL)
    ok = report(1, f"gaussian sequential table, M={M}", all(c[-1] for c in cs), fmt(cs))
    assert ok


@pytest.mark.parametrize("name", ["paper-7.1-uniform", "paper-7.1-exponential"])
def test_criterion_2_uniform_exponential_tables(name):
    published = PUBLISHED_RISKS[name]
    cs = cells(table(name), published, REL)
    if all(c[-1] for c in cs):
        ok, detail = True, fmt(cs)
    else:
        passing, parts = [], []
        for eps in EPS_SWEEP:
            ce = cells(table(name, eps=eps), published, REL)
            parts.append(f"eps={eps}: " + ",".join(f"{c[1]:.4f}" for c in ce))
            if all(c[-1] for c in ce):
                passing.append(eps)
        ok = bool(passing)
        detail = fmt(cs) + " | eps sweep " + " / ".join(parts) + f" | passing eps: {passing or 'none'}"
    report(2, f"{name.rsplit('-', 1)[1]} sequential table, M={M}", ok, detail)
    assert ok


def test_criterion_3_baseline_table_and_ordering():
    base = table("paper-7.2-baseline")
    seq = table("paper-7.1-gaussian")
    cs = cells(base, PUBLISHED_RISKS["paper-7.2-baseline"], REL)
    order = []
    for n in N_VALUES:
        b, s = base.row(n), seq.row(n)
        joint = math.hypot(b.std_error, s.std_error)
        order.append((n, s.risk < b.risk + 2 * joint))
    ok = all(c[-1] for c in cs) and all(o for _, o in order)
    detail = fmt(cs) + " | sequential < baseline: " + ", ".join(f"n={n} {'yes' if o else 'NO'}" for n, o in order)
    report(3, f"non-sequential baseline table, M={M}", ok, detail)
    assert ok


def test_criterion_4_adaptive_table():
    t = table("paper-7.3-adaptive")
    cs = cells(t, PUBLISHED_RISKS["paper-7.3-adaptive"], 0.50)
    risks = [c[1] for c in cs]
    decreasing = all(a > b for a, b in zip(risks, risks[1:]))
    ratio = risks[0] / risks[-1] if risks[-1] > 0 else math.nan
    in_band = 2.0 <= ratio <= 4.5
    ok = all(c[-1] for c in cs) and decreasing and in_band
    detail = (fmt(cs) + f" | strictly decreasing: {decreasing} | R(1000)/R(20000) = {ratio:.3f} in [2, 4.5]: "
              f"{in_band}" + "".join(f" | row n={n} failed: {msg}" for n, msg in t.failures))
    report(4, f"adaptive table, M={M}", ok, detail)
    assert ok


def test_criterion_5_rate():
    t = table("paper-7.1-gaussian")
    ratio = t.row(1000).risk / t.row(20000).risk
    ok = 2.2 <= ratio <= 3.6
    report(5, "gaussian risk ratio n=1000 -> 20000", ok,
           f"{ratio:.3f} in [2.2, 3.6] (theory {20 ** (1.3 / 3.6):.3f}, published 2.83)")
    assert ok


def _h_exactness_on_random_hits(target=10_000):
    rng = np.random.default_rng(2024)
    hits = worst = 0
    kappa_ok = tau_ok = True
    seed = 0
    families = ("gaussian_unit", "uniform_standardized", "exponential_centered")
    while hits < target:
        n = int(rng.integers(200, 3000))
        z0 = float(rng.uniform(0.3, 0.7))
        h = float(rng.uniform(0.05, 0.25))
        alpha = float(rng.uniform(0.1, 0.9))
        coef = demo_function(alpha, z0=z0) if seed % 2 else constant_function(float(rng.uniform(-0.85, 0.85)))
        path = simulate_path(ModelConfig(n, coef, NoiseSpec(families[seed % 3]), seed))
        seed += 1
        res = estimate_at(path, z0, h, alpha)
        w, y = res.window, path.values
        tau_ok &= res.nu + 1 <= res.tau <= n
        if not res.hit:
            kappa_ok &= res.kappa_corr == 1.0 and res.estimate == 0.0
            continue
        tau_ok &= res.tau <= w.k_upper
        kappa_ok &= 0.0 < res.kappa_corr <= 1.0
        lo = max(res.nu + 1, w.k_star)
        j = np.arange(lo, res.tau)
        mass = math.fsum(np.r_[y[j - 1] ** 2, res.kappa_corr * y[res.tau - 1] ** 2])
        worst = max(worst, abs(mass - res.H) / res.H)
        hits += 1
    return hits, worst, kappa_ok, tau_ok


def _noiseless_exactness():
    c = 0.5
    y = 2.0**300 * np.power(c, np.arange(201, dtype=float))
    path = Path(y)
    seq = estimate_at(path, 0.5, 0.2, 0.3).estimate
    base = nonsequential_baseline(path, make_window(200, 0.5, 0.2))
    ada = adaptive_estimate(Path(1e100 * np.power(0.9, np.arange(201, dtype=float))), 0.5, build_grid(200))
    errs = (abs(seq - c) / c, abs(base - c) / c, abs(ada.estimate - 0.9) / 0.9)
    return errs, ada.k_selected == ada.grid.m


def _selector_totality(count=10_000):
    rng = np.random.default_rng(7)
    g = build_grid(20_000)
    slack = g.lambda_check / np.asarray(g.N_values)
    for _ in range(count):
        est = rng.normal(0, rng.choice([0.001, 0.05, 1.0]), g.m + 1)
        k, om = select_index(est, g)
        if not (om[0] <= slack[0] and om[k] <= slack[k]):
            return False
    return True


def _worker_determinism():
    exp = preset("paper-7.1-gaussian", n_values=(1000, 5000), replications=400)
    outs = [render(risk_rows(run_risk(exp, workers=w, block=50)), "csv") for w in (1, 4, 16)]
    return outs[0] == outs[1] == outs[2]


def test_criterion_6_property_suite():
    hits, worst, kappa_ok, tau_ok = _h_exactness_on_random_hits()
    errs, k_is_m = _noiseless_exactness()
    total = _selector_totality()
    det = _worker_determinism()
    parts = {
        f"H-exactness on {hits} hits (worst rel {worst:.1e})": worst <= 1e-10,
        "0 < kappa <= 1 on hits, kappa = 1 and estimate 0 on misses": kappa_ok,
        "nu+1 <= tau <= n, hit => tau <= k_upper": tau_ok,
        "noiseless exactness seq/adaptive/baseline (rel err " + ", ".join(f"{e:.0e}" for e in errs) + ")":
            max(errs) <= 1e-12 and k_is_m,
        "selector total on 10^4 vectors": total,
        "byte-identical CSV for 1/4/16 workers": det,
    }
    ok = all(parts.values())
    report(6, "property suite", ok, "; ".join(f"{k}: {'ok' if v else 'FAILED'}" for k, v in parts.items()))
    assert ok


def test_criterion_7_martingale_diagnostics():
    exp = preset("paper-7.1-gaussian", coefficient=constant_function(0.0), n_values=(10_000,), replications=5000)
    t = run_risk(exp, keep_samples=True)
    s = zeta_diagnostics(t.samples[10_000].zeta)
    tails = {z: s.tail_exceed_rates[z] < s.tail_bounds[z] for z in s.tail_bounds}
    parts = {
        f"E zeta^2 = {s.second_moment:.4f} <= 1.05": s.second_moment <= 1.05,
        f"KS distance {s.normality_stat:.4f} <= 0.05": s.normality_stat <= 0.05,
        "tails " + ", ".join(f"P(zeta>={z:g})={s.tail_exceed_rates[z]:.4f}<{s.tail_bounds[z]:.4f}" for z in tails):
            all(tails.values()),
    }
    ok = all(parts.values())
    report(7, "martingale diagnostics, n=10^4, 5000 replications, S = 0",
           ok, "; ".join(f"{k}: {'ok' if v else 'FAILED'}" for k, v in parts.items())
           + f" (miss rate {t.rows[0].miss_rate:.3f})")
    assert ok


def test_criterion_8_stopping_time_calibration():
    row = table("paper-7.1-gaussian").row(10_000)
    ok = abs(row.mean_tau_over_H - 1.0) <= 0.15
    report(8, "stopping-time calibration at n=10^4", ok,
           f"mean (tau - nu)/H over hits = {row.mean_tau_over_H:.4f}, target 1 +- 0.15 "
           f"({(1 - row.miss_rate) * row.M:.0f} hits)")
    assert ok
