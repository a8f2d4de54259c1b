"""Monte Carlo risk tables.

Replication ``r`` at sample size ``n`` draws its noise from the stream
keyed by ``(master_seed, n, r)`` and writes into slot ``r`` of the result
arrays, and the aggregates are exactly rounded sums over those arrays.
The table is therefore the same bit for bit whatever the worker count.
"""

from __future__ import annotations

import math
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels
from .adaptive import build_grid, check_grid_windows, select_index
from .errors import DegenerateError, SeqKernelError, ValidationError
from .kernel_core import KernelWindow, bandwidth, kappa, make_window, pilot_size
from .pilot import _pilot_from_values
from .process import CoefficientFunction, NoiseSpec, Path, demo_function, design_coefficients, make_rng
from .sequential import _estimate_from_values

ESTIMATORS = ("sequential", "adaptive", "nonsequential_baseline")
Z0_DEFAULT = 1.0 / math.sqrt(2.0)
PUBLISHED_N = (1000, 5000, 10000, 20000)


def nonsequential_baseline(path: Path, window: KernelWindow) -> float:
    """Kernel ratio sum Q(u_k) y_{k-1} y_k / sum Q(u_k) y_{k-1}^2 over the whole sample."""
    den, num = _kernels.window_sums(path.values, window.k_star, window.k_upper)
    if den == 0.0:
        raise DegenerateError("baseline denominator sum Q(u_k) y_{k-1}^2 vanished")
    return num / den


@dataclass(frozen=True)
class RiskExperiment:
    estimator_kind: str
    coefficient: CoefficientFunction
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    z0: float = Z0_DEFAULT
    n_values: tuple = PUBLISHED_N
    replications: int = 30_000
    master_seed: int = 1
    beta: float = 1.3
    beta_low: float = 1.6
    beta_high: float = 1.8
    eps: float = 0.1
    lambda_factor: float = 1.05
    kappa_regime: str = "nonadaptive"
    boundary: str = "reject"
    y0: float = 0.0

    def __post_init__(self):
        if self.estimator_kind not in ESTIMATORS:
            raise ValidationError(f"estimator must be one of {ESTIMATORS}, got {self.estimator_kind!r}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ValidationError(f"M (replications) must be a positive integer, got {self.replications}")
        if not self.n_values or any(int(n) != n or n < 3 for n in self.n_values):
            raise ValidationError(f"n values must be integers >= 3, got {self.n_values}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if not 0.0 < self.eps < 1.0:
            raise ValidationError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0.0 < self.z0 < 1.0:
            raise ValidationError(f"z0 must lie in (0, 1), got {self.z0}")


@dataclass(frozen=True)
class RiskRow:
    n: int
    estimator: str
    noise: str
    M: int
    risk: float
    std_error: float
    miss_rate: float
    mean_tau_over_H: float
    seed: int


@dataclass
class RiskTable:
    rows: list
    failures: list = field(default_factory=list)
    samples: dict = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return bool(self.failures)

    def row(self, n: int) -> RiskRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def risks(self) -> list[float]:
        return [r.risk for r in self.rows]


@dataclass(frozen=True)
class Samples:
    """Per-replication outputs for one row, indexed by replication."""

    abs_error: np.ndarray
    hit: np.ndarray
    tau_over_H: np.ndarray
    zeta: np.ndarray


# --- per-n setup and one replication ----------------------------------------


@dataclass(frozen=True)
class _Setup:
    n: int
    coef: np.ndarray
    target: float
    window: Optional[KernelWindow] = None
    pilot_sizes: Optional[tuple] = None
    grid: object = None
    levels: tuple = ()


def _setup(exp: RiskExperiment, n: int) -> _Setup:
    coef = design_coefficients(exp.coefficient, n)
    target = float(exp.coefficient.values(np.array([exp.z0]))[0])
    if exp.estimator_kind == "adaptive":
        grid = build_grid(n, exp.beta_low, exp.beta_high, exp.lambda_factor)
        check_grid_windows(grid, exp.z0, exp.boundary)
        levels = []
        for h, a in zip(grid.h_checks, grid.alphas):
            w = make_window(n, exp.z0, h, exp.boundary)
            levels.append((w, pilot_size(w, a, n)))
        return _Setup(n, coef, target, grid=grid, levels=tuple(levels))
    h = bandwidth(exp.beta, kappa(n, exp.kappa_regime))
    window = make_window(n, exp.z0, h, exp.boundary)
    sizes = pilot_size(window, exp.beta - 1.0, n) if exp.estimator_kind == "sequential" else None
    return _Setup(n, coef, target, window=window, pilot_sizes=sizes)


def _one(exp: RiskExperiment, s: _Setup, r: int) -> tuple[float, bool, float, float]:
    rng = make_rng(exp.master_seed, (s.n, r))
    noise = exp.noise.sample(rng, s.n)
    y = _kernels.recursion(s.coef, noise, float(exp.y0))
    if exp.estimator_kind == "nonsequential_baseline":
        den, num = _kernels.window_sums(y, s.window.k_star, s.window.k_upper)
        if den == 0.0:
            raise DegenerateError(f"baseline denominator vanished (n={s.n}, replication {r})")
        return abs(num / den - s.target), True, math.nan, math.nan
    if exp.estimator_kind == "sequential":
        pilot = _pilot_from_values(y, s.window, *s.pilot_sizes, exp.eps)
        res = _estimate_from_values(y, noise, s.window, pilot)
    else:
        per_level = [_estimate_from_values(y, noise, w, _pilot_from_values(y, w, *sz, exp.eps))
                     for w, sz in s.levels]
        k_sel, _ = select_index([p.estimate for p in per_level], s.grid)
        res = per_level[k_sel]
    tau_ratio = (res.tau - res.nu) / res.H if res.hit else math.nan
    return abs(res.estimate - s.target), res.hit, tau_ratio, res.zeta_tilde


def _run_block(exp: RiskExperiment, s: _Setup, r0: int, r1: int) -> np.ndarray:
    out = np.empty((r1 - r0, 4))
    for i, r in enumerate(range(r0, r1)):
        out[i] = _one(exp, s, r)
    return out


_WORKER_STATE: dict = {}


def _init_worker(exp, setups):
    _WORKER_STATE["exp"] = exp
    _WORKER_STATE["setups"] = setups


def _worker_block(n: int, r0: int, r1: int) -> tuple[int, int, int, np.ndarray]:
    exp = _WORKER_STATE["exp"]
    return n, r0, r1, _run_block(exp, _WORKER_STATE["setups"][n], r0, r1)


def default_workers() -> int:
    return int(os.environ.get("SEQKERNEL_THREADS", "1"))


def _aggregate(exp: RiskExperiment, n: int, data: np.ndarray) -> tuple[RiskRow, Samples]:
    M = data.shape[0]
    err = data[:, 0]
    hit = data[:, 1].astype(bool)
    risk = math.fsum(err) / M
    std = math.sqrt(math.fsum((err - risk) ** 2) / (M - 1)) if M > 1 else 0.0
    tau = data[hit, 2]
    if exp.estimator_kind == "nonsequential_baseline" or tau.size == 0:
        mean_tau = math.nan
    else:
        mean_tau = math.fsum(tau) / tau.size
    row = RiskRow(n, exp.estimator_kind, exp.noise.family, M, risk, std / math.sqrt(M),
                  float(M - int(hit.sum())) / M, mean_tau, int(exp.master_seed))
    return row, Samples(err.copy(), hit, data[:, 2].copy(), data[:, 3].copy())


def run_risk(experiment: RiskExperiment, workers: Optional[int] = None, block: int = 250,
             keep_samples: bool = False) -> RiskTable:
    """Monte Carlo risk (1/M) sum |estimate - S(z0)| for every n of the experiment.

    A row whose setup or any replication fails is dropped and recorded in
    ``failures``; the table is then flagged partial.
    """
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    exp = experiment
    M = exp.replications
    setups, failures = {}, []
    for n in exp.n_values:
        try:
            setups[n] = _setup(exp, n)
        except SeqKernelError as e:
            failures.append((n, str(e)))

    results = {n: np.empty((M, 4)) for n in setups}
    blocks = [(n, r0, min(r0 + block, M)) for n in setups for r0 in range(0, M, block)]
    broken = {}
    if workers == 1 or len(blocks) <= 1:
        for n, r0, r1 in blocks:
            if n in broken:
                continue
            try:
                results[n][r0:r1] = _run_block(exp, setups[n], r0, r1)
            except SeqKernelError as e:
                broken[n] = str(e)
    else:
        ctx = mp.get_context("fork")
        with ProcessPoolExecutor(workers, mp_context=ctx, initializer=_init_worker,
                                 initargs=(exp, setups)) as pool:
            futures = [pool.submit(_worker_block, *b) for b in blocks]
            for fut, (n, _, _) in zip(futures, blocks):
                try:
                    _, r0, r1, data = fut.result()
                    results[n][r0:r1] = data
                except SeqKernelError as e:
                    broken.setdefault(n, str(e))

    table = RiskTable(rows=[], failures=failures)
    for n in exp.n_values:
        if n not in setups:
            continue
        if n in broken:
            table.failures.append((n, broken[n]))
            continue
        row, samples = _aggregate(exp, n, results[n])
        table.rows.append(row)
        if keep_samples:
            table.samples[n] = samples
    table.failures.sort()
    return table


@dataclass(frozen=True)
class RatePair:
    n1: int
    n2: int
    empirical_ratio: float
    theoretical_ratio: float


def rate_check(table: RiskTable, beta: float) -> list[RatePair]:
    """Empirical risk ratio R(n1)/R(n2) against (n2/n1)^{beta/(2 beta + 1)} for every pair of rows."""
    out = []
    groups: dict = {}
    for r in table.rows:
        groups.setdefault((r.estimator, r.noise), []).append(r)
    for rows in groups.values():
        rows = sorted(rows, key=lambda r: r.n)
        for i, a in enumerate(rows):
            for b in rows[i + 1:]:
                emp = a.risk / b.risk if b.risk > 0 else math.inf
                out.append(RatePair(a.n, b.n, emp, (b.n / a.n) ** (beta / (2 * beta + 1))))
    if not out:
        raise ValidationError("rate_check needs at least two rows of the same estimator and noise")
    return out


# --- presets -----------------------------------------------------------------

PUBLISHED_RISKS = {
    "paper-7.1-gaussian": (0.034, 0.021, 0.017, 0.012),
    "paper-7.1-uniform": (0.038, 0.022, 0.018, 0.014),
    "paper-7.1-exponential": (0.028, 0.016, 0.012, 0.010),
    "paper-7.2-baseline": (0.046, 0.026, 0.020, 0.015),
    "paper-7.3-adaptive": (0.021, 0.013, 0.009, 0.007),
}


def preset(name: str, **overrides) -> RiskExperiment:
    """Experiment settings of the published tables; keyword overrides replace fields."""
    nonadaptive = dict(coefficient=demo_function(0.3), beta=1.3)
    presets = {
        "paper-7.1-gaussian": dict(estimator_kind="sequential", noise=NoiseSpec("gaussian_unit"), **nonadaptive),
        "paper-7.1-uniform": dict(estimator_kind="sequential", noise=NoiseSpec("uniform_standardized"),
                                  **nonadaptive),
        "paper-7.1-exponential": dict(estimator_kind="sequential", noise=NoiseSpec("exponential_centered"),
                                      **nonadaptive),
        "paper-7.2-baseline": dict(estimator_kind="nonsequential_baseline", noise=NoiseSpec("gaussian_unit"),
                                   **nonadaptive),
        "paper-7.3-adaptive": dict(estimator_kind="adaptive", noise=NoiseSpec("gaussian_unit"),
                                   coefficient=demo_function(0.7), beta_low=1.6, beta_high=1.8),
    }
    if name not in presets:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    return replace(RiskExperiment(**presets[name]), **overrides)
