"""Lepskii-type selection over a grid of regularities.

For beta_k on a uniform grid of [beta_low, beta_high] the sequential
estimator is run with bandwidth (ln n / n)^{1/(2 beta_k + 1)}; the
selected level is the largest k whose estimate agrees with every
smaller-bandwidth estimate up to lambda / N_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .kernel_core import make_window, pilot_size
from .process import Path
from .sequential import SequentialResult, estimate_at


def lambda_star(beta_low: float, beta_high: float) -> float:
    return 4.0 * math.sqrt(2.0) * math.sqrt((beta_high - beta_low) / ((2 * beta_low + 1) * (2 * beta_high + 1)))


@dataclass(frozen=True)
class AdaptiveGrid:
    n: int
    beta_low: float
    beta_high: float
    m: int
    betas: tuple
    alphas: tuple
    d_n: float
    h_checks: tuple
    N_values: tuple
    lambda_check: float
    lambda_factor: float

    @property
    def lambda_star(self) -> float:
        return lambda_star(self.beta_low, self.beta_high)

    @classmethod
    def from_betas(cls, n: int, betas: Sequence[float], lambda_check: float) -> "AdaptiveGrid":
        """Grid on explicit levels (duplicates allowed); used to probe the selector."""
        d_n = n / math.log(n)
        betas = tuple(float(b) for b in betas)
        lam_star = lambda_star(min(betas), max(betas)) if len(set(betas)) > 1 else 0.0
        return cls(n, min(betas), max(betas), len(betas) - 1, betas, tuple(b - 1.0 for b in betas), d_n,
                   tuple(d_n ** (-1.0 / (2 * b + 1)) for b in betas),
                   tuple(d_n ** (b / (2 * b + 1)) for b in betas),
                   lambda_check, lambda_check / lam_star if lam_star else math.inf)


def build_grid(n: int, beta_low: float = 1.6, beta_high: float = 1.8, lambda_factor: float = 1.05) -> AdaptiveGrid:
    """Regularity grid with m = floor(ln d_n) + 1 steps, d_n = n / ln n.

    The threshold is ``lambda_factor`` times the critical constant
    4 sqrt(2) sqrt((beta_high - beta_low) / ((2 beta_low + 1)(2 beta_high + 1))).
    """
    if not 1.0 <= beta_low < beta_high <= 2.0:
        raise ValidationError(f"need 1 <= beta_low < beta_high <= 2, got [{beta_low}, {beta_high}]")
    if not lambda_factor > 1.0:
        raise ValidationError(f"lambda_factor must exceed 1, got {lambda_factor}")
    if int(n) != n or n < 3:
        raise ValidationError(f"n must be an integer >= 3, got {n}")
    d_n = n / math.log(n)
    m = math.floor(math.log(d_n)) + 1
    if m < 1:
        raise ValidationError(f"n = {n} is too small for a grid with m >= 1")
    betas = tuple(beta_low + (k / m) * (beta_high - beta_low) for k in range(m + 1))
    return AdaptiveGrid(
        n=n, beta_low=beta_low, beta_high=beta_high, m=m, betas=betas,
        alphas=tuple(b - 1.0 for b in betas), d_n=d_n,
        h_checks=tuple((1.0 / d_n) ** (1.0 / (2 * b + 1)) for b in betas),
        N_values=tuple(d_n ** (b / (2 * b + 1)) for b in betas),
        lambda_check=lambda_factor * lambda_star(beta_low, beta_high),
        lambda_factor=lambda_factor,
    )


@dataclass(frozen=True)
class AdaptiveResult:
    estimate: float
    k_selected: int
    per_level: tuple
    omegas: tuple
    grid: AdaptiveGrid


def level_estimates(path: Path, z0: float, grid: AdaptiveGrid, eps: float = 0.1,
                    boundary: str = "reject") -> list[SequentialResult]:
    """Sequential estimate at every grid level, all on the same path."""
    if path.n != grid.n:
        raise ValidationError(f"grid was built for n={grid.n}, path has n={path.n}")
    out = []
    for k, (h, a) in enumerate(zip(grid.h_checks, grid.alphas)):
        try:
            out.append(estimate_at(path, z0, h, a, eps, boundary))
        except ValidationError as exc:
            raise type(exc)(f"grid level {k} (beta={grid.betas[k]:.4g}, h={h:.4g}): {exc}") from exc
    return out


def select_index(estimates: Sequence[float], grid: AdaptiveGrid) -> tuple[int, tuple]:
    """Returns ``(k_selected, omegas)``.

    omega_k = max_{j <= k} (|S_j - S_k| - lambda / N_j), and k_selected is the
    largest k with omega_k <= lambda / N_k.  k = 0 always qualifies.
    """
    est = np.asarray(estimates, dtype=float)
    if est.size != grid.m + 1:
        raise ValidationError(f"expected {grid.m + 1} estimates, got {est.size}")
    slack = grid.lambda_check / np.asarray(grid.N_values)
    omegas = tuple(float(np.max(np.abs(est[: k + 1] - est[k]) - slack[: k + 1])) for k in range(est.size))
    k_sel = max(k for k in range(est.size) if omegas[k] <= slack[k])
    return k_sel, omegas


def adaptive_estimate(path: Path, z0: float, grid: AdaptiveGrid, eps: float = 0.1,
                      boundary: str = "reject") -> AdaptiveResult:
    levels = level_estimates(path, z0, grid, eps, boundary)
    k_sel, omegas = select_index([r.estimate for r in levels], grid)
    return AdaptiveResult(levels[k_sel].estimate, k_sel, tuple(levels), omegas, grid)


def check_grid_windows(grid: AdaptiveGrid, z0: float, boundary: str = "reject"):
    """Raise naming the first level whose window or pilot is invalid, before any simulation."""
    for k, (h, a) in enumerate(zip(grid.h_checks, grid.alphas)):
        try:
            pilot_size(make_window(grid.n, z0, h, boundary), a, grid.n)
        except ValidationError as exc:
            raise type(exc)(f"grid level {k} (beta={grid.betas[k]:.4g}, h={h:.4g}): {exc}") from exc
