"""Truncated sequential kernel estimator.

After the pilot has fixed the threshold H, observations are accumulated
from nu+1 onward until the weighted squared mass A_{nu,k} reaches H.  The
last observation gets the fractional weight kappa that makes the mass
exactly H, so the estimate is a linear statistic with the fixed
denominator H.  If H is never reached inside the window the estimate is 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import _kernels
from .errors import ValidationError
from .kernel_core import KernelWindow, make_window, pilot_size
from .pilot import PilotResult, _pilot_from_values
from .process import Path

_EMPTY = np.empty(0)


@dataclass(frozen=True)
class SequentialResult:
    estimate: float
    tau: int
    kappa_corr: float
    H: float
    hit: bool
    pilot: PilotResult
    window: KernelWindow
    # nan when the noise is unknown (observed data); 0 on a miss
    zeta_tilde: float = math.nan
    mass_before_tau: float = math.nan

    @property
    def nu(self) -> int:
        return self.pilot.nu


def stopping_time(path: Path, window: KernelWindow, nu: int, H: float) -> tuple[int, bool, float]:
    """First k >= nu+1 with A_{nu,k} >= H; ``(n, False, 1.0)`` if there is none."""
    if not H > 0.0:
        raise ValidationError(f"threshold H must be positive, got {H}")
    if not 0 <= nu < path.n:
        raise ValidationError(f"need 0 <= nu < n, got nu={nu}, n={path.n}")
    tau, hit, kappa, *_ = _kernels.stopping_scan(path.values, _EMPTY, False, max(nu, window.k_star - 1),
                                                 window.k_upper, path.n, float(H))
    return int(tau), bool(hit), float(kappa)


def _estimate_from_values(values, noise, window: KernelWindow, pilot: PilotResult) -> SequentialResult:
    has_noise = noise is not None
    tau, hit, kappa, mass, num, noise_sum = _kernels.stopping_scan(
        values, noise if has_noise else _EMPTY, has_noise, pilot.nu, window.k_upper, window.n, pilot.H)
    if hit:
        estimate = num / pilot.H
        zeta = noise_sum / math.sqrt(pilot.H) if has_noise else math.nan
    else:
        estimate = 0.0
        zeta = 0.0 if has_noise else math.nan
    return SequentialResult(estimate, int(tau), float(kappa), pilot.H, bool(hit), pilot, window, zeta, mass)


def sequential_estimate(path: Path, window: KernelWindow, pilot: PilotResult) -> SequentialResult:
    """Sequential estimate S*_h on ``path`` given a pilot computed on the same path and window."""
    if not window.k_star < pilot.nu < window.k_upper:
        raise ValidationError(f"pilot nu = {pilot.nu} is not inside window ({window.k_star}, {window.k_upper})")
    if window.n != path.n:
        raise ValidationError(f"window was built for n={window.n}, path has n={path.n}")
    return _estimate_from_values(path.values, path.noise, window, pilot)


def estimate_at(path: Path, z0: float, h: float, alpha: float, eps: float = 0.1,
                boundary: str = "reject") -> SequentialResult:
    """Window, pilot and sequential estimate for bandwidth ``h`` and smoothness ``alpha``."""
    window = make_window(path.n, z0, h, boundary)
    nu, iota, eps_tilde = pilot_size(window, alpha, path.n)
    pilot = _pilot_from_values(path.values, window, nu, iota, eps_tilde, eps)
    return _estimate_from_values(path.values, path.noise, window, pilot)


@dataclass(frozen=True)
class ZetaSummary:
    count: int
    second_moment: float
    tail_exceed_rates: dict
    tail_bounds: dict
    normality_stat: float
    hit_rate: float


def zeta_diagnostics(results: Iterable, z_values: Sequence[float] = (2.0, 2.5, 3.0)) -> ZetaSummary:
    """Empirical checks on the normalised noise term zeta_tilde.

    Accepts :class:`SequentialResult` objects or bare zeta values.  Reports
    the second moment, the one-sided exceedance rate P(zeta >= z) next to
    the bound 2 exp(-z^2/8), and the Kolmogorov-Smirnov distance to N(0, 1).
    Misses enter as zeros.
    """
    results = list(results)
    zeta = np.array([r.zeta_tilde if isinstance(r, SequentialResult) else float(r) for r in results])
    hits = [r.hit for r in results if isinstance(r, SequentialResult)]
    if zeta.size == 0:
        raise ValidationError("zeta_diagnostics needs at least one result")
    if np.isnan(zeta).any():
        raise ValidationError("every result must carry a realised zeta_tilde (simulation mode)")
    if any(z < 2.0 for z in z_values):
        raise ValidationError("tail levels z must be >= 2")
    rates = {float(z): float(np.mean(zeta >= z)) for z in z_values}
    bounds = {float(z): 2.0 * math.exp(-z * z / 8.0) for z in z_values}
    ks = float(stats.kstest(zeta, "norm").statistic)
    hit_rate = float(np.mean(hits)) if len(hits) == zeta.size else math.nan
    return ZetaSummary(int(zeta.size), math.fsum(zeta * zeta) / zeta.size, rates, bounds, ks, hit_rate)
