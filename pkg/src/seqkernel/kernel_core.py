"""Window geometry, bandwidth rule, pilot sizing and the running sums A_{k,m}.

The kernel is the indicator of [-1, 1].  Its support on the design
j/n is the integer window ``k_star <= j <= k_upper``, and every sum here
is restricted to that window rather than re-evaluating |u_j| <= 1 in
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DomainError, ValidationError
from .process import Path

BOUNDARY_POLICIES = ("reject", "clip")


def indicator_kernel(u):
    """Q(u) = 1 on [-1, 1], 0 elsewhere."""
    return (np.abs(np.asarray(u, dtype=float)) <= 1.0).astype(float)


@dataclass(frozen=True)
class KernelWindow:
    z0: float
    h: float
    n: int
    k_star: int
    k_upper: int
    clipped: bool = False

    @property
    def size(self) -> int:
        return self.k_upper - self.k_star + 1

    def u(self, j):
        return (np.asarray(j) / self.n - self.z0) / self.h

    def contains(self, j) -> bool:
        return self.k_star <= j <= self.k_upper

    def weights(self, lo: int, hi: int) -> np.ndarray:
        """Q(u_j) for j = lo..hi as a 0/1 array."""
        j = np.arange(lo, hi + 1)
        return ((j >= self.k_star) & (j <= self.k_upper)).astype(float)


def exact(x: float) -> Fraction:
    """The shortest decimal that round-trips to ``x``, as an exact rational."""
    return Fraction(repr(float(x)))


def window_bounds(n: int, z0: float, h: float) -> tuple[int, int]:
    """floor(n z0 - n h) + 1 and floor(n z0 + n h) in exact arithmetic.

    Inputs are read as the decimals they print as, so ``h=0.1`` means 1/10.
    """
    nz, nh = n * exact(z0), n * exact(h)
    return math.floor(nz - nh) + 1, math.floor(nz + nh)


def make_window(n: int, z0: float, h: float, boundary: str = "reject") -> KernelWindow:
    """Kernel window around ``z0`` of half-width ``h`` on the design k/n.

    With ``boundary="reject"`` a window reaching outside 1..n raises
    :class:`DomainError`; ``"clip"`` truncates it to the sample instead (the
    threshold normalisation is then no longer matched to the window mass).
    """
    if int(n) != n or n < 2:
        raise ValidationError(f"n must be an integer >= 2, got {n}")
    if not 0.0 < z0 < 1.0:
        raise ValidationError(f"z0 must lie in (0, 1), got {z0}")
    if not h > 0.0:
        raise ValidationError(f"h must be positive, got {h}")
    if boundary not in BOUNDARY_POLICIES:
        raise ValidationError(f"boundary must be one of {BOUNDARY_POLICIES}, got {boundary!r}")
    k_star, k_upper = window_bounds(n, z0, h)
    if k_star > k_upper:
        raise DomainError(f"kernel window contains no design point (n={n}, z0={z0:g}, h={h:g})")
    if boundary == "reject":
        if k_star < 1:
            raise DomainError(
                f"kernel window precondition h < min(z0, 1 - z0) violated: k_star = {k_star} < 1 "
                f"(n={n}, z0={z0:g}, h={h:g})")
        if k_upper > n:
            raise DomainError(
                f"kernel window precondition h < min(z0, 1 - z0) violated: k_upper = {k_upper} > n = {n} "
                f"(z0={z0:g}, h={h:g})")
        return KernelWindow(z0, h, n, k_star, k_upper)
    lo, hi = max(k_star, 1), min(k_upper, n)
    if lo > hi:
        raise DomainError(f"kernel window is empty after clipping (n={n}, z0={z0:g}, h={h:g})")
    return KernelWindow(z0, h, n, lo, hi, clipped=(lo, hi) != (k_star, k_upper))


def bandwidth(beta: float, kappa_n: float) -> float:
    """h = kappa_n ** (1 / (2 beta + 1))."""
    if not 1.0 < beta < 2.0:
        raise ValidationError(f"beta must lie in (1, 2), got {beta}")
    if not 0.0 < kappa_n < 1.0:
        raise ValidationError(f"kappa_n must lie in (0, 1), got {kappa_n}")
    return kappa_n ** (1.0 / (2.0 * beta + 1.0))


def kappa(n: int, regime: str = "nonadaptive") -> float:
    if regime == "nonadaptive":
        return 1.0 / n
    if regime == "adaptive":
        return math.log(n) / n
    raise ValidationError(f"kappa regime must be 'nonadaptive' or 'adaptive', got {regime!r}")


@dataclass(frozen=True)
class BandwidthRule:
    beta: float
    kappa_n: float
    regime: str = "nonadaptive"

    @classmethod
    def for_sample(cls, beta: float, n: int, regime: str = "nonadaptive") -> "BandwidthRule":
        return cls(beta, kappa(n, regime), regime)

    @property
    def alpha(self) -> float:
        return self.beta - 1.0

    @property
    def h(self) -> float:
        return bandwidth(self.beta, self.kappa_n)


def pilot_size(window: KernelWindow, alpha: float, n: int) -> tuple[int, int, float]:
    """Pilot sample size: returns ``(nu, iota, eps_tilde)``.

    eps_tilde = h**alpha / ln n, iota = floor(eps_tilde n h) + 1 and
    nu = k_star + iota.
    """
    if n < 3:
        raise ValidationError(f"n must be >= 3 so that ln n > 1, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    eps_tilde = window.h**alpha / math.log(n)
    iota = math.floor(eps_tilde * n * window.h) + 1
    nu = window.k_star + iota
    if nu >= window.k_upper:
        raise DomainError(
            f"degenerate window: pilot index nu = {nu} >= k_upper = {window.k_upper}; "
            "the pilot would consume the whole window")
    return nu, iota, eps_tilde


def _check_range(path: Path, k: int, m: int):
    if not 0 <= k <= m <= path.n:
        raise ValidationError(f"need 0 <= k <= m <= n, got k={k}, m={m}, n={path.n}")


def partial_sum_A(path: Path, window: KernelWindow, k: int, m: int) -> float:
    """A_{k,m} = sum_{j=k+1}^{m} Q(u_j) y_{j-1}^2 (exactly rounded)."""
    _check_range(path, k, m)
    lo, hi = max(k + 1, window.k_star), min(m, window.k_upper)
    if lo > hi:
        return 0.0
    prev = path.values[lo - 1:hi]
    return math.fsum(prev * prev)


def deviation_rho(path: Path, window: KernelWindow, f: Callable, k: int, m: int, gamma_S: float) -> float:
    """Centred deviation statistic rho_{k,m}(f).

    (nh)^-1 sum f(u_j) y_{j-1}^2 - (gamma nh)^-1 sum f(u_j), j = k+1..m,
    with ``f`` evaluated on the array of u_j.
    """
    if not 0.0 < gamma_S <= 1.0:
        raise ValidationError(f"gamma_S must lie in (0, 1], got {gamma_S}")
    _check_range(path, k, m)
    if k == m:
        return 0.0
    j = np.arange(k + 1, m + 1)
    fu = np.asarray(f(window.u(j)), dtype=float) * np.ones(j.size)
    prev = path.values[k:m]
    nh = window.n * window.h
    return (math.fsum(fu * prev * prev) - math.fsum(fu) / gamma_S) / nh
