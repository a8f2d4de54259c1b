"""Pilot kernel estimate on the first iota in-window points and the threshold H."""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels
from .errors import DegeneratePilotError, ValidationError
from .kernel_core import KernelWindow, pilot_size
from .process import Path


@dataclass(frozen=True)
class PilotResult:
    s_hat: float
    s_tilde: float
    A_nu: float
    nu: int
    iota: int
    eps_tilde: float
    H: float
    phi: float
    eps: float
    degenerate: bool = False


def gamma(s: float) -> float:
    """Variance factor 1 - s**2."""
    if not abs(s) < 1.0:
        raise ValidationError(f"gamma needs |s| < 1, got {s}")
    return 1.0 - s * s


def project(s_hat: float, eps: float) -> float:
    """Clamp into [-1 + eps, 1 - eps]."""
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"eps must lie in (0, 1), got {eps}")
    return min(max(s_hat, -1.0 + eps), 1.0 - eps)


def threshold_H(s_tilde: float, eps_tilde: float, n: int, h: float) -> tuple[float, float]:
    """Return ``(H, phi)`` with phi = 2(1 - eps_tilde)/gamma(s_tilde) and H = phi n h.

    ``eps_tilde = 0`` is accepted as a limiting case.
    """
    if not 0.0 <= eps_tilde < 1.0:
        raise ValidationError(f"eps_tilde must lie in [0, 1), got {eps_tilde}")
    phi = 2.0 * (1.0 - eps_tilde) / gamma(s_tilde)
    return phi * n * h, phi


def _pilot_sums(values, window: KernelWindow, nu: int) -> tuple[float, float]:
    # j runs over 1..nu but Q vanishes below k_star
    return _kernels.window_sums(values, window.k_star, min(nu, window.k_upper))


def pilot_estimate(path: Path, window: KernelWindow, nu: int) -> tuple[float, float]:
    """Kernel ratio on j = 1..nu; returns ``(s_hat, A_nu)``."""
    if not window.k_star < nu < window.k_upper:
        raise ValidationError(f"nu must lie in (k_star, k_upper) = ({window.k_star}, {window.k_upper}), got {nu}")
    A_nu, cross = _pilot_sums(path.values, window, nu)
    if A_nu == 0.0:
        raise DegeneratePilotError(f"pilot sum A_nu vanished (nu={nu})")
    return cross / A_nu, A_nu


def run_pilot(path: Path, window: KernelWindow, alpha: float, eps: float = 0.1) -> PilotResult:
    """Pilot size, pilot estimate, projection and threshold in one step.

    A vanishing pilot sum is mapped to ``s_tilde = 0`` (the largest
    gamma, hence the smallest threshold) and flagged as degenerate.
    """
    nu, iota, eps_tilde = pilot_size(window, alpha, window.n)
    return _pilot_from_values(path.values, window, nu, iota, eps_tilde, eps)


def _pilot_from_values(values, window, nu, iota, eps_tilde, eps) -> PilotResult:
    A_nu, cross = _pilot_sums(values, window, nu)
    degenerate = A_nu == 0.0
    s_hat = 0.0 if degenerate else cross / A_nu
    s_tilde = project(s_hat, eps)
    H, phi = threshold_H(s_tilde, eps_tilde, window.n, window.h)
    return PilotResult(s_hat, s_tilde, A_nu, nu, iota, eps_tilde, H, phi, eps, degenerate)
