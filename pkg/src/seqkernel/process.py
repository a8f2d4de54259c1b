"""The varying-coefficient AR(1) model, its noise laws and class verifiers.

The model is

    y_k = S(k/n) * y_{k-1} + xi_k,    1 <= k <= n,

with i.i.d. centred, unit-variance noise.  Besides simulation this module
provides grid-based certificates for the stability set, the weak and strong
local Hölder classes, and the moment class of the noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import DomainError, SimulationError, ValidationError

FD_STEP = 1e-6
NOISE_FAMILIES = ("gaussian_unit", "uniform_standardized", "exponential_centered", "custom")
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class CoefficientFunction:
    """The unknown coefficient S on [0, 1] plus declared class parameters.

    The declared parameters are metadata only; use the ``verify_*``
    functions to check membership numerically.
    """

    evaluator: Callable
    declared_eps: float = 0.1
    declared_L: float = 1.0
    declared_beta: Optional[float] = None
    declared_Lstar: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        if not 0.0 < self.declared_eps < 1.0:
            raise ValidationError(f"declared_eps must lie in (0, 1), got {self.declared_eps}")
        if not self.declared_L > 0.0:
            raise ValidationError(f"declared_L must be positive, got {self.declared_L}")
        if self.declared_beta is not None and not 1.0 < self.declared_beta < 2.0:
            raise ValidationError(f"declared_beta must lie in (1, 2), got {self.declared_beta}")

    def __call__(self, x):
        return self.evaluator(x)

    def values(self, x) -> np.ndarray:
        """Evaluate on an array, falling back to a scalar loop for non-vectorised evaluators."""
        x = np.asarray(x, dtype=float)
        try:
            out = np.asarray(self.evaluator(x), dtype=float)
            if out.shape == x.shape:
                return out
            if out.ndim == 0:
                return np.full(x.shape, float(out))
        except (TypeError, ValueError):
            pass
        return np.array([float(self.evaluator(float(v))) for v in x.ravel()]).reshape(x.shape)


def constant_function(c: float, eps: float = 0.1) -> CoefficientFunction:
    return CoefficientFunction(lambda x: np.zeros_like(np.asarray(x, dtype=float)) + c,
                               declared_eps=eps, declared_L=1.0, name=f"const-{c:g}")


def demo_function(alpha: float, z0: float = 1.0 / math.sqrt(2.0), eps: float = 0.1) -> CoefficientFunction:
    """S(x) = (x - z0)|x - z0|**alpha, the test function of the numerical study.

    Its local integral deviation at ``z0`` vanishes identically (the function
    is odd around ``z0``) and its derivative is ``(1 + alpha)|x - z0|**alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")

    def evaluator(x):
        d = np.asarray(x, dtype=float) - z0
        return d * np.abs(d) ** alpha

    beta = 1.0 + alpha
    return CoefficientFunction(evaluator, declared_eps=eps, declared_L=beta, declared_beta=beta,
                               declared_Lstar=beta, name=f"demo-{alpha:g}")


@dataclass(frozen=True)
class NoiseSpec:
    """One of the standardised noise laws, or a user sampler ``sampler(rng, size)``."""

    family: str = "gaussian_unit"
    varsigma: float = 2.0
    sampler: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise ValidationError(f"noise family must be one of {NOISE_FAMILIES}, got {self.family!r}")
        if self.varsigma < 1.0:
            raise ValidationError(f"varsigma must be >= 1, got {self.varsigma}")
        if self.family == "custom" and self.sampler is None:
            raise ValidationError("custom noise needs a sampler(rng, size)")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.family == "gaussian_unit":
            return rng.standard_normal(size)
        if self.family == "uniform_standardized":
            return SQRT3 * rng.uniform(-1.0, 1.0, size)
        if self.family == "exponential_centered":
            return rng.standard_exponential(size) - 1.0
        return np.asarray(self.sampler(rng, size), dtype=float)


def zero_noise() -> NoiseSpec:
    """Test hook: every variate is exactly zero."""
    return NoiseSpec("custom", sampler=lambda rng, size: np.zeros(size))


def make_rng(seed: int, stream: tuple = ()) -> np.random.Generator:
    """PCG64 generator keyed by ``(seed, *stream)``; distinct keys give distinct streams."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, stream)])))


@dataclass(frozen=True)
class ModelConfig:
    """Everything needed to regenerate one trajectory.

    ``stream`` extends the seed with extra integer keys; the Monte Carlo
    harness uses ``(n, replication)``.
    """

    n: int
    coefficient: CoefficientFunction
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    y0: float = 0.0
    stream: tuple = ()

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError(f"n must be an integer >= 2, got {self.n}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not math.isfinite(self.y0):
            raise ValidationError("y0 must be finite")


@dataclass(frozen=True, eq=False)
class Path:
    """A trajectory y_0, ..., y_n.

    ``noise`` holds xi_1..xi_n when the path was simulated; it is ``None``
    for observed data.
    """

    values: np.ndarray
    config: Optional[ModelConfig] = None
    noise: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 3:
            raise ValidationError("a path needs at least y_0, y_1, y_2")
        if self.config is not None and values.size != self.config.n + 1:
            raise ValidationError(f"path length {values.size} != n + 1 = {self.config.n + 1}")
        if self.noise is not None:
            noise = np.ascontiguousarray(self.noise, dtype=float)
            noise.setflags(write=False)
            if noise.size != values.size - 1:
                raise ValidationError("noise must hold exactly n variates")
            object.__setattr__(self, "noise", noise)

    @property
    def n(self) -> int:
        return self.values.size - 1

    @classmethod
    def from_observations(cls, values) -> "Path":
        return cls(np.asarray(values, dtype=float))


def design_coefficients(coefficient: CoefficientFunction, n: int) -> np.ndarray:
    """S(k/n) for k = 1..n, checked for finiteness."""
    x = np.arange(1, n + 1) / n
    s = coefficient.values(x)
    bad = np.flatnonzero(~np.isfinite(s))
    if bad.size:
        k = int(bad[0]) + 1
        raise SimulationError(f"coefficient is not finite at x_{k} = {k}/{n} (value {s[k - 1]})")
    return s


def simulate_path(config: ModelConfig) -> Path:
    rng = make_rng(config.seed, config.stream)
    coef = design_coefficients(config.coefficient, config.n)
    noise = config.noise.sample(rng, config.n)
    y = _kernels.recursion(coef, noise, float(config.y0))
    return Path(y, config, noise)


# --- class verifiers -------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    passed: bool
    grid_size: int
    witness: Optional[float] = None
    reason: str = ""

    def __bool__(self):
        return self.passed


def derivative(f: CoefficientFunction, x, step: float = FD_STEP) -> np.ndarray:
    """Central finite difference, switched to one-sided at the ends of [0, 1]."""
    x = np.asarray(x, dtype=float)
    lo = np.clip(x - step, 0.0, 1.0)
    hi = np.clip(x + step, 0.0, 1.0)
    return (f.values(hi) - f.values(lo)) / (hi - lo)


def verify_stability(f: CoefficientFunction, eps: float, L: float, grid_size: int = 10_001,
                     rtol: float = 1e-6) -> Verdict:
    """Grid certificate for sup|S| <= 1 - eps and sup|S'| <= L.

    ``rtol`` absorbs finite-difference error in the derivative check only.
    """
    if grid_size < 2:
        raise ValidationError(f"grid_size must be >= 2, got {grid_size}")
    x = np.linspace(0.0, 1.0, grid_size)
    s = np.abs(f.values(x))
    over = np.flatnonzero(~(s <= 1.0 - eps))
    if over.size:
        i = int(over[0])
        return Verdict(False, grid_size, float(x[i]), f"|S| = {s[i]:.6g} > 1 - eps = {1 - eps:.6g}")
    ds = np.abs(derivative(f, x))
    over = np.flatnonzero(~(ds <= L * (1.0 + rtol)))
    if over.size:
        i = int(over[0])
        return Verdict(False, grid_size, float(x[i]), f"|S'| = {ds[i]:.6g} > L = {L:.6g}")
    return Verdict(True, grid_size)


def simpson_weights(intervals: int) -> np.ndarray:
    """Composite Simpson weights on [-1, 1]; ``intervals`` is rounded up to even."""
    intervals += intervals % 2
    w = np.ones(intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (2.0 / intervals) / 3.0


def weak_holder_defect(f: CoefficientFunction, z0: float, h: float, quadrature_points: int = 1024) -> float:
    """|integral over [-1, 1] of S(z0 + u h) - S(z0) du| by composite Simpson.

    Compare the result against eps_n * h**beta to decide weak-class membership.
    """
    if quadrature_points < 8:
        raise ValidationError(f"quadrature_points must be >= 8, got {quadrature_points}")
    if not h > 0.0:
        raise ValidationError(f"h must be positive, got {h}")
    if z0 - h < 0.0 or z0 + h > 1.0:
        raise DomainError(f"window [z0 - h, z0 + h] = [{z0 - h:.6g}, {z0 + h:.6g}] leaves [0, 1]")
    w = simpson_weights(quadrature_points)
    u = np.linspace(-1.0, 1.0, w.size)
    g = f.values(z0 + u * h) - float(f.values(np.array([z0]))[0])
    return abs(math.fsum(w * g))


def strong_holder_constant(f: CoefficientFunction, z0: float, alpha: float, grid_size: int = 10_001,
                           min_distance: float = 1e-3) -> float:
    """Grid supremum of |S'(x) - S'(z0)| / |x - z0|**alpha over [0, 1].

    Points closer than ``min_distance`` to ``z0`` are skipped; there the
    finite-difference error dominates the ratio.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if grid_size < 2:
        raise ValidationError(f"grid_size must be >= 2, got {grid_size}")
    x = np.linspace(0.0, 1.0, grid_size)
    x = x[np.abs(x - z0) >= min_distance]
    if x.size == 0:
        return 0.0
    d0 = float(derivative(f, np.array([z0]))[0])
    ratio = np.abs(derivative(f, x) - d0) / np.abs(x - z0) ** alpha
    return float(ratio.max())


def double_factorial(m: int) -> int:
    return math.prod(range(m, 0, -2)) if m > 0 else 1


@dataclass(frozen=True)
class MomentCheck:
    k: int
    moment: float
    std_error: float
    bound: float
    passed: bool


def verify_moment_class(noise: NoiseSpec, varsigma: float = 2.0, k_max: int = 3,
                        sample_size: int = 1_000_000, seed: int = 0) -> list[MomentCheck]:
    """Monte Carlo check of E|xi|^{2k} <= varsigma^k (2k-1)!! for k = 1..k_max.

    A level passes when the estimate minus three standard errors sits below
    the bound.
    """
    if not 1 <= k_max <= 8:
        raise ValidationError(f"k_max must lie in [1, 8], got {k_max}")
    if sample_size < 2:
        raise ValidationError("sample_size must be >= 2")
    xi = noise.sample(make_rng(seed), sample_size)
    sq = xi * xi
    power = np.ones_like(sq)
    out = []
    for k in range(1, k_max + 1):
        power = power * sq
        m = float(power.mean())
        se = float(power.std(ddof=1) / math.sqrt(sample_size))
        bound = varsigma**k * double_factorial(2 * k - 1)
        out.append(MomentCheck(k, m, se, bound, m - 3.0 * se <= bound))
    return out
