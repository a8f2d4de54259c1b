"""Truncated sequential and adaptive kernel estimation for varying-coefficient AR(1) models."""

from .adaptive import (AdaptiveGrid, AdaptiveResult, adaptive_estimate, build_grid, lambda_star, level_estimates,
                       select_index)
from .errors import (DegenerateError, DegeneratePilotError, DomainError, SeqKernelError, SimulationError,
                     ValidationError)
from .experiments import (PUBLISHED_RISKS, RiskExperiment, RiskRow, RiskTable, nonsequential_baseline, preset,
                          rate_check, run_risk)
from .kernel_core import (BandwidthRule, KernelWindow, bandwidth, deviation_rho, indicator_kernel, make_window,
                          partial_sum_A, pilot_size)
from .pilot import PilotResult, gamma, pilot_estimate, project, run_pilot, threshold_H
from .process import (CoefficientFunction, ModelConfig, NoiseSpec, Path, constant_function, demo_function,
                      simulate_path, strong_holder_constant, verify_moment_class, verify_stability,
                      weak_holder_defect, zero_noise)
from .sequential import SequentialResult, estimate_at, sequential_estimate, stopping_time, zeta_diagnostics

__version__ = "0.1.0"
