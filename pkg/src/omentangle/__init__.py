"""Steady-state Gaussian entanglement of a two-polarization, two-resonator
optomechanical system.

All rates and frequencies are expressed in units of the mechanical
frequency ``omega_m``; angles are in radians unless stated otherwise.
"""

from omentangle.errors import (
    ConvergenceError,
    IntegrationDivergence,
    MonogamyWarning,
    NumericalError,
    UnstableSystemError,
)
from omentangle.model import (
    MeanField,
    StabilityReport,
    SystemParams,
    build_diffusion_matrix,
    build_drift_matrix,
    check_stability,
    effective_couplings,
    mean_field_steady_state,
)
from omentangle.lyapunov import (
    integrate_covariance,
    lyapunov_residual,
    solve_steady_covariance,
    steady_state,
)
from omentangle.gaussian import (
    EntanglementResult,
    Mode,
    contangle,
    extract_submatrix,
    log_negativity,
    min_residual_contangle,
    nu_minus_two_mode,
    partial_transpose,
    residual_contangle,
    symplectic_eigenvalues,
)
from omentangle.darkmode import DarkModeReport, classify_regime, hybridized_couplings

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DarkModeReport",
    "EntanglementResult",
    "IntegrationDivergence",
    "MeanField",
    "Mode",
    "MonogamyWarning",
    "NumericalError",
    "StabilityReport",
    "SystemParams",
    "UnstableSystemError",
    "build_diffusion_matrix",
    "build_drift_matrix",
    "check_stability",
    "classify_regime",
    "contangle",
    "effective_couplings",
    "extract_submatrix",
    "hybridized_couplings",
    "integrate_covariance",
    "log_negativity",
    "lyapunov_residual",
    "mean_field_steady_state",
    "min_residual_contangle",
    "nu_minus_two_mode",
    "partial_transpose",
    "residual_contangle",
    "solve_steady_covariance",
    "steady_state",
    "symplectic_eigenvalues",
]
