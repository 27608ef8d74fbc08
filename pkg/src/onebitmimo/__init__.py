"""Channel estimation from one-bit quantized MIMO pilot observations.

Optimal (posterior-mean) and Bussgang-linear channel estimates from sign
quantized pilots, the Gaussian orthant machinery behind them, a structural
test for when the two coincide, and a Monte Carlo harness for
MSE-versus-SNR sweeps.
"""

from .channel_models import bessel_tx_covariance, exponential_covariance
from .estimators import (
    Estimate,
    PrecisionC,
    blmmse_estimate,
    blmmse_operator,
    build_c,
    linear_mmse_special_case,
    mmse_estimate,
    mmse_linear_operator,
    mmse_simo3,
    simo3_closed_batch,
)
from .exceptions import (
    AccuracyError,
    AssumptionError,
    CapabilityError,
    DimensionError,
    DomainError,
    NotPositiveDefiniteError,
    SingularMatrixError,
)
from .model import (
    SecondOrderStats,
    SystemDims,
    SystemModel,
    build_pilot_model,
    sample_realization,
    sample_realizations,
    second_order_stats,
    snr_of,
    trial_rng,
)
from .optimality import CouplingWitness, OptimalityVerdict, is_blmmse_optimal
from .orthant import (
    TruncatedMeanResult,
    orthant_probability,
    orthant_probability_mc,
    positive_orthant_mean,
    positive_orthant_mean_mc,
    standardize,
    truncated_mean_cf_2d,
)
from .quantizer import (
    QuantizedObservation,
    normalized_sign_covariance,
    observation_from_signs,
    quantize,
    sign_diagonals,
)
from .simulate import (
    MseSweepResult,
    SweepConfig,
    SweepRow,
    build_covariance,
    build_pilots,
    build_point,
    emit_results,
    render_csv,
    run_mse_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "AssumptionError",
    "CapabilityError",
    "CouplingWitness",
    "DimensionError",
    "DomainError",
    "Estimate",
    "MseSweepResult",
    "NotPositiveDefiniteError",
    "OptimalityVerdict",
    "PrecisionC",
    "QuantizedObservation",
    "SecondOrderStats",
    "SingularMatrixError",
    "SweepConfig",
    "SweepRow",
    "SystemDims",
    "SystemModel",
    "TruncatedMeanResult",
    "bessel_tx_covariance",
    "blmmse_estimate",
    "blmmse_operator",
    "build_c",
    "build_covariance",
    "build_pilot_model",
    "build_pilots",
    "build_point",
    "emit_results",
    "exponential_covariance",
    "is_blmmse_optimal",
    "linear_mmse_special_case",
    "mmse_estimate",
    "mmse_linear_operator",
    "mmse_simo3",
    "normalized_sign_covariance",
    "observation_from_signs",
    "orthant_probability",
    "orthant_probability_mc",
    "positive_orthant_mean",
    "positive_orthant_mean_mc",
    "quantize",
    "render_csv",
    "run_mse_sweep",
    "sample_realization",
    "sample_realizations",
    "second_order_stats",
    "sign_diagonals",
    "simo3_closed_batch",
    "snr_of",
    "standardize",
    "trial_rng",
    "truncated_mean_cf_2d",
]
