"""Conditional-sum-of-squares estimation of stationary long-memory FARIMA models."""

from .asymptotics import InformationMatrix, information_matrix, score_vector_integrand, standard_errors
from .css import (Bounds, EstimationResult, gradient, hessian, idealized_score, minimize, objective,
                  residuals)
from .errors import ContractError, ModelError, NumericalError, ValidationError
from .model import (CoefficientTable, ModelOrder, ModelSpec, ParamVector, ar_coefficients,
                    arma_star_expansion, autocovariance, coefficient_table, fractional_coefficients,
                    ma_coefficients, spectral_density, validate, zeta_coefficients)
from .montecarlo import (MonteCarloConfig, MonteCarloReport, consistency_path, run_experiment,
                         score_replacement_diagnostic, truncation_diagnostic)
from .simulation import (InnovationLaw, TimeSeries, draw_innovations, simulate_exact_gaussian,
                         simulate_truncated_ma)
from .whittle import objective_gap, sample_autocovariances, whittle_estimate, whittle_objective

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "CoefficientTable",
    "ContractError",
    "EstimationResult",
    "InformationMatrix",
    "InnovationLaw",
    "ModelError",
    "ModelOrder",
    "ModelSpec",
    "MonteCarloConfig",
    "MonteCarloReport",
    "NumericalError",
    "ParamVector",
    "TimeSeries",
    "ValidationError",
    "ar_coefficients",
    "arma_star_expansion",
    "autocovariance",
    "coefficient_table",
    "consistency_path",
    "draw_innovations",
    "fractional_coefficients",
    "gradient",
    "hessian",
    "idealized_score",
    "information_matrix",
    "ma_coefficients",
    "minimize",
    "objective",
    "objective_gap",
    "residuals",
    "run_experiment",
    "sample_autocovariances",
    "score_replacement_diagnostic",
    "score_vector_integrand",
    "simulate_exact_gaussian",
    "simulate_truncated_ma",
    "spectral_density",
    "standard_errors",
    "truncation_diagnostic",
    "validate",
    "whittle_estimate",
    "whittle_objective",
    "zeta_coefficients",
]
