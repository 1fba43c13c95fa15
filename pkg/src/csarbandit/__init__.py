"""Top-k combinatorial bandits with full-bandit feedback: CSAR and Hadamard group estimators."""

from .core import BanditInstance, GapProfile, Noise, RegretLedger, gap_profile, make_instance, pull, pull_mean
from .csar import CSARSelector, CsarConfig, CsarResult, run
from .estimators import (
    EstimateReport,
    EstimationRequest,
    HadamardEstimator,
    LeaveOneOutEstimator,
    RandomDesignEstimator,
    est1,
    est2,
    est_loo,
    est_random_matrix,
    sample_count,
)
from .hadamard import HadamardMatrix, hadamard, smallest_order
from .harness import ExperimentConfig, PresetResult, run_preset
from .theory import SubsetDistribution, bilinear_check, lambda_matrix, rho

__version__ = "0.1.0"

__all__ = [
    "BanditInstance", "GapProfile", "Noise", "RegretLedger", "gap_profile", "make_instance", "pull",
    "pull_mean", "CSARSelector", "CsarConfig", "CsarResult", "run", "EstimateReport",
    "EstimationRequest", "HadamardEstimator", "LeaveOneOutEstimator", "RandomDesignEstimator", "est1",
    "est2", "est_loo", "est_random_matrix", "sample_count", "HadamardMatrix", "hadamard",
    "smallest_order", "ExperimentConfig", "PresetResult", "run_preset", "SubsetDistribution",
    "bilinear_check", "lambda_matrix", "rho",
]
