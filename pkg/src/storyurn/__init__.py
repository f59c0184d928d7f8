"""Story sharing on a platform with endogenous attention: thresholds, limit points and urn simulation."""

from .attention import Thresholds, attention_level, sharing_utility, threshold, thresholds, value
from .dynamics import Policy, Trajectory, region_of, run_batch, sharing_probs, simulate, step
from .limit import LimitAnalysis, analyze, g, ldi_value, quasi_steady_state, quasi_steady_states
from .model import (
    Evocativeness,
    InvalidParamsError,
    KnifeEdgeError,
    ModelParams,
    PlatformState,
    Region,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Evocativeness", "InvalidParamsError", "KnifeEdgeError", "LimitAnalysis", "ModelParams",
    "PlatformState", "Policy", "Region", "Thresholds", "Trajectory", "analyze", "attention_level", "g",
    "ldi_value", "quasi_steady_state", "quasi_steady_states", "region_of", "run_batch", "sharing_probs",
    "sharing_utility", "simulate", "step", "threshold", "thresholds", "validate", "value",
]
