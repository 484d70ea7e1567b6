"""Randomized point-based POMDP value iteration with near-duplicate belief filtering."""

from .core import (
    AlphaVector,
    DimensionMismatch,
    ImpossibleObservation,
    PomdpModel,
    ValueFunction,
    belief_update,
    immediate_reward_vector,
    validate_model,
)
from .evaluate import EvalConfig, EvalResult, run_episode, sample_rewards
from .filter import CountTooLarge, FilterReport, filter_beliefs, is_similar, subsample
from .kernels import BACKEND
from .parser import ParseDiagnostic, PomdpParseError, load_model, parse_pomdp, write_pomdp
from .sampler import BeliefSet, sample_belief_set, sample_successor
from .solver import (
    DegenerateDenominator,
    SolveConfig,
    SolveResult,
    backup,
    convergence_metric,
    initial_value_function,
    perseus_stage,
    solve,
    value_at,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaVector",
    "DimensionMismatch",
    "ImpossibleObservation",
    "PomdpModel",
    "ValueFunction",
    "belief_update",
    "immediate_reward_vector",
    "validate_model",
    "EvalConfig",
    "EvalResult",
    "run_episode",
    "sample_rewards",
    "CountTooLarge",
    "FilterReport",
    "filter_beliefs",
    "is_similar",
    "subsample",
    "BACKEND",
    "ParseDiagnostic",
    "PomdpParseError",
    "load_model",
    "parse_pomdp",
    "write_pomdp",
    "BeliefSet",
    "sample_belief_set",
    "sample_successor",
    "DegenerateDenominator",
    "SolveConfig",
    "SolveResult",
    "backup",
    "convergence_metric",
    "initial_value_function",
    "perseus_stage",
    "solve",
    "value_at",
    "__version__",
]
