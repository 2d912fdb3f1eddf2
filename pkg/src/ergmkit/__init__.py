"""Exponential-family random graph models: specify, simulate, estimate.

The package covers binary and valued networks, dyad-level sample-space
constraints, partially observed networks, Metropolis-Hastings simulation
(numba-jitted with a pure-python fallback, see ERGMKIT_JIT), exhaustive
enumeration for small spaces, and MPLE / exact-MLE / MCMLE fitting. The
`ergmkit` console script exposes the same functionality in batch form.
"""

from .datasets import dataset_names, load_dataset
from .enumeration import EnumTable, allstats, exact_loglik
from .errors import (
    DegeneracyError,
    EnumerationLimitError,
    ErgmkitError,
    EstimationError,
    FormulaError,
    ModelError,
    NetworkError,
    UnsupportedFeatureError,
)
from .infer import (
    FitResult,
    deviance_summary,
    exact_fit,
    fit,
    fit_target_stats,
    mcmle,
    mple,
    predict_probs,
)
from .model import Model, build_model, summary_stats
from .modelspec import ModelSpec, parse_constraints, parse_model
from .network import (
    AttrColumn,
    Network,
    load_network,
    network_from_json,
    network_to_json,
    save_network,
)
from .sampler import ChainConfig, SampleOut, sample, san
from .samplespace import SampleSpace, Universe, build_sample_space

__version__ = "0.1.0"

__all__ = [
    "AttrColumn",
    "ChainConfig",
    "DegeneracyError",
    "EnumTable",
    "EnumerationLimitError",
    "ErgmkitError",
    "EstimationError",
    "FitResult",
    "FormulaError",
    "Model",
    "ModelError",
    "ModelSpec",
    "Network",
    "NetworkError",
    "SampleOut",
    "SampleSpace",
    "Universe",
    "UnsupportedFeatureError",
    "allstats",
    "build_model",
    "build_sample_space",
    "dataset_names",
    "deviance_summary",
    "exact_fit",
    "exact_loglik",
    "fit",
    "fit_target_stats",
    "load_dataset",
    "load_network",
    "mcmle",
    "mple",
    "network_from_json",
    "network_to_json",
    "parse_constraints",
    "parse_model",
    "predict_probs",
    "sample",
    "san",
    "save_network",
    "summary_stats",
    "__version__",
]
