"""Exact and Monte Carlo Shapley values for black-box models.

Estimators: Castro permutation sampling, Owen sampling over the
multilinear extension, and its antithetic Halved Owen variant.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ALGORITHMS,
    Game,
    SamplingBudget,
    ShapleyVector,
    apply_mask,
    baseline_vector,
    coalition_mask,
    feature_vector,
    make_game,
    with_feature,
)
from .errors import (  # noqa: E402
    BudgetError,
    ConfigurationError,
    DimensionError,
    NumericError,
    ParseError,
    ShapleyError,
)
from .exact import ExactConfig, exact_integral_shapley, exact_multilinear_e, exact_shapley  # noqa: E402
from .models import (  # noqa: E402
    DatasetTable,
    MlpModel,
    load_dataset,
    load_model,
    mlp_forward,
    random_mlp,
    synthetic_game,
)
from .samplers import (  # noqa: E402
    budget_to_params,
    castro_sample,
    estimate,
    halved_owen_sample,
    owen_sample,
)

__all__ = [
    "ALGORITHMS",
    "BudgetError",
    "ConfigurationError",
    "DatasetTable",
    "DimensionError",
    "ExactConfig",
    "Game",
    "MlpModel",
    "NumericError",
    "ParseError",
    "SamplingBudget",
    "ShapleyError",
    "ShapleyVector",
    "apply_mask",
    "baseline_vector",
    "budget_to_params",
    "castro_sample",
    "coalition_mask",
    "estimate",
    "exact_integral_shapley",
    "exact_multilinear_e",
    "exact_shapley",
    "feature_vector",
    "halved_owen_sample",
    "load_dataset",
    "load_model",
    "make_game",
    "mlp_forward",
    "owen_sample",
    "random_mlp",
    "synthetic_game",
    "with_feature",
]
