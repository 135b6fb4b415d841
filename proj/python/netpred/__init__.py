"""Mixed graphical models, mixed VAR models and nodewise predictability.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from ._core import (
    Dataset,
    DataError,
    MgmModel,
    NumericalError,
    PredictabilityReport,
    UsageError,
    VarModel,
    __version__,
    accuracy,
    categorical_probabilities,
    cli_main,
    evaluate,
    export_dot,
    fit_mgm,
    fit_mvar,
    load_csv,
    load_model,
    marginal_accuracy,
    normalized_accuracy,
    population_r2,
    r_squared,
    render_svg,
    sample_ggm,
    sample_ising,
    simulate_var,
    spring_layout,
)

__all__ = [
    "Dataset",
    "DataError",
    "MgmModel",
    "NumericalError",
    "PredictabilityReport",
    "UsageError",
    "VarModel",
    "__version__",
    "accuracy",
    "categorical_probabilities",
    "cli_main",
    "evaluate",
    "export_dot",
    "fit_mgm",
    "fit_mvar",
    "load_csv",
    "load_model",
    "marginal_accuracy",
    "normalized_accuracy",
    "population_r2",
    "r_squared",
    "render_svg",
    "sample_ggm",
    "sample_ising",
    "simulate_var",
    "spring_layout",
]
