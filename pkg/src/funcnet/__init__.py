"""Functional neural networks on basis-expanded curve data."""

from .basis import (
    BasisSystem,
    Covariate,
    FunctionalDataSet,
    RawCurves,
    basis_derivative,
    basis_eval,
    bspline_basis,
    curve_eval,
    fourier_basis,
    smooth_curves,
)
from .datafiles import (
    load_curves,
    load_labels,
    load_model,
    load_table,
    load_tensor,
    save_curves,
    save_model,
    save_table,
    save_tensor,
)
from .errors import DomainError, FuncnetError, NumericalError, ValidationError
from .model import (
    FnnConfig,
    FnnModel,
    FunctionalWeight,
    curve_predictions,
    fit,
    functional_weights,
    parameter_count,
    predict,
    summary,
)
from .network import LayerSpec, TrainConfig, TrainHistory
from .quadrature import (
    DesignMatrix,
    QuadratureRule,
    integral_features,
    simpson,
    simpson_rule,
    standardize,
    unstandardize,
)
from .selection import (
    CvResult,
    FoldPlan,
    TuneResult,
    cross_validate,
    expand_grid,
    make_folds,
    tune,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSystem",
    "Covariate",
    "CvResult",
    "DesignMatrix",
    "DomainError",
    "FnnConfig",
    "FnnModel",
    "FoldPlan",
    "FuncnetError",
    "FunctionalDataSet",
    "FunctionalWeight",
    "LayerSpec",
    "NumericalError",
    "QuadratureRule",
    "RawCurves",
    "TrainConfig",
    "TrainHistory",
    "TuneResult",
    "ValidationError",
    "basis_derivative",
    "basis_eval",
    "bspline_basis",
    "cross_validate",
    "curve_eval",
    "curve_predictions",
    "expand_grid",
    "fit",
    "fourier_basis",
    "functional_weights",
    "integral_features",
    "load_curves",
    "load_labels",
    "load_model",
    "load_table",
    "load_tensor",
    "make_folds",
    "parameter_count",
    "predict",
    "save_curves",
    "save_model",
    "save_table",
    "save_tensor",
    "simpson",
    "simpson_rule",
    "smooth_curves",
    "standardize",
    "summary",
    "tune",
    "unstandardize",
]
