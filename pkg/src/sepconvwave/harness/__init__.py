from .config import ExperimentConfig, parse_config_text
from .evaluation import (
    ErrorIndicator,
    error_indicator,
    predict_fields,
    zero_baseline,
    zoom_evaluate,
)
from .tables import ResultCell, classify_table, emit_tables, format_text_table
from .training import (
    EulerSpec,
    ParamScaler,
    TrainSettings,
    euler_spec_for,
    prepare_inputs,
    prepare_targets,
    train,
)
from .variants import (
    REGULARIZATION_COLUMNS,
    VARIANT_NAMES,
    VariantSpec,
    format_regularization,
    parse_regularization,
)
from .zoo import WIDTH_DEFAULTS, build_model, resolve_widths

__all__ = [
    "ErrorIndicator",
    "EulerSpec",
    "ExperimentConfig",
    "ParamScaler",
    "REGULARIZATION_COLUMNS",
    "ResultCell",
    "TrainSettings",
    "VARIANT_NAMES",
    "VariantSpec",
    "WIDTH_DEFAULTS",
    "build_model",
    "classify_table",
    "emit_tables",
    "error_indicator",
    "euler_spec_for",
    "format_regularization",
    "format_text_table",
    "parse_config_text",
    "parse_regularization",
    "predict_fields",
    "prepare_inputs",
    "prepare_targets",
    "resolve_widths",
    "train",
    "zero_baseline",
    "zoom_evaluate",
]
