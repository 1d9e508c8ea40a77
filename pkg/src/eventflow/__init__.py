"""eventflow: sparse dependency graphs over recurring daily events.

Learns, from historical panel data, which earlier events in a day predict
each later event (one L1-penalized GLM per event, earlier events as
candidate regressors), and forecasts the unobserved remainder of a day by
propagating values through the resulting DAG in topological order.
"""

from ._kernels import BACKEND, available_backends
from .builder import CandidateSet, build_graph, enumerate_candidates, fit_node
from .dot import DotOptions, export_dot
from .errors import (
    AllMasked,
    ConfigError,
    CycleDetected,
    Diverged,
    EmptyDesign,
    EventflowError,
    InsufficientHistory,
    InvalidPanel,
    MissingCovariateValue,
    MissingParentValue,
    NonFinite,
    ParseError,
    PredictionOverflow,
    SchemaMismatch,
)
from .evaluate import (
    ErrorCurve,
    Metric,
    abs_pct_of_actual,
    error_curve,
    mae,
    mape,
    mean_baseline,
)
from .events import (
    MINUTES_PER_DAY,
    BuildConfig,
    EventKey,
    LinkFamily,
    PanelDataset,
    Violation,
    sorted_catalog,
    validate_panel,
)
from .glm import (
    DesignMatrix,
    FitResult,
    fit_gaussian_lasso,
    fit_glm,
    fit_path,
    fit_poisson_l1,
    lambda_max,
    make_design,
    select_by_max_parents,
)
from .graph import DependencyGraph, NodeModel, load_model, save_model, topo_sort
from .ingest import (
    CsvSchema,
    IngestReport,
    LongRecord,
    ingest_csv,
    read_config_file,
    write_panel_csv,
)
from .predict import (
    NodeStatus,
    PredictionState,
    predict_as_of,
    predict_node,
    run_propagation,
)
from .simulate import (
    SimEdge,
    SimEvent,
    SimSpec,
    count_style_spec,
    flight_style_spec,
    load_sim_spec,
    random_dag_spec,
    save_sim_spec,
    simulate_panel,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BuildConfig",
    "CandidateSet",
    "ConfigError",
    "CsvSchema",
    "CycleDetected",
    "DependencyGraph",
    "DesignMatrix",
    "Diverged",
    "DotOptions",
    "EmptyDesign",
    "ErrorCurve",
    "EventKey",
    "EventflowError",
    "FitResult",
    "IngestReport",
    "InsufficientHistory",
    "InvalidPanel",
    "LinkFamily",
    "LongRecord",
    "MINUTES_PER_DAY",
    "Metric",
    "MissingCovariateValue",
    "MissingParentValue",
    "NodeModel",
    "NodeStatus",
    "NonFinite",
    "PanelDataset",
    "ParseError",
    "PredictionOverflow",
    "PredictionState",
    "SchemaMismatch",
    "SimEdge",
    "SimEvent",
    "SimSpec",
    "Violation",
    "abs_pct_of_actual",
    "available_backends",
    "build_graph",
    "count_style_spec",
    "enumerate_candidates",
    "error_curve",
    "export_dot",
    "fit_gaussian_lasso",
    "fit_glm",
    "fit_node",
    "fit_path",
    "fit_poisson_l1",
    "flight_style_spec",
    "ingest_csv",
    "lambda_max",
    "load_model",
    "load_sim_spec",
    "mae",
    "make_design",
    "mape",
    "mean_baseline",
    "predict_as_of",
    "predict_node",
    "random_dag_spec",
    "read_config_file",
    "run_propagation",
    "save_model",
    "save_sim_spec",
    "select_by_max_parents",
    "simulate_panel",
    "sorted_catalog",
    "topo_sort",
    "validate_panel",
    "write_panel_csv",
]
