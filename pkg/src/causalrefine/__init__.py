"""Anomaly-score refinement with causality-graph side information."""

from .errors import (
    AllScoresMissing,
    CausalRefineError,
    CycleDetected,
    DegenerateWeights,
    DimensionMismatch,
    DuplicateEdge,
    EmptyInput,
    NonFiniteEncountered,
    NoSuchPath,
    OverflowRejected,
    SelfLoop,
    SingleClassPool,
    UnknownNode,
)
from .graph import (
    CausalityGraph,
    PolytreeSpec,
    build_graph,
    enumerate_root_paths,
    leaf_density,
    load_graph_json,
    make_polytree,
    polytree_node_count,
    random_dag,
    save_graph_json,
)
from .gradcheck import (
    GradCheckReport,
    finite_difference_gradient,
    run_gradient_check,
)
from .metrics import (
    EvalReport,
    LabeledPool,
    auc_roc,
    run_experiment,
    sweep,
    write_report_json,
    write_reports_csv,
)
from .refine import (
    ConfidencePartition,
    LatentPoint,
    RefineConfig,
    RefineResult,
    ScoreVector,
    check_hard_constraints,
    fidelity,
    gd_step,
    gradient,
    map_latent,
    objective,
    penalty,
    refine,
    refine_many,
    smoothmax,
)
from .simulate import (
    EpochRecord,
    ScenarioSpec,
    corrupt_scores,
    generate,
    generate_arrays,
    sample_anomaly_set,
    write_scenario_csv,
)

__version__ = "0.1.0"
