"""Stochastic message-exchange simulator with importance-driven responses
and an odd/even polarization regime, plus the metrics built on its logs."""

__version__ = "0.1.0"

from .config import NEVER, ConfigError, SimulationConfig  # noqa: E402
from .eventlog import EventLog  # noqa: E402
from .experiment import ExperimentSpec, MetricBundle, SweepSummary, rank_halves, run_sweep, run_two_phase  # noqa: E402
from .metrics import (  # noqa: E402
    RatioSeries,
    TriggerMatrix,
    cross_group_fraction,
    group_ratio_series,
    node_scores,
    relative_scores,
    trigger_matrix,
)
from .model import (  # noqa: E402
    EdgeSnapshot,
    Regime,
    StepOutcome,
    apply_increments,
    generate_basal_edges,
    generate_response_edges,
    init_importance,
    response_probability,
    run,
    sample_responses,
    signed_importance_view,
    step,
)
