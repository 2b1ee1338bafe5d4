"""Early final-accuracy estimation for neural-network training runs.

Fits a saturating curve to the validation accuracies a run reports as it
trains, predicts the accuracy the run would reach if trained to completion,
and says when the prediction has settled enough to stop the run early.
"""

from .analyzer import (
    AnalyzerConfig,
    DatasetProfile,
    DecisionKind,
    EngineDecision,
    analyze,
    never_learn_threshold,
)
from .baseline import baseline_stop_epoch
from .curve import CurveParams, ParamBox, default_box, evaluate, partials
from .engine import Engine, Session, handle_line, parse_request, response_line
from .errors import CurvecastError
from .fitting import FitConfig, FitResult, FitStatus, fit
from .history import History, PerformanceTuple, rescale_epochs
from .metrics import (
    ModelOutcome,
    distribution_summary,
    epochs_saved,
    mean_accuracy_diff,
    savings_histogram,
    throughput_gain,
    top_overlap,
)
from .replay import EngineOutcome, replay_corpus, replay_trace
from .synth import (
    CurveKind,
    CurveSpec,
    LossModel,
    PopulationGroup,
    draw_population_specs,
    generate_corpus,
    generate_trace,
)
from .traces import Trace, TraceCorpus, TraceRow, load_corpus, save_corpus

__version__ = "0.1.0"

__all__ = [
    "AnalyzerConfig",
    "CurveKind",
    "CurveParams",
    "CurveSpec",
    "CurvecastError",
    "DatasetProfile",
    "DecisionKind",
    "Engine",
    "EngineDecision",
    "EngineOutcome",
    "FitConfig",
    "FitResult",
    "FitStatus",
    "History",
    "LossModel",
    "ModelOutcome",
    "ParamBox",
    "PerformanceTuple",
    "PopulationGroup",
    "Session",
    "Trace",
    "TraceCorpus",
    "TraceRow",
    "analyze",
    "baseline_stop_epoch",
    "default_box",
    "distribution_summary",
    "draw_population_specs",
    "epochs_saved",
    "evaluate",
    "fit",
    "generate_corpus",
    "generate_trace",
    "handle_line",
    "load_corpus",
    "mean_accuracy_diff",
    "never_learn_threshold",
    "parse_request",
    "partials",
    "replay_corpus",
    "replay_trace",
    "rescale_epochs",
    "response_line",
    "save_corpus",
    "savings_histogram",
    "throughput_gain",
    "top_overlap",
]
