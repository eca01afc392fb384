"""Research idea generation, sandboxed validation, and tournament selection."""

from .arena import (
    CRITERIA,
    JudgingContext,
    MatchRecord,
    RatingTable,
    SelectionResult,
    elo_ratings,
    reference_accuracy,
    swiss_select,
)
from .databank import DatasetEntry, DatasetKind, Registry, load_registry, metadata_block
from .errors import IdeaforgeError
from .gateway import (
    ChatRequest,
    HTTPProvider,
    Message,
    ProviderPair,
    RecordingProvider,
    ReplayProvider,
    Stage,
    make_request,
)
from .generation import FileLiteratureProvider, GenerationJob, run_campaign
from .ideas import Idea, LiteratureItem, Topic, make_idea, parse_idea_batch
from .metrics import krippendorff_alpha, pearson, win_rate_ztest
from .sandbox import Limits, ScriptResult, run_script
from .store import RunStore, export_run, import_run
from .validation import (
    FeasibilityVerdict,
    HypothesisVerdict,
    TraceStep,
    ValidationRecord,
    check_feasibility,
    score_pilot,
    summarize_trace,
    validate_hypotheses,
)

__version__ = "0.1.0"

__all__ = [
    "CRITERIA",
    "ChatRequest",
    "DatasetEntry",
    "DatasetKind",
    "FeasibilityVerdict",
    "FileLiteratureProvider",
    "GenerationJob",
    "HTTPProvider",
    "HypothesisVerdict",
    "Idea",
    "IdeaforgeError",
    "JudgingContext",
    "Limits",
    "LiteratureItem",
    "MatchRecord",
    "Message",
    "ProviderPair",
    "RatingTable",
    "RecordingProvider",
    "Registry",
    "ReplayProvider",
    "RunStore",
    "ScriptResult",
    "SelectionResult",
    "Stage",
    "Topic",
    "TraceStep",
    "ValidationRecord",
    "check_feasibility",
    "elo_ratings",
    "export_run",
    "import_run",
    "krippendorff_alpha",
    "load_registry",
    "make_idea",
    "make_request",
    "metadata_block",
    "parse_idea_batch",
    "pearson",
    "reference_accuracy",
    "run_campaign",
    "run_script",
    "score_pilot",
    "summarize_trace",
    "swiss_select",
    "validate_hypotheses",
    "win_rate_ztest",
]
