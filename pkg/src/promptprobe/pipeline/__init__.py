from .metrics import METRICS, accuracy, drop_rate, exact_match, macro_f1, score
from .parsing import UNPARSED, extract_freeform, normalize, normalize_freeform, process_output
from .records import (
    RunRecord,
    RunWriter,
    SampleResult,
    compute_metrics,
    read_run_dir,
    read_run_file,
    recompute_metrics,
    validate_line,
)
from .sweep import Cell, build_plan, execute_cell, plan_run_id, run_cell, run_sweep, validate_plan

__all__ = [
    "METRICS",
    "UNPARSED",
    "Cell",
    "RunRecord",
    "RunWriter",
    "SampleResult",
    "accuracy",
    "build_plan",
    "compute_metrics",
    "drop_rate",
    "exact_match",
    "execute_cell",
    "extract_freeform",
    "macro_f1",
    "normalize",
    "normalize_freeform",
    "plan_run_id",
    "process_output",
    "read_run_dir",
    "read_run_file",
    "recompute_metrics",
    "run_cell",
    "run_sweep",
    "score",
    "validate_line",
    "validate_plan",
]
