from .dag import (
    ARITY,
    TASKS,
    LinearSystem,
    Node,
    TaskDag,
    check_dag,
    oracle_evaluate,
    solve_linear,
)
from .generate import (
    MAX_ATTEMPTS,
    Checker,
    DyValSample,
    DyValSpec,
    describe,
    emit_batch,
    generate,
    regenerate,
    samples_to_records,
    write_dyval_dataset,
)

__all__ = [
    "ARITY",
    "MAX_ATTEMPTS",
    "TASKS",
    "Checker",
    "DyValSample",
    "DyValSpec",
    "LinearSystem",
    "Node",
    "TaskDag",
    "check_dag",
    "describe",
    "emit_batch",
    "generate",
    "oracle_evaluate",
    "regenerate",
    "samples_to_records",
    "solve_linear",
    "write_dyval_dataset",
]
