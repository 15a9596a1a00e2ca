"""Prompt robustness evaluation harness."""
from .attacks import AttackConfig, AttackResult, AttackTarget, attack, rank_word_importance
from .datasets import DataRecord, DatasetMeta, load_dataset, register_dataset
from .dyval import DyValSpec, emit_batch, generate as generate_sample, oracle_evaluate
from .engineering import apply_method, get_method
from .models import GenerationParams, ModelEndpoint, batch_generate, generate
from .pipeline import RunRecord, process_output, run_sweep, score
from .prompts import PromptTemplate, get_template, render

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackResult",
    "AttackTarget",
    "DataRecord",
    "DatasetMeta",
    "DyValSpec",
    "GenerationParams",
    "ModelEndpoint",
    "PromptTemplate",
    "RunRecord",
    "apply_method",
    "attack",
    "batch_generate",
    "emit_batch",
    "generate",
    "generate_sample",
    "get_method",
    "get_template",
    "load_dataset",
    "oracle_evaluate",
    "process_output",
    "rank_word_importance",
    "register_dataset",
    "render",
    "run_sweep",
    "score",
]
