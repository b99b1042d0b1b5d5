"""Desk-scale student fine-tuning on emitted table-to-text training files."""

from .errors import (
    CheckpointLoadFailure,
    FinetuneError,
    InputFormatMismatch,
    MalformedTrainingFile,
)
from .generate import GenerationRecord, generate, read_inputs
from .tokenizer import SPECIAL_TOKENS, WordTokenizer
from .train import TrainConfig, init_checkpoint, load_checkpoint, train

__version__ = "0.1.0"

__all__ = [
    "CheckpointLoadFailure",
    "FinetuneError",
    "InputFormatMismatch",
    "MalformedTrainingFile",
    "GenerationRecord",
    "generate",
    "read_inputs",
    "SPECIAL_TOKENS",
    "WordTokenizer",
    "TrainConfig",
    "init_checkpoint",
    "load_checkpoint",
    "train",
]
