"""FOFE span-based named entity recognition."""

from ._core import (
    Error,
    Model,
    decode,
    encode,
    evaluate,
    parse_conll,
    profiles,
    run_cli,
    train,
    uniqueness_check,
)

__all__ = [
    "Error",
    "Model",
    "decode",
    "encode",
    "evaluate",
    "parse_conll",
    "profiles",
    "run_cli",
    "train",
    "uniqueness_check",
]
