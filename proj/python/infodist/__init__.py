"""Compression-based information distance over pluggable entropy models."""

from ._core import (
    InfodistError,
    MockServer,
    Model,
    checksum,
    codelen,
    compress,
    dcg_at_k,
    decompress,
    distance,
    eval_classify,
    eval_rerank,
    eval_sts,
    spearman,
    sts_grid,
)

__all__ = [
    "InfodistError",
    "MockServer",
    "Model",
    "checksum",
    "codelen",
    "compress",
    "dcg_at_k",
    "decompress",
    "distance",
    "eval_classify",
    "eval_rerank",
    "eval_sts",
    "spearman",
    "sts_grid",
]
