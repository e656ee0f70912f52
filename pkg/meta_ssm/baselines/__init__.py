"""Supervised comparison methods sharing the meta path's model and loss."""

from .supervised import (
    SupervisedResult,
    TransferResult,
    WindowPool,
    adapt_all_layers,
    train_all_noadapt,
    train_query_only,
    train_supervised,
    transfer_pipeline,
)

__all__ = [
    "SupervisedResult",
    "TransferResult",
    "WindowPool",
    "adapt_all_layers",
    "train_all_noadapt",
    "train_query_only",
    "train_supervised",
    "transfer_pipeline",
]
