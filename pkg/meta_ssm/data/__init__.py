"""Dataset and checkpoint persistence."""

from .binary import BinaryReader, BinaryWriter
from .checkpoint import (
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from .dataset_io import (
    DatasetFile,
    dataset_frame,
    decode_dataset,
    encode_dataset,
    export_csv,
    load_dataset,
    save_dataset,
)

__all__ = [
    "BinaryReader",
    "BinaryWriter",
    "Checkpoint",
    "DatasetFile",
    "dataset_frame",
    "decode_checkpoint",
    "decode_dataset",
    "encode_checkpoint",
    "encode_dataset",
    "export_csv",
    "load_checkpoint",
    "load_dataset",
    "save_checkpoint",
    "save_dataset",
]
