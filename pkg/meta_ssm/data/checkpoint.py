"""Binary checkpoint files for trained models.

Layout (little-endian): magic "NSSM", u32 version, architecture block
(u32 H, H_p, n_y, n_z, hidden count, widths), metadata (config digest,
method, u64 iteration, u32 standardizer flag then n_y means and n_y stds),
u32 layer count, then per layer: name, u32 rank, u64 dims, f64 data.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..const import CHECKPOINT_FORMAT_VERSION, CHECKPOINT_MAGIC
from ..exceptions import MissingArtifactError, PersistenceError
from ..model import ArchitectureSpec, NeuralSSM
from ..systems import Standardizer
from .binary import BinaryReader, BinaryWriter

_LOGGER = logging.getLogger(__name__)


@dataclass
class Checkpoint:
    """A model with the provenance needed to resume or evaluate it."""

    model: NeuralSSM
    method: str
    digest: str = ""
    iteration: int = 0
    standardizer: Standardizer | None = None


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    """Serialize a checkpoint to bytes."""
    spec = checkpoint.model.spec
    writer = BinaryWriter()
    writer.raw(CHECKPOINT_MAGIC)
    writer.u32(CHECKPOINT_FORMAT_VERSION)

    for size in (spec.history_length, spec.horizon, spec.output_dim, spec.latent_dim):
        writer.u32(size)
    writer.u32(len(spec.hidden_widths))
    for width in spec.hidden_widths:
        writer.u32(width)

    writer.text(checkpoint.digest)
    writer.text(checkpoint.method)
    writer.u64(checkpoint.iteration)
    standardizer = checkpoint.standardizer
    writer.u32(int(standardizer is not None))
    if standardizer is not None:
        writer.floats(np.asarray(standardizer.mean))
        writer.floats(np.asarray(standardizer.std))

    writer.u32(len(checkpoint.model.parameters))
    for name, value in checkpoint.model:
        writer.text(name)
        writer.u32(value.ndim)
        for dim in value.shape:
            writer.u64(dim)
        writer.floats(value)
    return writer.getvalue()


def decode_checkpoint(reader: BinaryReader) -> Checkpoint:
    """Parse a checkpoint record.

    Raises:
        PersistenceError: on bad magic, version, truncation or layer mismatch
    """
    reader.expect_header(CHECKPOINT_MAGIC, CHECKPOINT_FORMAT_VERSION)
    history_length, horizon, output_dim, latent_dim = (reader.u32() for _ in range(4))
    hidden = tuple(reader.u32() for _ in range(reader.u32()))
    spec = ArchitectureSpec(
        history_length=history_length,
        horizon=horizon,
        output_dim=output_dim,
        latent_dim=latent_dim,
        hidden_widths=hidden,
    )

    digest = reader.text()
    method = reader.text()
    iteration = reader.u64()
    standardizer = None
    if reader.u32():
        mean = reader.floats((output_dim,))
        std = reader.floats((output_dim,))
        standardizer = Standardizer(mean=tuple(mean), std=tuple(std))

    parameters = {}
    for _ in range(reader.u32()):
        name = reader.text()
        shape = tuple(reader.u64() for _ in range(reader.u32()))
        parameters[name] = reader.floats(shape)
    reader.expect_end()

    expected = spec.layer_shapes()
    if list(parameters) != list(expected) or any(
        parameters[name].shape != shape for name, shape in expected.items()
    ):
        raise PersistenceError(
            "Checkpoint layers do not match its architecture",
            path=reader.path,
            layers=list(parameters),
        )
    return Checkpoint(
        model=NeuralSSM(spec, parameters),
        method=method,
        digest=digest,
        iteration=iteration,
        standardizer=standardizer,
    )


def save_checkpoint(checkpoint: Checkpoint, path: Path) -> None:
    """Write a checkpoint file; save->load is bit-exact."""
    writer = BinaryWriter()
    writer.raw(encode_checkpoint(checkpoint))
    writer.write_to(path)
    _LOGGER.debug(
        "Saved %s checkpoint at iteration %d to %s",
        checkpoint.method,
        checkpoint.iteration,
        path,
    )


def load_checkpoint(path: Path) -> Checkpoint:
    """Read a checkpoint file.

    Raises:
        MissingArtifactError: if `path` does not exist
        PersistenceError: if the file is malformed
    """
    if not path.is_file():
        raise MissingArtifactError(f"Checkpoint not found: {path}", path=str(path))
    checkpoint = decode_checkpoint(BinaryReader.open(path))
    _LOGGER.debug("Loaded %s checkpoint from %s", checkpoint.method, path)
    return checkpoint
