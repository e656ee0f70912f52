"""Canonical binary dataset files and the CSV inspection export.

Layout (little-endian): magic "NSSD", u32 version, config digest, theta low
and high (f64), seed (i64), u32 standardizer flag then 2 means and 2 stds,
u64 trajectory count, then per trajectory: theta, dt, t_final (f64),
u64 length, x0 (2×f64), outputs (length×2 f64 row-major).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from ..const import DATASET_FORMAT_VERSION, DATASET_MAGIC
from ..exceptions import MissingArtifactError, PersistenceError
from ..systems import SourceDataset, Standardizer, SystemParams, Trajectory
from .binary import BinaryReader, BinaryWriter

_LOGGER = logging.getLogger(__name__)

CSV_COLUMNS = ["traj_id", "t", "x1", "x2", "theta"]


@dataclass
class DatasetFile:
    """A source dataset plus the provenance stored alongside it."""

    dataset: SourceDataset
    digest: str = ""
    standardizer: Standardizer | None = None


def encode_dataset(record: DatasetFile) -> bytes:
    """Serialize a dataset record to bytes."""
    dataset = record.dataset
    writer = BinaryWriter()
    writer.raw(DATASET_MAGIC)
    writer.u32(DATASET_FORMAT_VERSION)
    writer.text(record.digest)
    writer.f64(dataset.theta_range[0])
    writer.f64(dataset.theta_range[1])
    writer.i64(dataset.seed)
    writer.u32(int(record.standardizer is not None))
    if record.standardizer is not None:
        writer.floats(np.asarray(record.standardizer.mean))
        writer.floats(np.asarray(record.standardizer.std))

    writer.u64(len(dataset))
    for trajectory in dataset.trajectories:
        params = trajectory.params
        writer.f64(params.theta)
        writer.f64(params.dt)
        writer.f64(params.t_final)
        writer.u64(trajectory.length)
        writer.floats(np.asarray(params.x0))
        writer.floats(trajectory.outputs)
    return writer.getvalue()


def decode_dataset(reader: BinaryReader) -> DatasetFile:
    """Parse a dataset record.

    Raises:
        PersistenceError: on bad magic, version, truncation or inconsistent lengths
    """
    reader.expect_header(DATASET_MAGIC, DATASET_FORMAT_VERSION)
    digest = reader.text()
    theta_range = (reader.f64(), reader.f64())
    seed = reader.i64()
    standardizer = None
    if reader.u32():
        mean = reader.floats((2,))
        std = reader.floats((2,))
        standardizer = Standardizer(mean=tuple(mean), std=tuple(std))

    trajectories = []
    for index in range(reader.u64()):
        theta, dt, t_final = reader.f64(), reader.f64(), reader.f64()
        length = reader.u64()
        x0 = reader.floats((2,))
        outputs = reader.floats((length, 2))
        params = SystemParams(theta=theta, x0=(x0[0], x0[1]), t_final=t_final, dt=dt)
        if params.length != length:
            raise PersistenceError(
                "Stored length disagrees with stored parameters",
                path=reader.path,
                trajectory=index,
            )
        trajectories.append(Trajectory(params=params, outputs=outputs))
    reader.expect_end()

    dataset = SourceDataset(trajectories=trajectories, theta_range=theta_range, seed=seed)
    return DatasetFile(dataset=dataset, digest=digest, standardizer=standardizer)


def save_dataset(record: DatasetFile, path: Path) -> None:
    """Write the canonical binary dataset file."""
    writer = BinaryWriter()
    writer.raw(encode_dataset(record))
    writer.write_to(path)
    _LOGGER.info("Wrote %d trajectories to %s", len(record.dataset), path)


def load_dataset(path: Path) -> DatasetFile:
    """Read a binary dataset file.

    Raises:
        MissingArtifactError: if `path` does not exist
        PersistenceError: if the file is malformed
    """
    if not path.is_file():
        raise MissingArtifactError(f"Dataset not found: {path}", path=str(path))
    record = decode_dataset(BinaryReader.open(path))
    _LOGGER.debug("Loaded %d trajectories from %s", len(record.dataset), path)
    return record


def dataset_frame(trajectories: list[Trajectory]) -> pd.DataFrame:
    """Long-format table with one row per sample."""
    frames = []
    for traj_id, trajectory in enumerate(trajectories):
        params = trajectory.params
        frames.append(
            pd.DataFrame(
                {
                    "traj_id": traj_id,
                    "t": np.arange(trajectory.length) * params.dt,
                    "x1": trajectory.outputs[:, 0],
                    "x2": trajectory.outputs[:, 1],
                    "theta": params.theta,
                }
            )
        )
    if not frames:
        return pd.DataFrame(columns=CSV_COLUMNS)
    return pd.concat(frames, ignore_index=True)[CSV_COLUMNS]


def export_csv(trajectories: list[Trajectory], path: Path, digest: str = "") -> None:
    """Write the inspection CSV, prefixed by a `# config_digest=` line."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            handle.write(f"# config_digest={digest}\n")
            dataset_frame(trajectories).to_csv(
                handle, index=False, float_format="%.17g"
            )
    except OSError as err:
        raise PersistenceError(
            f"Cannot write {path}: {err.strerror}", path=str(path)
        ) from err
