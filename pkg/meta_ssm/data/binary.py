"""Little-endian record reader/writer shared by the dataset and checkpoint files."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..exceptions import PersistenceError
from ..types import Tensor

_FLOAT = np.dtype("<f8")


class BinaryWriter:
    """Accumulates a binary record in memory."""

    def __init__(self) -> None:
        """Initialize an empty buffer."""
        self._chunks: list[bytes] = []

    def raw(self, data: bytes) -> None:
        """Append raw bytes."""
        self._chunks.append(data)

    def u32(self, value: int) -> None:
        """Append an unsigned 32-bit integer."""
        self._chunks.append(struct.pack("<I", value))

    def u64(self, value: int) -> None:
        """Append an unsigned 64-bit integer."""
        self._chunks.append(struct.pack("<Q", value))

    def i64(self, value: int) -> None:
        """Append a signed 64-bit integer."""
        self._chunks.append(struct.pack("<q", value))

    def f64(self, value: float) -> None:
        """Append a 64-bit float."""
        self._chunks.append(struct.pack("<d", value))

    def text(self, value: str) -> None:
        """Append a u32 length followed by UTF-8 bytes."""
        encoded = value.encode("utf-8")
        self.u32(len(encoded))
        self._chunks.append(encoded)

    def floats(self, values: Tensor) -> None:
        """Append a row-major f64 block without a header."""
        self._chunks.append(np.ascontiguousarray(values, dtype=_FLOAT).tobytes())

    def getvalue(self) -> bytes:
        """Return the accumulated record."""
        return b"".join(self._chunks)

    def write_to(self, path: Path) -> None:
        """Write the record to `path`, creating parent directories."""
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(self.getvalue())
        except OSError as err:
            raise PersistenceError(
                f"Cannot write {path}: {err.strerror}", path=str(path)
            ) from err


class BinaryReader:
    """Sequential reader over a binary record."""

    def __init__(self, data: bytes, path: str | None = None) -> None:
        """Initialize the reader at offset 0."""
        self._data = data
        self._offset = 0
        self.path = path

    @classmethod
    def open(cls, path: Path) -> BinaryReader:
        """Read the whole file at `path`."""
        try:
            return cls(path.read_bytes(), str(path))
        except OSError as err:
            raise PersistenceError(
                f"Cannot read {path}: {err.strerror}", path=str(path)
            ) from err

    @property
    def exhausted(self) -> bool:
        """True once every byte has been consumed."""
        return self._offset == len(self._data)

    def raw(self, size: int) -> bytes:
        """Consume `size` bytes."""
        end = self._offset + size
        if end > len(self._data):
            raise PersistenceError(
                "File is truncated",
                path=self.path,
                offset=self._offset,
                wanted=size,
            )
        chunk = self._data[self._offset : end]
        self._offset = end
        return chunk

    def _unpack(self, fmt: str) -> int | float:
        value: int | float = struct.unpack(fmt, self.raw(struct.calcsize(fmt)))[0]
        return value

    def u32(self) -> int:
        """Consume an unsigned 32-bit integer."""
        return int(self._unpack("<I"))

    def u64(self) -> int:
        """Consume an unsigned 64-bit integer."""
        return int(self._unpack("<Q"))

    def i64(self) -> int:
        """Consume a signed 64-bit integer."""
        return int(self._unpack("<q"))

    def f64(self) -> float:
        """Consume a 64-bit float."""
        return float(self._unpack("<d"))

    def text(self) -> str:
        """Consume a length-prefixed UTF-8 string."""
        size = self.u32()
        try:
            return self.raw(size).decode("utf-8")
        except UnicodeDecodeError as err:
            raise PersistenceError("Invalid UTF-8 string", path=self.path) from err

    def floats(self, shape: tuple[int, ...]) -> Tensor:
        """Consume a row-major f64 block of the given shape."""
        count = int(np.prod(shape, dtype=np.int64))
        block = np.frombuffer(self.raw(count * _FLOAT.itemsize), dtype=_FLOAT)
        return block.astype(np.float64).reshape(shape)

    def expect_header(self, magic: bytes, version: int) -> None:
        """Validate magic bytes and the format version.

        Raises:
            PersistenceError: on a magic or version mismatch
        """
        found = self.raw(len(magic))
        if found != magic:
            raise PersistenceError(
                "Unrecognized file type",
                path=self.path,
                expected=magic.decode("ascii"),
                found=found.decode("ascii", errors="replace"),
            )
        found_version = self.u32()
        if found_version != version:
            raise PersistenceError(
                f"Unsupported format version {found_version}",
                path=self.path,
                supported=version,
            )

    def expect_end(self) -> None:
        """Raise if trailing bytes remain."""
        if not self.exhausted:
            raise PersistenceError(
                "Unexpected trailing data",
                path=self.path,
                remaining=len(self._data) - self._offset,
            )
