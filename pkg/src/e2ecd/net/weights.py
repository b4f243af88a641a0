"""Named-tensor store with a bit-exact binary container.

Container layout (all integers little-endian)::

    magic "E2CD" | u32 format version | u32 tensor count
    per tensor: u16 name length | UTF-8 name | u8 dtype tag (0 = f32)
                | u8 rank | u32 dims... | row-major LE float32 payload

Saving and loading round-trip byte-identically; tensors keep their
insertion order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ContainerFormatError, MissingParameterError, SchemaError
from .config import ArchConfig

MAGIC = b"E2CD"
FORMAT_VERSION = 1
_DTYPE_F32 = 0


class WeightStore:
    """Ordered mapping from tensor name to a float32 ndarray."""

    def __init__(self):
        self._tensors: dict[str, np.ndarray] = {}

    def add(self, name: str, array: np.ndarray) -> None:
        if name in self._tensors:
            raise ValueError(f"duplicate tensor name {name!r}")
        arr = np.ascontiguousarray(array, dtype=np.float32)
        self._tensors[name] = arr

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._tensors[name]
        except KeyError:
            raise MissingParameterError(name) from None

    def get(self, name: str) -> np.ndarray | None:
        return self._tensors.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __len__(self) -> int:
        return len(self._tensors)

    def names(self) -> list[str]:
        return list(self._tensors)

    def items(self):
        return self._tensors.items()

    # -- container IO -------------------------------------------------------

    def save(self, path: str | Path) -> None:
        chunks = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(self._tensors))]
        for name, arr in self._tensors.items():
            name_b = name.encode("utf-8")
            if len(name_b) > 0xFFFF:
                raise ValueError(f"tensor name too long: {name!r}")
            chunks.append(struct.pack("<H", len(name_b)))
            chunks.append(name_b)
            chunks.append(struct.pack("<BB", _DTYPE_F32, arr.ndim))
            chunks.append(np.asarray(arr.shape, dtype="<u4").tobytes())
            chunks.append(arr.astype("<f4").tobytes())
        Path(path).write_bytes(b"".join(chunks))

    @classmethod
    def load(cls, path: str | Path) -> "WeightStore":
        data = Path(path).read_bytes()
        pos = 0

        def take(n: int, what: str) -> bytes:
            nonlocal pos
            if pos + n > len(data):
                raise ContainerFormatError(f"{path}: truncated while reading {what}", offset=pos)
            out = data[pos : pos + n]
            pos += n
            return out

        if take(4, "magic") != MAGIC:
            raise ContainerFormatError(f"{path}: bad magic bytes", offset=0)
        version, count = struct.unpack("<II", take(8, "header"))
        if version != FORMAT_VERSION:
            raise ContainerFormatError(f"{path}: unsupported format version {version}", offset=4)
        store = cls()
        for _ in range(count):
            (name_len,) = struct.unpack("<H", take(2, "name length"))
            name = take(name_len, "name").decode("utf-8")
            dtype_tag, rank = struct.unpack("<BB", take(2, "dtype/rank"))
            if dtype_tag != _DTYPE_F32:
                raise ContainerFormatError(
                    f"{path}: unknown dtype tag {dtype_tag} for {name!r}", offset=pos - 2
                )
            dims = np.frombuffer(take(4 * rank, "dims"), dtype="<u4").astype(np.int64)
            n_values = int(dims.prod()) if rank else 1
            payload = take(4 * n_values, f"payload of {name!r}")
            arr = np.frombuffer(payload, dtype="<f4").reshape(tuple(dims))
            store.add(name, arr)
        if pos != len(data):
            raise ContainerFormatError(f"{path}: trailing bytes after last tensor", offset=pos)
        return store


def init_weights(seed: int, arch: ArchConfig) -> WeightStore:
    """Deterministic He-style initialization for the full tensor schema.

    Conv kernels draw from N(0, sqrt(2/fan_in)); biases and the final layer
    of every residual head start at zero.
    """
    rng = np.random.default_rng(seed)
    zero_names = arch.zero_initialized()
    store = WeightStore()
    for name, shape in arch.tensor_shapes().items():
        if name.endswith(".bias") or name in zero_names:
            store.add(name, np.zeros(shape, dtype=np.float32))
        else:
            fan_in = int(np.prod(shape[1:]))
            std = np.sqrt(2.0 / fan_in)
            store.add(name, rng.normal(0.0, std, size=shape).astype(np.float32))
    return store


def validate_schema(store: WeightStore, arch: ArchConfig) -> None:
    """Check the store against the architecture's tensor schema.

    Raises :class:`MissingParameterError` for the first absent tensor and
    :class:`SchemaError` for unknown names or shape mismatches.
    """
    shapes = arch.tensor_shapes()
    unknown = sorted(set(store.names()) - set(shapes))
    if unknown:
        raise SchemaError(f"unknown tensors for this architecture: {unknown}")
    for name, shape in shapes.items():
        arr = store.get(name)
        if arr is None:
            raise MissingParameterError(name)
        if arr.shape != shape:
            raise SchemaError(f"tensor {name!r} has shape {arr.shape}, expected {shape}")
