"""PNG and Middlebury-style .flo file IO.

8-bit PNG intensities map exactly to v/255 on read and round-trip exactly on
write. Binary masks are stored as 0/255 grayscale PNGs. Flow files use the
Middlebury layout: float32 tag 202021.25, little-endian int32 width and
height, then width*height interleaved (u, v) float32 pairs.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import ContainerFormatError
from .sampling import ensure_flow, ensure_image, ensure_mask

FLOW_TAG = np.float32(202021.25)
_MAX_FLOW_DIM = 1 << 20


def read_image(path: str | os.PathLike) -> np.ndarray:
    """Read an 8-bit grayscale or RGB PNG as float32 (H, W, C) in [0, 1]."""
    with Image.open(path) as im:
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)[..., None]
        elif im.mode == "RGB":
            arr = np.asarray(im, dtype=np.uint8)
        else:
            raise ValueError(f"unsupported PNG mode {im.mode!r} in {path} (want L or RGB)")
    return arr.astype(np.float32) / np.float32(255.0)


def write_image(path: str | os.PathLike, image: np.ndarray) -> None:
    """Write a float32 [0, 1] raster as an 8-bit PNG (1 or 3 channels)."""
    img = ensure_image(image)
    q = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    if q.shape[2] == 1:
        Image.fromarray(q[..., 0], mode="L").save(path, format="PNG")
    elif q.shape[2] == 3:
        Image.fromarray(q, mode="RGB").save(path, format="PNG")
    else:
        raise ValueError(f"PNG output supports 1 or 3 channels, got {q.shape[2]}")


def read_mask(path: str | os.PathLike) -> np.ndarray:
    """Read a 0/255 grayscale PNG as a uint8 {0, 1} mask."""
    with Image.open(path) as im:
        if im.mode != "L":
            raise ValueError(f"mask PNG must be grayscale, got mode {im.mode!r} in {path}")
        arr = np.asarray(im, dtype=np.uint8)
    bad = ~np.isin(arr, (0, 255))
    if bad.any():
        raise ValueError(f"mask PNG {path} contains values other than 0/255")
    return (arr == 255).astype(np.uint8)


def write_mask(path: str | os.PathLike, mask: np.ndarray) -> None:
    m = ensure_mask(mask)
    Image.fromarray((m * np.uint8(255)), mode="L").save(path, format="PNG")


def read_flow(path: str | os.PathLike) -> np.ndarray:
    """Read a Middlebury .flo file as a float32 (H, W, 2) field."""
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise ContainerFormatError(f"{path}: truncated header", offset=len(data))
    tag = np.frombuffer(data, dtype="<f4", count=1, offset=0)[0]
    if tag != FLOW_TAG:
        raise ContainerFormatError(f"{path}: bad flow tag {tag!r}", offset=0)
    w = int(np.frombuffer(data, dtype="<i4", count=1, offset=4)[0])
    h = int(np.frombuffer(data, dtype="<i4", count=1, offset=8)[0])
    if not (0 < w <= _MAX_FLOW_DIM and 0 < h <= _MAX_FLOW_DIM):
        raise ContainerFormatError(f"{path}: implausible dimensions {w}x{h}", offset=4)
    expected = 12 + w * h * 2 * 4
    if len(data) != expected:
        raise ContainerFormatError(
            f"{path}: expected {expected} bytes for {w}x{h} flow, got {len(data)}",
            offset=min(len(data), expected),
        )
    flat = np.frombuffer(data, dtype="<f4", count=w * h * 2, offset=12)
    return flat.reshape(h, w, 2).astype(np.float32)


def write_flow(path: str | os.PathLike, flow: np.ndarray) -> None:
    flo = ensure_flow(flow)
    h, w, _ = flo.shape
    with open(path, "wb") as f:
        f.write(FLOW_TAG.tobytes())
        f.write(np.array([w, h], dtype="<i4").tobytes())
        f.write(flo.astype("<f4").tobytes())
