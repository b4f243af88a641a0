"""Bilinear sampling, flow warping and bilinear upsampling.

Array conventions used across the package:

* raster image: float32 array of shape (H, W, C); intensities in [0, 1] for
  imagery, unbounded for feature maps;
* flow field: float32 array of shape (H, W, 2) holding (u, v) pixel
  displacements in x (columns) and y (rows), in the pixel units of the
  field's own resolution;
* binary mask: uint8 array of shape (H, W) with values in {0, 1}.

Sampling outside the image rectangle follows the zero-padding convention:
out-of-bounds corners contribute zero to the interpolation. Reductions
accumulate in float64 and results are cast back to float32, so outputs are
bit-identical for identical inputs.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError


def ensure_image(arr: np.ndarray) -> np.ndarray:
    """Validate and return a float32 (H, W, C) raster."""
    a = np.asarray(arr)
    if a.ndim != 3 or a.shape[0] < 1 or a.shape[1] < 1 or a.shape[2] < 1:
        raise ShapeError(f"raster image must be (H, W, C) with positive dims, got {a.shape}")
    return np.ascontiguousarray(a, dtype=np.float32)


def ensure_flow(arr: np.ndarray) -> np.ndarray:
    """Validate and return a float32 (H, W, 2) flow field."""
    a = np.asarray(arr)
    if a.ndim != 3 or a.shape[2] != 2:
        raise ShapeError(f"flow field must be (H, W, 2), got {a.shape}")
    return np.ascontiguousarray(a, dtype=np.float32)


def ensure_mask(arr: np.ndarray) -> np.ndarray:
    """Validate and return a uint8 (H, W) mask with values in {0, 1}."""
    a = np.asarray(arr)
    if a.ndim != 2:
        raise ShapeError(f"mask must be (H, W), got {a.shape}")
    a = a.astype(np.uint8, copy=False)
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError("mask values must be 0 or 1")
    return np.ascontiguousarray(a)


def coordinate_grid(height: int, width: int) -> np.ndarray:
    """Float64 (H, W, 2) grid of (x, y) pixel coordinates."""
    xs = np.arange(width, dtype=np.float64)
    ys = np.arange(height, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx, gy], axis=-1)


def sample_grid(image: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinearly sample ``image`` at float coordinates, zero padding outside.

    ``xs`` and ``ys`` are broadcast-compatible float arrays; the result has
    their shape plus a trailing channel axis. Integer in-bounds coordinates
    return the exact pixel value.
    """
    img = ensure_image(image)
    h, w, c = img.shape
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    acc = np.zeros(xs.shape + (c,), dtype=np.float64)
    corners = (
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    )
    for dx, dy, weight in corners:
        cx = x0 + dx
        cy = y0 + dy
        inb = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
        vals = img[np.clip(cy, 0, h - 1), np.clip(cx, 0, w - 1)]
        acc += (weight * inb)[..., None] * vals.astype(np.float64)
    return acc.astype(np.float32)


def bilinear_sample(image: np.ndarray, x: float, y: float) -> np.ndarray:
    """Sample one point; returns the (C,) channel vector at (x, y)."""
    return sample_grid(image, np.float64(x), np.float64(y))


def warp_by_flow(source: np.ndarray, flow: np.ndarray) -> np.ndarray:
    """Warp ``source`` so that output(x) = source(x + flow(x)).

    The zero flow is an exact identity. Raises :class:`ShapeError` if the
    source and flow resolutions differ.
    """
    src = ensure_image(source)
    flo = ensure_flow(flow)
    if src.shape[:2] != flo.shape[:2]:
        raise ShapeError(
            f"source {src.shape[:2]} and flow {flo.shape[:2]} resolutions differ"
        )
    grid = coordinate_grid(*src.shape[:2])
    xs = grid[..., 0] + flo[..., 0].astype(np.float64)
    ys = grid[..., 1] + flo[..., 1].astype(np.float64)
    return sample_grid(src, xs, ys)


def upsample_bilinear(raster: np.ndarray, factor: int) -> np.ndarray:
    """Corner-aligned bilinear upsampling by an integer factor.

    Output corners sample exactly the input corners, so constant rasters stay
    constant and factor 1 is the identity.
    """
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ValueError(f"upsampling factor must be a positive integer, got {factor!r}")
    img = ensure_image(raster)
    h, w, _ = img.shape
    ho, wo = h * int(factor), w * int(factor)
    xs = np.zeros(wo) if w == 1 else np.arange(wo, dtype=np.float64) * ((w - 1) / (wo - 1))
    ys = np.zeros(ho) if h == 1 else np.arange(ho, dtype=np.float64) * ((h - 1) / (ho - 1))
    gx, gy = np.meshgrid(xs, ys)
    return sample_grid(img, gx, gy)


def center_crop_to_multiple(arr: np.ndarray, multiple: int) -> tuple[np.ndarray, tuple[int, int]]:
    """Center-crop the leading two axes to the largest multiple of ``multiple``.

    Returns the cropped array and the (row, column) crop offset.
    """
    h, w = arr.shape[:2]
    nh = (h // multiple) * multiple
    nw = (w // multiple) * multiple
    if nh == 0 or nw == 0:
        raise ShapeError(f"array {arr.shape} smaller than crop multiple {multiple}")
    oy = (h - nh) // 2
    ox = (w - nw) // 2
    return arr[oy : oy + nh, ox : ox + nw], (oy, ox)


def upsample_flow(flow: np.ndarray, factor: int) -> np.ndarray:
    """Upsample a flow field and rescale displacements to the new pixel units.

    Displacements are stored in the field's own resolution, so doubling the
    resolution doubles every displacement value.
    """
    flo = ensure_flow(flow)
    up = upsample_bilinear(flo, factor)
    return (up.astype(np.float64) * float(factor)).astype(np.float32)
