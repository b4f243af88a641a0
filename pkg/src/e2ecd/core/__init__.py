"""Deterministic numeric foundations: sampling, warping, affine algebra, IO."""

from .affine import Affine2D
from .fileio import (
    read_flow,
    read_image,
    read_mask,
    write_flow,
    write_image,
    write_mask,
)
from .sampling import (
    bilinear_sample,
    center_crop_to_multiple,
    coordinate_grid,
    ensure_flow,
    ensure_image,
    ensure_mask,
    sample_grid,
    upsample_bilinear,
    upsample_flow,
    warp_by_flow,
)

__all__ = [
    "Affine2D",
    "bilinear_sample",
    "center_crop_to_multiple",
    "coordinate_grid",
    "ensure_flow",
    "ensure_image",
    "ensure_mask",
    "read_flow",
    "read_image",
    "read_mask",
    "sample_grid",
    "upsample_bilinear",
    "upsample_flow",
    "warp_by_flow",
    "write_flow",
    "write_image",
    "write_mask",
]
