"""Building polygons, rasterization and the binary change rule.

A pixel is inside a polygon iff its center (column + 0.5, row + 0.5) is
inside the ring under the even-odd rule. A pixel is *changed* iff the
building footprints disagree between the two epochs, or they agree and the
post-event building carries a damage class other than no-damage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DAMAGE_CLASSES = ("no-damage", "minor-damage", "major-damage", "destroyed")
NO_DAMAGE = "no-damage"


@dataclass(frozen=True)
class BuildingPolygon:
    """Closed ring of (x, y) pixel coordinates plus a damage class."""

    vertices: np.ndarray
    damage: str = NO_DAMAGE

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError(f"polygon needs an (N>=3, 2) vertex array, got {v.shape}")
        if self.damage not in DAMAGE_CLASSES:
            raise ValueError(f"unknown damage class {self.damage!r}; expected one of {DAMAGE_CLASSES}")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    @property
    def is_damaged(self) -> bool:
        return self.damage != NO_DAMAGE


def points_in_polygon(vertices: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Even-odd containment test for arrays of points against one ring."""
    verts = np.asarray(vertices, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    inside = np.zeros(xs.shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        crosses = (y1 > ys) != (y2 > ys)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = (x2 - x1) * (ys - y1) / (y2 - y1) + x1
        inside ^= crosses & (xs < xint)
    return inside


def rasterize_polygons(
    polygons: list[BuildingPolygon], height: int, width: int
) -> np.ndarray:
    """Label map: 0 background, else 1-based index of the covering polygon.

    Later polygons overwrite earlier ones where footprints overlap.
    """
    if height < 1 or width < 1:
        raise ValueError(f"raster dimensions must be >= 1, got {height}x{width}")
    labels = np.zeros((height, width), dtype=np.int32)
    if not polygons:
        return labels
    cx = np.arange(width, dtype=np.float64) + 0.5
    cy = np.arange(height, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(cx, cy)
    for idx, poly in enumerate(polygons, start=1):
        labels[points_in_polygon(poly.vertices, gx, gy)] = idx
    return labels


def derive_change_map(
    pre: list[BuildingPolygon],
    post: list[BuildingPolygon],
    height: int,
    width: int,
) -> np.ndarray:
    """Binary change mask from two epochs of building annotations.

    changed(x) = pre_footprint(x) XOR post_footprint(x), or both footprints
    present and the covering post-event polygon is damaged.
    """
    pre_labels = rasterize_polygons(pre, height, width)
    post_labels = rasterize_polygons(post, height, width)
    pre_fp = pre_labels > 0
    post_fp = post_labels > 0
    damaged = np.zeros((height, width), dtype=bool)
    if post:
        dmg = np.array([p.is_damaged for p in post], dtype=bool)
        damaged[post_fp] = dmg[post_labels[post_fp] - 1]
    changed = (pre_fp ^ post_fp) | (pre_fp & post_fp & damaged)
    return changed.astype(np.uint8)
