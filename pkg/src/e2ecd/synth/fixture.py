"""Procedurally generated demo corpus.

Builds a small registered corpus of smooth synthetic scenes with rectangular
"buildings", so the repository and test suite ship no real imagery. Each
pair contains an unchanged building, a damaged one (same footprint,
damage class set post-event) and a relocated one, which guarantees a healthy
number of positive change pixels.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from ..core.fileio import write_image
from .corpus import ManifestEntry, write_manifest
from .polygons import points_in_polygon

_EVENTS = ("storm-demo", "quake-demo")
_SPLITS = ("train", "hold", "test")


def _rect(x0: float, y0: float, w: float, h: float) -> np.ndarray:
    return np.array([[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h]], dtype=np.float64)


def _rect_wkt(v: np.ndarray) -> str:
    pts = ", ".join(f"{x:g} {y:g}" for x, y in np.vstack([v, v[:1]]))
    return f"POLYGON (({pts}))"


def _paint(image: np.ndarray, vertices: np.ndarray, color: np.ndarray) -> None:
    h, w, _ = image.shape
    cx = np.arange(w, dtype=np.float64) + 0.5
    cy = np.arange(h, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(cx, cy)
    inside = points_in_polygon(vertices, gx, gy)
    image[inside] = color


def _background(rng: np.random.Generator, size: int) -> np.ndarray:
    noise = rng.uniform(0.0, 1.0, size=(size, size, 3))
    smooth = gaussian_filter(noise, sigma=(8, 8, 0))
    lo, hi = smooth.min(), smooth.max()
    return (0.25 + 0.4 * (smooth - lo) / max(hi - lo, 1e-9)).astype(np.float32)


def make_fixture_corpus(
    corpus_dir: str | Path, n_pairs: int = 3, size: int = 64, seed: int = 7
) -> list[ManifestEntry]:
    """Write a registered input corpus of ``n_pairs`` synthetic scenes."""
    d = Path(corpus_dir)
    d.mkdir(parents=True, exist_ok=True)
    entries = []
    for k in range(n_pairs):
        rng = np.random.default_rng([seed, k])
        stem = f"scene{k:03d}"
        event = _EVENTS[k % len(_EVENTS)]
        split = _SPLITS[k % len(_SPLITS)]
        bg = _background(rng, size)

        side = size / 4.0
        margin = size / 8.0
        span = size - 2 * margin - side

        def spot():
            return margin + rng.uniform(0, span), margin + rng.uniform(0, span)

        kept = _rect(*spot(), side, side)
        damaged = _rect(*spot(), side, side)
        moved_pre = _rect(*spot(), side, side)
        moved_post = _rect(*spot(), side, side)
        colors = rng.uniform(0.65, 0.95, size=(3, 3))

        pre = bg.copy()
        post = bg.copy()
        for img, polys in ((pre, (kept, damaged, moved_pre)), (post, (kept, damaged, moved_post))):
            for verts, color in zip(polys, colors):
                _paint(img, verts, color.astype(np.float32))
        # mild blur keeps the scenes band-limited so resampling stays accurate
        pre = gaussian_filter(pre, sigma=(0.8, 0.8, 0)).astype(np.float32)
        post = gaussian_filter(post, sigma=(0.8, 0.8, 0)).astype(np.float32)

        write_image(d / f"{stem}_pre.png", pre)
        write_image(d / f"{stem}_post.png", post)
        pre_doc = {
            "buildings": [
                {"wkt": _rect_wkt(kept), "damage": "no-damage"},
                {"wkt": _rect_wkt(damaged), "damage": "no-damage"},
                {"wkt": _rect_wkt(moved_pre), "damage": "no-damage"},
            ]
        }
        post_doc = {
            "buildings": [
                {"wkt": _rect_wkt(kept), "damage": "no-damage"},
                {"wkt": _rect_wkt(damaged), "damage": "major-damage"},
                {"wkt": _rect_wkt(moved_post), "damage": "no-damage"},
            ]
        }
        for name, doc in ((f"{stem}_pre.json", pre_doc), (f"{stem}_post.json", post_doc)):
            with open(d / name, "w", encoding="utf-8") as f:
                json.dump(doc, f, indent=2)
                f.write("\n")
        entries.append(ManifestEntry(stem, event, split))
    write_manifest(d, entries)
    return entries


def band_limited_image(
    height: int, width: int, channels: int = 1, seed: int = 0, harmonics: int = 4
) -> np.ndarray:
    """Smooth low-frequency test image, useful for resampling-error checks."""
    rng = np.random.default_rng(seed)
    ys, xs = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    out = np.zeros((height, width, channels), dtype=np.float64)
    for c in range(channels):
        acc = np.zeros((height, width))
        for _ in range(harmonics):
            fx = rng.uniform(0.2, 1.5) / max(width, 1)
            fy = rng.uniform(0.2, 1.5) / max(height, 1)
            phase = rng.uniform(0, 2 * np.pi)
            amp = rng.uniform(0.5, 1.0)
            acc += amp * np.sin(2 * np.pi * (fx * xs + fy * ys) + phase)
        lo, hi = acc.min(), acc.max()
        out[..., c] = (acc - lo) / max(hi - lo, 1e-9)
    return out.astype(np.float32)
