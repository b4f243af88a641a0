"""Seeded random affine transforms simulating viewpoint differences.

Each (seed, index) pair owns an independent deterministic random stream, so
samples can be generated in any order or in parallel without changing the
result. Parameters are drawn uniformly from their configured ranges in a
fixed order: rotation, scale, shear, translation x, translation y. The
transform acts about the image center ((W-1)/2, (H-1)/2) and maps
unregistered-source coordinates to registered-source coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.affine import Affine2D

_DET_EPS = 1e-8
_MAX_RESAMPLE = 100


@dataclass(frozen=True)
class AffineSamplingConfig:
    max_rotation_deg: float = 25.0
    scale_range: tuple[float, float] = (0.8, 1.25)
    max_translation_frac: float = 0.1
    max_shear_deg: float = 10.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.scale_range
        if not (0.0 < lo <= hi):
            raise ValueError(f"scale_range must satisfy 0 < min <= max, got {self.scale_range}")
        for name in ("max_rotation_deg", "max_translation_frac", "max_shear_deg"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit an unsigned 64-bit integer")


def sample_affine(
    config: AffineSamplingConfig, index: int, height: int, width: int
) -> Affine2D:
    """Deterministic affine draw for sample ``index`` at the given image size.

    Translation components are uniform in
    [-max_translation_frac, +max_translation_frac] * min(height, width).
    Degenerate draws (|det| <= 1e-8) are redrawn internally.
    """
    if index < 0:
        raise ValueError("index must be >= 0")
    rng = np.random.default_rng([int(config.seed), int(index)])
    max_t = config.max_translation_frac * min(height, width)
    center = ((width - 1) / 2.0, (height - 1) / 2.0)
    for _ in range(_MAX_RESAMPLE):
        rotation = rng.uniform(-config.max_rotation_deg, config.max_rotation_deg)
        scale = rng.uniform(*config.scale_range)
        shear = rng.uniform(-config.max_shear_deg, config.max_shear_deg)
        tx = rng.uniform(-max_t, max_t)
        ty = rng.uniform(-max_t, max_t)
        t = Affine2D.from_params(
            rotation_deg=rotation,
            scale=scale,
            shear_deg=shear,
            translation=(tx, ty),
            center=center,
        )
        if abs(t.det) > _DET_EPS:
            return t
    raise RuntimeError("failed to sample an invertible affine transform")
