"""Reference feature extractor producing a four-level pyramid.

One stride-2 stem convolution followed by four stride-2 stages (3x3 conv +
ReLU each) yields feature maps at 1/4, 1/8, 1/16 and 1/32 of the input
resolution with the configured channel counts. Source and target images run
through the same weights, so identical inputs give identical pyramids.
"""

from __future__ import annotations

import numpy as np

from ..core.sampling import ensure_image
from ..errors import ShapeError
from .config import ArchConfig
from .ops import conv2d, relu
from .weights import WeightStore


def extract_features(
    image: np.ndarray, weights: WeightStore, arch: ArchConfig
) -> list[np.ndarray]:
    """Return pyramid levels [F^1, F^2, F^3, F^4], finest to coarsest."""
    img = ensure_image(image)
    h, w, c = img.shape
    if h % 32 or w % 32:
        raise ShapeError(f"input dimensions must be divisible by 32, got {h}x{w}")
    if c != arch.in_channels:
        raise ShapeError(f"expected {arch.in_channels} input channels, got {c}")
    x = relu(conv2d(img, weights["extractor.stem.weight"],
                    weights["extractor.stem.bias"], stride=2))
    levels = []
    for k in range(1, 5):
        x = relu(conv2d(x, weights[f"extractor.stage{k}.weight"],
                        weights[f"extractor.stage{k}.bias"], stride=2))
        levels.append(x)
    return levels
