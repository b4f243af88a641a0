"""Dense convolution and activation primitives.

Feature maps are channels-last: 2D tensors are (H, W, C), 4D correlation
tensors with channels are (Ht, Wt, Hs, Ws, C). Kernels are
(C_out, C_in, *spatial). Accumulation runs in float64 with a fixed tap
order, so outputs are bit-identical across runs.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from ..errors import ShapeError


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def conv2d(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray | None = None,
    stride: int = 1,
    padding: int = 1,
) -> np.ndarray:
    """Multi-channel 2D convolution (cross-correlation) with zero padding."""
    x = np.asarray(x)
    w = np.asarray(weight)
    if x.ndim != 3:
        raise ShapeError(f"conv2d input must be (H, W, C), got {x.shape}")
    if w.ndim != 4 or w.shape[1] != x.shape[2]:
        raise ShapeError(f"kernel {w.shape} incompatible with input {x.shape}")
    h, width, _ = x.shape
    cout, cin, kh, kw = w.shape
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (width + 2 * padding - kw) // stride + 1
    if ho < 1 or wo < 1:
        raise ShapeError(f"conv2d output would be empty for input {x.shape}")
    xp = np.pad(x, ((padding, padding), (padding, padding), (0, 0))).astype(np.float64)
    w64 = w.astype(np.float64)
    acc = np.zeros((ho, wo, cout), dtype=np.float64)
    for ty in range(kh):
        for tx in range(kw):
            patch = xp[ty : ty + (ho - 1) * stride + 1 : stride,
                       tx : tx + (wo - 1) * stride + 1 : stride]
            acc += patch @ w64[:, :, ty, tx].T
    if bias is not None:
        acc += np.asarray(bias, dtype=np.float64)
    return acc.astype(np.float32)


def conv4d(x: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Multi-channel 4D convolution, kernel 3^4, zero padding 1, stride 1.

    Input is (Ht, Wt, Hs, Ws, C_in); output keeps the spatial dims with
    C_out channels.
    """
    x = np.asarray(x)
    w = np.asarray(weight)
    if x.ndim != 5:
        raise ShapeError(f"conv4d input must be (Ht, Wt, Hs, Ws, C), got {x.shape}")
    if w.ndim != 6 or w.shape[2:] != (3, 3, 3, 3):
        raise ShapeError(f"conv4d kernel must be (C_out, C_in, 3, 3, 3, 3), got {w.shape}")
    if w.shape[1] != x.shape[4]:
        raise ShapeError(f"kernel {w.shape} incompatible with input {x.shape}")
    ht, wt, hs, ws, _ = x.shape
    cout = w.shape[0]
    xp = np.pad(x, ((1, 1), (1, 1), (1, 1), (1, 1), (0, 0))).astype(np.float64)
    w64 = w.astype(np.float64)
    acc = np.zeros((ht, wt, hs, ws, cout), dtype=np.float64)
    for a, b, c, d in product(range(3), repeat=4):
        patch = xp[a : a + ht, b : b + wt, c : c + hs, d : d + ws]
        acc += patch @ w64[:, :, a, b, c, d].T
    return acc.astype(np.float32)


def softmax_channels(x: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the trailing channel axis."""
    x64 = np.asarray(x, dtype=np.float64)
    shifted = x64 - x64.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return (e / e.sum(axis=-1, keepdims=True)).astype(np.float32)
