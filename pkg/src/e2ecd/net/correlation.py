"""Correlation volumes: global cosine similarity, mutual-match suppression,
neighborhood consensus filtering and windowed local correlation.

A 4D correlation volume is indexed (i, j, k, l): (i, j) walks the target
feature grid, (k, l) the source grid.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from .ops import conv4d, relu
from .weights import WeightStore

_NORM_EPS = 1e-12


def global_correlation(ft: np.ndarray, fs: np.ndarray) -> np.ndarray:
    """All-pairs cosine similarity between target and source feature vectors.

    Positions whose feature norm falls below 1e-12 contribute zero
    similarity at all of their entries.
    """
    ft = np.asarray(ft)
    fs = np.asarray(fs)
    if ft.ndim != 3 or fs.ndim != 3 or ft.shape[2] != fs.shape[2]:
        raise ShapeError(f"feature maps {ft.shape} and {fs.shape} must share channels")

    def unit(f: np.ndarray) -> np.ndarray:
        f64 = f.astype(np.float64)
        norms = np.linalg.norm(f64, axis=-1, keepdims=True)
        out = np.zeros_like(f64)
        np.divide(f64, norms, out=out, where=norms >= _NORM_EPS)
        return out

    tn = unit(ft).reshape(-1, ft.shape[2])
    sn = unit(fs).reshape(-1, fs.shape[2])
    corr = tn @ sn.T
    return corr.reshape(ft.shape[:2] + fs.shape[:2]).astype(np.float32)


def mutual_matching(corr: np.ndarray) -> np.ndarray:
    """Suppress non-reciprocal matches by the product of max-ratio scores.

    The volume is clamped at zero first so the slice maxima are
    well-defined; all-zero slices yield zero ratios.
    """
    c = np.maximum(np.asarray(corr, dtype=np.float64), 0.0)
    max_over_target = c.max(axis=(0, 1), keepdims=True)
    max_over_source = c.max(axis=(2, 3), keepdims=True)
    rs = np.zeros_like(c)
    rt = np.zeros_like(c)
    np.divide(c, max_over_target, out=rs, where=max_over_target > 0)
    np.divide(c, max_over_source, out=rt, where=max_over_source > 0)
    return (rs * rt * c).astype(np.float32)


def transpose_corr(corr: np.ndarray) -> np.ndarray:
    """Swap the target and source index pairs: out[i,j,k,l] = in[k,l,i,j]."""
    return np.transpose(corr, (2, 3, 0, 1))


def neighborhood_consensus(c_hat: np.ndarray, weights: WeightStore) -> np.ndarray:
    """Symmetrized 4D-convolutional filtering of the correlation volume.

    Computes N(c) + T(N(T(c))) where T swaps the image roles, making the
    result independent of the input image order up to that transpose.
    """

    def n(x: np.ndarray) -> np.ndarray:
        y = x[..., None]
        y = relu(conv4d(y, weights["consensus.conv1.weight"]))
        y = relu(conv4d(y, weights["consensus.conv2.weight"]))
        y = conv4d(y, weights["consensus.conv3.weight"])
        return y[..., 0]

    c = np.asarray(c_hat, dtype=np.float32)
    return n(c) + transpose_corr(n(transpose_corr(c)))


def local_correlation(ft: np.ndarray, fs_warped: np.ndarray, radius: int) -> np.ndarray:
    """Dot-product similarity over a (2r+1)^2 displacement window.

    Output channel order is the row-major scan of displacements
    (dy, dx) in [-r, r]^2; displaced reads beyond the border contribute 0.
    Scores are raw dot products, not normalized.
    """
    ft = np.asarray(ft)
    fs = np.asarray(fs_warped)
    if ft.shape != fs.shape:
        raise ShapeError(f"feature maps {ft.shape} and {fs.shape} must match")
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    h, w, _ = ft.shape
    r = int(radius)
    side = 2 * r + 1
    fp = np.pad(fs, ((r, r), (r, r), (0, 0))).astype(np.float64)
    t64 = ft.astype(np.float64)
    out = np.zeros((h, w, side * side), dtype=np.float64)
    ch = 0
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            shifted = fp[r + dy : r + dy + h, r + dx : r + dx + w]
            out[..., ch] = np.einsum("hwc,hwc->hw", t64, shifted)
            ch += 1
    return out.astype(np.float32)
