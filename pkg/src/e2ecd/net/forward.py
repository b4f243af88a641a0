"""Forward pass: coarse global matching, per-level local refinement, and the
final upsampling to full resolution.

The coarsest flow comes from a soft-argmax over the filtered global
correlation volume plus a small learned refinement whose final layer starts
at zero, so a freshly initialized network reproduces the pure soft-argmax
flow. Each finer level upsamples the previous flow, warps the source
features, correlates locally, and predicts a residual flow update together
with a two-channel change probability map.
"""

from __future__ import annotations

import numpy as np

from ..core.sampling import upsample_bilinear, upsample_flow, warp_by_flow
from ..errors import ShapeError
from .config import ArchConfig
from .correlation import (
    global_correlation,
    local_correlation,
    mutual_matching,
    neighborhood_consensus,
)
from .features import extract_features
from .ops import conv2d, relu, softmax_channels
from .weights import WeightStore


def softargmax_flow(corr: np.ndarray, temperature: float) -> np.ndarray:
    """Expected displacement under a softmax over source positions.

    For target pixel (i, j) the distribution runs over all (k, l); the flow
    is (E[l] - j, E[k] - i) in (u, v) = (x, y) order.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    c = np.asarray(corr, dtype=np.float64)
    if c.ndim != 4:
        raise ShapeError(f"correlation volume must be 4D, got {c.shape}")
    ht, wt, hs, ws = c.shape
    logits = (c / float(temperature)).reshape(ht, wt, hs * ws)
    logits -= logits.max(axis=-1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=-1, keepdims=True)
    p = p.reshape(ht, wt, hs, ws)
    ks = np.arange(hs, dtype=np.float64)
    ls = np.arange(ws, dtype=np.float64)
    ek = np.einsum("ijkl,k->ij", p, ks)
    el = np.einsum("ijkl,l->ij", p, ls)
    u = el - np.arange(wt, dtype=np.float64)[None, :]
    v = ek - np.arange(ht, dtype=np.float64)[:, None]
    return np.stack([u, v], axis=-1).astype(np.float32)


def default_temperature(corr_shape: tuple[int, ...]) -> float:
    """Auto temperature: 1/sqrt(#source positions in the score map)."""
    hs, ws = corr_shape[2], corr_shape[3]
    return 1.0 / float(np.sqrt(hs * ws))


def head4(
    c_tilde: np.ndarray, weights: WeightStore, temperature: float | None = None
) -> np.ndarray:
    """Coarsest-level flow: soft-argmax plus a zero-initialized refinement.

    The refinement takes the initial flow and the per-pixel peak consensus
    score; with fresh weights its final layer is zero, so the output equals
    the soft-argmax flow exactly.
    """
    c = np.asarray(c_tilde, dtype=np.float32)
    tau = default_temperature(c.shape) if temperature is None else float(temperature)
    w_init = softargmax_flow(c, tau)
    peak = c.max(axis=(2, 3))
    x = np.concatenate([w_init, peak[..., None]], axis=-1)
    y = relu(conv2d(x, weights["head4.refine.conv1.weight"],
                    weights["head4.refine.conv1.bias"]))
    residual = conv2d(y, weights["head4.refine.conv2.weight"],
                      weights["head4.refine.conv2.bias"])
    return w_init + residual


def _conv_stack(x: np.ndarray, weights: WeightStore, prefix: str) -> np.ndarray:
    y = relu(conv2d(x, weights[f"{prefix}.conv1.weight"], weights[f"{prefix}.conv1.bias"]))
    y = relu(conv2d(y, weights[f"{prefix}.conv2.weight"], weights[f"{prefix}.conv2.bias"]))
    return conv2d(y, weights[f"{prefix}.conv3.weight"], weights[f"{prefix}.conv3.bias"])


def l_module_forward(
    fs: np.ndarray,
    ft: np.ndarray,
    w_next: np.ndarray,
    weights: WeightStore,
    level: int,
    radius: int = 4,
) -> tuple[np.ndarray, np.ndarray]:
    """One refinement level: returns (flow, change probability map).

    Steps: upsample the coarser flow (x2), warp the source features by it,
    correlate locally around each position, predict a residual flow update
    from the correlation scores, and classify change from the absolute
    feature difference.
    """
    if level not in (1, 2, 3):
        raise ValueError(f"level must be 1, 2 or 3, got {level}")
    w_up = upsample_flow(w_next, 2)
    if w_up.shape[:2] != fs.shape[:2]:
        raise ShapeError(
            f"upsampled flow {w_up.shape[:2]} does not match features {fs.shape[:2]}"
        )
    fs_warped = warp_by_flow(fs, w_up)
    corr = local_correlation(ft, fs_warped, radius)
    flow_in = np.concatenate([corr, w_up], axis=-1)
    w_i = w_up + _conv_stack(flow_in, weights, f"l{level}.flow")
    diff = np.abs(fs_warped.astype(np.float64) - ft.astype(np.float64)).astype(np.float32)
    logits = _conv_stack(diff, weights, f"l{level}.cd")
    p_i = softmax_channels(logits)
    return w_i, p_i


def renormalize_prob(p: np.ndarray) -> np.ndarray:
    """Rescale a two-channel map so channels sum to one at every pixel."""
    p64 = np.asarray(p, dtype=np.float64)
    s = p64.sum(axis=-1, keepdims=True)
    s = np.where(s > 0, s, 1.0)
    return (p64 / s).astype(np.float32)


def e2ecd_forward(
    source: np.ndarray,
    target: np.ndarray,
    weights: WeightStore,
    arch: ArchConfig | None = None,
) -> dict[str, np.ndarray]:
    """Full forward pass over an unregistered image pair.

    Returns flows w4..w1 plus the full-resolution w0, change probability
    maps p3..p1 plus the full-resolution p0.
    """
    arch = arch or ArchConfig()
    src = np.asarray(source)
    tgt = np.asarray(target)
    if src.shape != tgt.shape:
        raise ShapeError(f"source {src.shape} and target {tgt.shape} shapes differ")
    pyr_s = extract_features(src, weights, arch)
    pyr_t = extract_features(tgt, weights, arch)

    corr = global_correlation(pyr_t[3], pyr_s[3])
    c_tilde = neighborhood_consensus(mutual_matching(corr), weights)
    out: dict[str, np.ndarray] = {}
    out["w4"] = head4(c_tilde, weights, arch.temperature)

    w_next = out["w4"]
    for level in (3, 2, 1):
        w_next, p_level = l_module_forward(
            pyr_s[level - 1], pyr_t[level - 1], w_next, weights, level, arch.radius
        )
        out[f"w{level}"] = w_next
        out[f"p{level}"] = p_level

    out["w0"] = upsample_flow(out["w1"], 4)
    out["p0"] = renormalize_prob(upsample_bilinear(out["p1"], 4))
    return out
