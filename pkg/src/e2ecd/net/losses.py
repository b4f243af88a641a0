"""Multi-scale class-balanced cross entropy and flow endpoint error."""

from __future__ import annotations

import numpy as np

from ..core.sampling import ensure_flow, ensure_mask
from ..errors import ShapeError, UndefinedMetricError

_LOG_EPS = 1e-7


def _pool(mask: np.ndarray, factor: int, reduce) -> np.ndarray:
    h, w = mask.shape
    if h % factor or w % factor:
        raise ShapeError(f"mask {mask.shape} not divisible by pooling factor {factor}")
    blocks = mask.reshape(h // factor, factor, w // factor, factor)
    return reduce(reduce(blocks, axis=3), axis=1)


def max_pool_labels(labels: np.ndarray, factor: int) -> np.ndarray:
    """Downsample labels so any positive in a block stays positive."""
    return _pool(ensure_mask(labels), factor, np.max)


def min_pool_validity(mask: np.ndarray, factor: int) -> np.ndarray:
    """Downsample validity so a block is valid only if fully valid."""
    return _pool(ensure_mask(mask), factor, np.min)


def class_balanced_ce(
    p_levels: list[np.ndarray], gt: np.ndarray, mask: np.ndarray
) -> float:
    """Mean over levels of the class-balanced cross entropy.

    Ground truth is max-pooled and validity min-pooled to each level's
    resolution. Per level, with y the pooled label, p = (p_unchanged,
    p_changed) and beta the negative fraction among valid pixels:

        loss = -sum_valid[ beta*y*log(p_c) + (1-beta)*(1-y)*log(p_u) ] / n_valid

    Log arguments are clamped at 1e-7. Levels without valid pixels are
    excluded from the mean; if no level has valid pixels the loss is 0.
    """
    gt = ensure_mask(gt)
    mask = ensure_mask(mask)
    if gt.shape != mask.shape:
        raise ShapeError(f"labels {gt.shape} and mask {mask.shape} differ")
    per_level = []
    for p in p_levels:
        p = np.asarray(p)
        if p.ndim != 3 or p.shape[2] != 2:
            raise ShapeError(f"probability map must be (H, W, 2), got {p.shape}")
        if gt.shape[0] % p.shape[0] or gt.shape[1] % p.shape[1]:
            raise ShapeError(f"level {p.shape[:2]} does not divide {gt.shape}")
        factor = gt.shape[0] // p.shape[0]
        if gt.shape[1] // p.shape[1] != factor:
            raise ShapeError("anisotropic level scaling is not supported")
        y = max_pool_labels(gt, factor).astype(np.float64)
        valid = min_pool_validity(mask, factor).astype(bool)
        n_valid = int(valid.sum())
        if n_valid == 0:
            continue
        n_pos = float((y[valid] == 1).sum())
        n_neg = float(n_valid - n_pos)
        beta = n_neg / (n_pos + n_neg)
        log_pc = np.log(np.maximum(p[..., 1].astype(np.float64), _LOG_EPS))
        log_pu = np.log(np.maximum(p[..., 0].astype(np.float64), _LOG_EPS))
        term = beta * y * log_pc + (1.0 - beta) * (1.0 - y) * log_pu
        per_level.append(-float(term[valid].sum()) / n_valid)
    if not per_level:
        return 0.0
    return float(np.mean(per_level))


def flow_epe(flow: np.ndarray, gt: np.ndarray, mask: np.ndarray) -> float:
    """Mean endpoint error in pixels over valid positions."""
    flow = ensure_flow(flow)
    gt = ensure_flow(gt)
    mask = ensure_mask(mask)
    if flow.shape != gt.shape or flow.shape[:2] != mask.shape:
        raise ShapeError(
            f"flow {flow.shape}, ground truth {gt.shape} and mask {mask.shape} disagree"
        )
    valid = mask == 1
    if not valid.any():
        raise UndefinedMetricError("endpoint error undefined: validity mask is empty")
    diff = flow.astype(np.float64) - gt.astype(np.float64)
    err = np.hypot(diff[..., 0], diff[..., 1])
    return float(err[valid].mean())
