"""Deterministic forward-pass implementation of the correspondence + change network."""

from .config import ArchConfig, parse_keyvalue_file
from .correlation import (
    global_correlation,
    local_correlation,
    mutual_matching,
    neighborhood_consensus,
    transpose_corr,
)
from .features import extract_features
from .forward import (
    default_temperature,
    e2ecd_forward,
    head4,
    l_module_forward,
    renormalize_prob,
    softargmax_flow,
)
from .losses import class_balanced_ce, flow_epe, max_pool_labels, min_pool_validity
from .ops import conv2d, conv4d, relu, softmax_channels
from .weights import WeightStore, init_weights, validate_schema

__all__ = [
    "ArchConfig",
    "WeightStore",
    "class_balanced_ce",
    "conv2d",
    "conv4d",
    "default_temperature",
    "e2ecd_forward",
    "extract_features",
    "flow_epe",
    "global_correlation",
    "head4",
    "init_weights",
    "l_module_forward",
    "local_correlation",
    "max_pool_labels",
    "min_pool_validity",
    "mutual_matching",
    "neighborhood_consensus",
    "parse_keyvalue_file",
    "relu",
    "renormalize_prob",
    "softargmax_flow",
    "softmax_channels",
    "transpose_corr",
    "validate_schema",
]
