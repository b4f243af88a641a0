"""End-to-end change detection of unregistered bi-temporal image pairs.

The package has four layers:

* :mod:`e2ecd.core` - deterministic numerics: bilinear sampling, flow
  warping, affine algebra, PNG and flow-file IO;
* :mod:`e2ecd.synth` - synthesis of unregistered pairs with ground-truth
  flow, validity masks and change maps from registered annotated corpora;
* :mod:`e2ecd.net` - a seeded, numpy-only forward pass of the
  correspondence + change network with a bit-exact weight container;
* :mod:`e2ecd.metrics` - neighborhood-relaxed confusion metrics and PCK.

The ``e2ecd`` command line (see :mod:`e2ecd.cli`) chains these into
synth / forward / eval / stats / inspect batch steps.
"""

from . import core, metrics, net, synth
from .core import Affine2D, upsample_bilinear, upsample_flow, warp_by_flow
from .metrics import (
    CorpusEvaluator,
    MetricReport,
    RelaxedConfusion,
    evaluate_sample,
    metrics_from_confusion,
    pck,
    relaxed_confusion,
)
from .net import ArchConfig, WeightStore, e2ecd_forward, init_weights
from .synth import (
    AffineSamplingConfig,
    E2ESample,
    RegisteredPair,
    make_fixture_corpus,
    sample_affine,
    synthesize_pair,
)

__version__ = "0.1.0"

__all__ = [
    "Affine2D",
    "AffineSamplingConfig",
    "ArchConfig",
    "CorpusEvaluator",
    "E2ESample",
    "MetricReport",
    "RegisteredPair",
    "RelaxedConfusion",
    "WeightStore",
    "core",
    "e2ecd_forward",
    "evaluate_sample",
    "init_weights",
    "make_fixture_corpus",
    "metrics",
    "metrics_from_confusion",
    "net",
    "pck",
    "relaxed_confusion",
    "sample_affine",
    "synth",
    "synthesize_pair",
    "upsample_bilinear",
    "upsample_flow",
    "warp_by_flow",
]
