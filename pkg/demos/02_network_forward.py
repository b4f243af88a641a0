"""A deterministic forward pass over an unregistered pair.

Shows the coarse-to-fine structure: a global correlation volume at 1/32
resolution is filtered by mutual matching and the symmetrized 4D-conv
consensus network, a soft-argmax turns it into the coarsest flow, and three
local refinement levels warp, correlate and update before the final bilinear
upsampling to full resolution.

Run:  python3 demos/02_network_forward.py
"""

import numpy as np

from e2ecd.core.sampling import upsample_flow
from e2ecd.net import (
    ArchConfig,
    class_balanced_ce,
    e2ecd_forward,
    extract_features,
    flow_epe,
    global_correlation,
    init_weights,
    mutual_matching,
)
from e2ecd.synth import AffineSamplingConfig, sample_affine, synthesize_pair
from e2ecd.synth.fixture import band_limited_image
from e2ecd.synth.synthesize import RegisteredPair
from e2ecd.synth.polygons import BuildingPolygon

arch = ArchConfig()
weights = init_weights(seed=0, arch=arch)
print(f"architecture: channels={arch.channels} radius={arch.radius}")
print(f"weight store: {len(weights.names())} tensors\n")

# build one synthetic unregistered pair with known ground truth; the
# building is destroyed post-event, so its footprint is a change region
img = band_limited_image(64, 64, 3, seed=11)
building = BuildingPolygon([[20, 20], [40, 20], [40, 40], [20, 40]])
razed = BuildingPolygon(building.vertices, damage="destroyed")
pair = RegisteredPair(
    stem="demo", event_name="demo", pre_image=img, post_image=img.copy(),
    pre_buildings=[building], post_buildings=[razed],
)
affine = sample_affine(AffineSamplingConfig(seed=1), 0, 64, 64)
sample = synthesize_pair(pair, affine)

# feature pyramids share weights between the two images
pyr = extract_features(sample.source_image, weights, arch)
print("feature pyramid (source):")
for i, level in enumerate(pyr, 1):
    print(f"  level {i}: {level.shape}")

# the global correlation volume holds every target/source cosine similarity
corr = global_correlation(
    extract_features(sample.target_image, weights, arch)[3], pyr[3]
)
print(f"\nglobal correlation: {corr.shape}, range [{corr.min():.3f}, {corr.max():.3f}]")
suppressed = mutual_matching(corr)
print(f"after mutual matching: max unchanged at {suppressed.max():.3f}, "
      f"mean shrinks {corr.clip(0).mean():.4f} -> {suppressed.mean():.4f}")

# full forward pass
out = e2ecd_forward(sample.source_image, sample.target_image, weights, arch)
print("\nforward outputs:")
for key in ("w4", "w3", "w2", "w1", "w0", "p3", "p2", "p1", "p0"):
    print(f"  {key}: {out[key].shape}")

# with freshly initialized heads the residual updates are exactly zero,
# so each finer flow is the upsampling of the coarser one
bitwise = np.array_equal(out["w1"], upsample_flow(out["w2"], 2))
print(f"\nresidual identity at initialization (w1 == upsample(w2)): {bitwise}")

# monitoring metrics against the synthetic ground truth
epe = flow_epe(out["w0"], sample.gt_flow, sample.validity_mask)
loss = class_balanced_ce(
    [out["p1"], out["p2"], out["p3"]], sample.change_map, sample.validity_mask
)
print(f"untrained endpoint error: {epe:.2f} px")
print(f"multi-scale class-balanced cross entropy: {loss:.4f}")
print("(both are expected to be poor before training; the pass itself is "
      "deterministic and bit-reproducible)")
