"""Unregistered-pair synthesis with ground-truth flow and validity masks.

Given a registered pre/post image pair and an affine transform A that maps
unregistered-source coordinates to registered coordinates, the synthesized
sample consists of:

* source image: the pre-event image resampled through A,
  source(y) = pre(A(y)), zero-filled where A(y) leaves the image;
* target image: the post-event image, unchanged;
* ground-truth flow: w(x) = A^{-1}(x) - x, so that warping the source by w
  reproduces the registered pre-event image;
* validity mask: 1 where A^{-1}(x) lands inside [0, W-1] x [0, H-1];
* change map: the binary change rule evaluated on the registered frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.affine import Affine2D
from ..core.sampling import coordinate_grid, ensure_image, sample_grid
from ..errors import ShapeError
from .polygons import BuildingPolygon, derive_change_map

DEFAULT_MIN_POSITIVE = 100
SPLIT_ORDER = ("train", "hold", "test")


@dataclass
class RegisteredPair:
    """A registered pre/post image pair with building annotations."""

    stem: str
    event_name: str
    pre_image: np.ndarray
    post_image: np.ndarray
    pre_buildings: list[BuildingPolygon]
    post_buildings: list[BuildingPolygon]

    def __post_init__(self):
        self.pre_image = ensure_image(self.pre_image)
        self.post_image = ensure_image(self.post_image)
        if self.pre_image.shape != self.post_image.shape:
            raise ShapeError(
                f"pre {self.pre_image.shape} and post {self.post_image.shape} images differ"
            )


@dataclass
class E2ESample:
    """One synthesized unregistered sample with full ground truth."""

    stem: str
    event_name: str
    source_image: np.ndarray
    target_image: np.ndarray
    gt_flow: np.ndarray
    validity_mask: np.ndarray
    change_map: np.ndarray
    affine: Affine2D

    def valid_positive_count(self) -> int:
        return int(np.sum((self.change_map == 1) & (self.validity_mask == 1)))

    def valid_negative_count(self) -> int:
        return int(np.sum((self.change_map == 0) & (self.validity_mask == 1)))


def flow_from_affine(affine: Affine2D, height: int, width: int) -> np.ndarray:
    """Ground-truth flow w(x) = A^{-1}(x) - x as a float32 field."""
    grid = coordinate_grid(height, width)
    mapped = affine.invert().apply(grid)
    return (mapped - grid).astype(np.float32)


def validity_from_affine(affine: Affine2D, height: int, width: int) -> np.ndarray:
    """Mask of target pixels whose inverse-affine image stays in-frame."""
    grid = coordinate_grid(height, width)
    mapped = affine.invert().apply(grid)
    mx, my = mapped[..., 0], mapped[..., 1]
    inb = (mx >= 0) & (mx <= width - 1) & (my >= 0) & (my <= height - 1)
    return inb.astype(np.uint8)


def synthesize_pair(pair: RegisteredPair, affine: Affine2D) -> E2ESample:
    """Build the unregistered sample for one registered pair and transform."""
    h, w, _ = pair.pre_image.shape
    grid = coordinate_grid(h, w)
    src_coords = affine.apply(grid)
    source = sample_grid(pair.pre_image, src_coords[..., 0], src_coords[..., 1])
    return E2ESample(
        stem=pair.stem,
        event_name=pair.event_name,
        source_image=source,
        target_image=pair.post_image.copy(),
        gt_flow=flow_from_affine(affine, h, w),
        validity_mask=validity_from_affine(affine, h, w),
        change_map=derive_change_map(pair.pre_buildings, pair.post_buildings, h, w),
        affine=affine,
    )


def filter_pairs(
    samples: list[E2ESample], min_positive: int = DEFAULT_MIN_POSITIVE
) -> list[E2ESample]:
    """Drop samples with fewer than ``min_positive`` valid changed pixels."""
    return [s for s in samples if s.valid_positive_count() >= min_positive]


@dataclass(frozen=True)
class StatsRow:
    event: str
    split: str
    images: int
    positives: int
    negatives: int


def _split_sort_key(split: str):
    try:
        return (SPLIT_ORDER.index(split), split)
    except ValueError:
        return (len(SPLIT_ORDER), split)


def dataset_stats(
    samples: list[E2ESample], split_assignments: dict[str, str]
) -> list[StatsRow]:
    """Per-event, per-split counts of images and valid positive/negative pixels.

    Counts only consider pixels inside the validity mask. Rows are ordered by
    event then split, with per-event totals, per-split totals across events
    ("all" rows) and a grand total. An empty corpus yields a single all-zero
    grand-total row.
    """
    records = [
        (s.event_name, split_assignments.get(s.stem, "unassigned"),
         s.valid_positive_count(), s.valid_negative_count())
        for s in sorted(samples, key=lambda s: (s.event_name, s.stem))
    ]
    return aggregate_stats(records)


def aggregate_stats(records: list[tuple[str, str, int, int]]) -> list[StatsRow]:
    """Aggregate (event, split, positives, negatives) records into the table."""
    counts: dict[tuple[str, str], list[int]] = {}
    for event, split, pos, neg in records:
        c = counts.setdefault((event, split), [0, 0, 0])
        c[0] += 1
        c[1] += pos
        c[2] += neg

    rows: list[StatsRow] = []
    events = sorted({e for e, _ in counts})
    splits = sorted({sp for _, sp in counts}, key=_split_sort_key)
    for event in events:
        ev_total = [0, 0, 0]
        for split in splits:
            c = counts.get((event, split))
            if c is None:
                continue
            rows.append(StatsRow(event, split, *c))
            ev_total = [a + b for a, b in zip(ev_total, c)]
        rows.append(StatsRow(event, "total", *ev_total))
    grand = [0, 0, 0]
    for split in splits:
        sp_total = [0, 0, 0]
        for event in events:
            c = counts.get((event, split))
            if c is not None:
                sp_total = [a + b for a, b in zip(sp_total, c)]
        rows.append(StatsRow("all", split, *sp_total))
        grand = [a + b for a, b in zip(grand, sp_total)]
    rows.append(StatsRow("all", "total", *grand))
    return rows
