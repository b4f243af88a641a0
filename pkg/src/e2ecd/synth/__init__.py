"""Synthetic unregistered-pair generation from registered annotated corpora."""

from .affine_sampler import AffineSamplingConfig, sample_affine
from .corpus import (
    ManifestEntry,
    list_sample_stems,
    load_annotations,
    read_manifest,
    read_registered_pair,
    read_sample,
    sample_paths,
    write_manifest,
    write_sample,
    write_stats_csv,
)
from .fixture import band_limited_image, make_fixture_corpus
from .polygons import (
    DAMAGE_CLASSES,
    NO_DAMAGE,
    BuildingPolygon,
    derive_change_map,
    points_in_polygon,
    rasterize_polygons,
)
from .synthesize import (
    DEFAULT_MIN_POSITIVE,
    E2ESample,
    RegisteredPair,
    StatsRow,
    aggregate_stats,
    dataset_stats,
    filter_pairs,
    flow_from_affine,
    synthesize_pair,
    validity_from_affine,
)
from .wkt import parse_wkt_polygon

__all__ = [
    "AffineSamplingConfig",
    "BuildingPolygon",
    "DAMAGE_CLASSES",
    "DEFAULT_MIN_POSITIVE",
    "E2ESample",
    "ManifestEntry",
    "NO_DAMAGE",
    "RegisteredPair",
    "StatsRow",
    "aggregate_stats",
    "band_limited_image",
    "dataset_stats",
    "derive_change_map",
    "filter_pairs",
    "flow_from_affine",
    "list_sample_stems",
    "load_annotations",
    "make_fixture_corpus",
    "parse_wkt_polygon",
    "points_in_polygon",
    "rasterize_polygons",
    "read_manifest",
    "read_registered_pair",
    "read_sample",
    "sample_affine",
    "sample_paths",
    "synthesize_pair",
    "validity_from_affine",
    "write_manifest",
    "write_sample",
    "write_stats_csv",
]
