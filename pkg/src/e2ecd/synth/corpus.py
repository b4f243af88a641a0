"""Disk layouts for input corpora and synthesized samples.

Input corpus directory::

    {stem}_pre.png    {stem}_post.png       registered image pair
    {stem}_pre.json   {stem}_post.json      {"buildings": [{"wkt": ..., "damage": ...}]}
    manifest.csv                            header stem,event,split

Synthesized sample directory::

    {stem}_source.png  {stem}_target.png    unregistered pair
    {stem}_flow.flo                         ground-truth flow
    {stem}_mask.png    {stem}_change.png    validity mask and change map
    {stem}_meta.json                        affine coefficients, seed, index, event, split
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from ..core.affine import Affine2D
from ..core.fileio import (
    read_flow,
    read_image,
    read_mask,
    write_flow,
    write_image,
    write_mask,
)
from .polygons import NO_DAMAGE, BuildingPolygon
from .synthesize import E2ESample, RegisteredPair, StatsRow
from .wkt import parse_wkt_polygon

MANIFEST_NAME = "manifest.csv"
STATS_NAME = "stats.csv"


@dataclass(frozen=True)
class ManifestEntry:
    stem: str
    event: str
    split: str


def read_manifest(corpus_dir: Path) -> list[ManifestEntry]:
    path = Path(corpus_dir) / MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(f"missing split manifest {path}")
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        required = {"stem", "event", "split"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: manifest header must contain stem,event,split")
        entries = [ManifestEntry(r["stem"], r["event"], r["split"]) for r in reader]
    return sorted(entries, key=lambda e: e.stem)


def write_manifest(corpus_dir: Path, entries: list[ManifestEntry]) -> None:
    path = Path(corpus_dir) / MANIFEST_NAME
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["stem", "event", "split"])
        for e in entries:
            writer.writerow([e.stem, e.event, e.split])


def load_annotations(path: Path, force_no_damage: bool = False) -> list[BuildingPolygon]:
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if not isinstance(doc, dict) or "buildings" not in doc:
        raise ValueError(f"{path}: annotation JSON must contain a 'buildings' list")
    polygons = []
    for i, b in enumerate(doc["buildings"]):
        try:
            vertices = parse_wkt_polygon(b["wkt"])
            damage = NO_DAMAGE if force_no_damage else b.get("damage", NO_DAMAGE)
            polygons.append(BuildingPolygon(vertices, damage))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: building #{i}: {exc}") from exc
    return polygons


def read_registered_pair(corpus_dir: Path, stem: str, event: str) -> RegisteredPair:
    d = Path(corpus_dir)
    return RegisteredPair(
        stem=stem,
        event_name=event,
        pre_image=read_image(d / f"{stem}_pre.png"),
        post_image=read_image(d / f"{stem}_post.png"),
        pre_buildings=load_annotations(d / f"{stem}_pre.json", force_no_damage=True),
        post_buildings=load_annotations(d / f"{stem}_post.json"),
    )


def sample_paths(out_dir: Path, stem: str) -> dict[str, Path]:
    d = Path(out_dir)
    return {
        "source": d / f"{stem}_source.png",
        "target": d / f"{stem}_target.png",
        "flow": d / f"{stem}_flow.flo",
        "mask": d / f"{stem}_mask.png",
        "change": d / f"{stem}_change.png",
        "meta": d / f"{stem}_meta.json",
    }


def write_sample(
    out_dir: Path, sample: E2ESample, split: str, seed: int, index: int
) -> None:
    """Write all sample artifacts; removes partial files on failure."""
    paths = sample_paths(out_dir, sample.stem)
    written = []
    try:
        for key, writer, data in (
            ("source", write_image, sample.source_image),
            ("target", write_image, sample.target_image),
            ("flow", write_flow, sample.gt_flow),
            ("mask", write_mask, sample.validity_mask),
            ("change", write_mask, sample.change_map),
        ):
            writer(paths[key], data)
            written.append(paths[key])
        meta = {
            "stem": sample.stem,
            "event": sample.event_name,
            "split": split,
            "affine": sample.affine.coefficients(),
            "seed": int(seed),
            "index": int(index),
        }
        with open(paths["meta"], "w", encoding="utf-8") as f:
            json.dump(meta, f, indent=2, sort_keys=True)
            f.write("\n")
    except Exception:
        for p in written:
            p.unlink(missing_ok=True)
        paths["meta"].unlink(missing_ok=True)
        raise


def list_sample_stems(sample_dir: Path) -> list[str]:
    return sorted(p.name[: -len("_meta.json")] for p in Path(sample_dir).glob("*_meta.json"))


def read_sample(sample_dir: Path, stem: str) -> tuple[E2ESample, dict]:
    """Read one synthesized sample; returns (sample, meta dict)."""
    paths = sample_paths(sample_dir, stem)
    with open(paths["meta"], encoding="utf-8") as f:
        meta = json.load(f)
    sample = E2ESample(
        stem=stem,
        event_name=meta["event"],
        source_image=read_image(paths["source"]),
        target_image=read_image(paths["target"]),
        gt_flow=read_flow(paths["flow"]),
        validity_mask=read_mask(paths["mask"]),
        change_map=read_mask(paths["change"]),
        affine=Affine2D(meta["affine"]),
    )
    return sample, meta


def write_stats_csv(path: Path, rows: list[StatsRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["event", "split", "I", "P", "N"])
        for r in rows:
            writer.writerow([r.event, r.split, r.images, r.positives, r.negatives])
