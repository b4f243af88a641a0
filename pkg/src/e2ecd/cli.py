"""Batch command-line interface.

Subcommands: synth | forward | eval | stats | inspect. Every command
resolves its settings from flags, then an optional ``key = value`` config
file (flags win), then built-in defaults, and echoes the fully resolved
configuration to ``run_config.txt`` in the output directory.

Exit codes: 0 success, 1 any per-item failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .core.fileio import read_flow, write_flow, write_image, write_mask
from .core.sampling import center_crop_to_multiple, warp_by_flow
from .errors import E2ECDError
from .metrics import (
    DEFAULT_DELTA,
    DEFAULT_RADII,
    DEFAULT_THRESHOLD,
    CorpusEvaluator,
    binarize_change_prob,
    write_metrics_csv,
)
from .net.config import ArchConfig, parse_keyvalue_file
from .net.forward import e2ecd_forward
from .net.weights import WeightStore, init_weights, validate_schema
from .synth.affine_sampler import AffineSamplingConfig, sample_affine
from .synth.corpus import (
    STATS_NAME,
    list_sample_stems,
    read_manifest,
    read_registered_pair,
    read_sample,
    write_sample,
    write_stats_csv,
)
from .synth.synthesize import (
    DEFAULT_MIN_POSITIVE,
    aggregate_stats,
    dataset_stats,
    synthesize_pair,
)

log = logging.getLogger("e2ecd")


class ConfigError(Exception):
    """Unusable command configuration; maps to exit code 2."""


# ---------------------------------------------------------------------------
# config resolution


def _load_config_file(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        return parse_keyvalue_file(p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


class Resolver:
    """Flag > config file > default, remembering every resolved value."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file_values = _load_config_file(getattr(args, "config", None))
        self.resolved: dict[str, str] = {}

    def get(self, key: str, default, cast=str):
        value = getattr(self.args, key, None)
        if value is None:
            raw = self.file_values.get(key)
            if raw is None:
                value = default
            else:
                try:
                    value = cast(raw)
                except ValueError as exc:
                    raise ConfigError(f"config key {key!r}: {exc}") from exc
        if value is not None:
            self.resolved[key] = str(value)
        return value

    def require(self, key: str, cast=str):
        value = self.get(key, None, cast)
        if value is None:
            raise ConfigError(f"missing required setting {key!r} (flag or config file)")
        return value

    def write_sidecar(self, out_dir: Path) -> None:
        lines = [f"{k} = {self.resolved[k]}" for k in sorted(self.resolved)]
        (out_dir / "run_config.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_radii(text: str) -> tuple[int, ...]:
    try:
        radii = tuple(int(v) for v in str(text).split(","))
    except ValueError as exc:
        raise ConfigError(f"bad radii list {text!r}") from exc
    if not radii or any(r < 0 for r in radii):
        raise ConfigError(f"radii must be non-negative integers, got {text!r}")
    return radii


def _out_dir(resolver: Resolver) -> Path:
    out = Path(resolver.require("output"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _existing_dir(path_str: str, what: str) -> Path:
    p = Path(path_str)
    if not p.is_dir():
        raise ConfigError(f"{what} directory not found: {p}")
    return p


def _run_pool(workers: int, fn, items):
    """Apply fn to items, optionally on a thread pool; preserves item order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# synth


def cmd_synth(args: argparse.Namespace) -> int:
    res = Resolver(args)
    input_dir = _existing_dir(res.require("input"), "input corpus")
    out_dir = _out_dir(res)
    seed = res.get("seed", 0, int)
    workers = res.get("workers", 1, int)
    min_positive = res.get("min_positive", DEFAULT_MIN_POSITIVE, int)
    affine_cfg = AffineSamplingConfig(
        max_rotation_deg=res.get("max_rotation", 25.0, float),
        scale_range=(res.get("scale_min", 0.8, float), res.get("scale_max", 1.25, float)),
        max_translation_frac=res.get("max_translation_frac", 0.1, float),
        max_shear_deg=res.get("max_shear", 10.0, float),
        seed=seed,
    )
    res.write_sidecar(out_dir)

    try:
        entries = read_manifest(input_dir)
    except FileNotFoundError:
        if any(input_dir.glob("*_pre.png")):
            log.error("input corpus %s has images but no manifest.csv", input_dir)
            return 2
        log.warning("input corpus %s is empty; writing an empty corpus", input_dir)
        write_stats_csv(out_dir / STATS_NAME, [])
        return 0
    if not entries:
        log.warning("manifest lists no pairs; writing an empty corpus")
        write_stats_csv(out_dir / STATS_NAME, [])
        return 0

    def synth_one(item):
        index, entry = item
        try:
            pair = read_registered_pair(input_dir, entry.stem, entry.event)
            h, w, _ = pair.pre_image.shape
            affine = sample_affine(affine_cfg, index, h, w)
            sample = synthesize_pair(pair, affine)
            return entry, index, sample, None
        except (E2ECDError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
            return entry, index, None, exc

    results = _run_pool(workers, synth_one, list(enumerate(entries)))

    failures = 0
    kept = []
    splits = {}
    for entry, index, sample, exc in results:
        if exc is not None:
            failures += 1
            log.error("pair %s failed: %s", entry.stem, exc)
            continue
        if sample.valid_positive_count() < min_positive:
            log.info(
                "filtered %s: %d valid positive pixels < %d",
                entry.stem, sample.valid_positive_count(), min_positive,
            )
            continue
        try:
            write_sample(out_dir, sample, entry.split, seed, index)
        except OSError as exc:
            failures += 1
            log.error("writing %s failed: %s", entry.stem, exc)
            continue
        kept.append(sample)
        splits[sample.stem] = entry.split

    rows = dataset_stats(kept, splits) if kept else []
    write_stats_csv(out_dir / STATS_NAME, rows)
    log.info("synthesized %d/%d pairs into %s", len(kept), len(entries), out_dir)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# forward


def _load_weights(res: Resolver, arch: ArchConfig) -> WeightStore:
    weights_path = res.get("weights", None)
    weights_seed = res.get("weights_seed", None, int)
    if (weights_path is None) == (weights_seed is None):
        raise ConfigError("exactly one of weights / weights_seed is required")
    if weights_path is not None:
        p = Path(weights_path)
        if not p.exists():
            raise ConfigError(f"weights file not found: {p}")
        store = WeightStore.load(p)
    else:
        store = init_weights(weights_seed, arch)
    validate_schema(store, arch)
    return store


def cmd_forward(args: argparse.Namespace) -> int:
    res = Resolver(args)
    corpus_dir = _existing_dir(res.require("corpus"), "corpus")
    out_dir = _out_dir(res)
    workers = res.get("workers", 1, int)
    arch_path = res.get("arch", None)
    arch = ArchConfig.from_file(arch_path) if arch_path else ArchConfig()
    try:
        weights = _load_weights(res, arch)
    except E2ECDError as exc:
        log.error("%s", exc)
        return 2
    res.write_sidecar(out_dir)

    stems = list_sample_stems(corpus_dir)
    if not stems:
        log.warning("corpus %s contains no samples", corpus_dir)
        return 0

    def forward_one(stem: str):
        try:
            sample, _ = read_sample(corpus_dir, stem)
            source, offset = center_crop_to_multiple(sample.source_image, 32)
            target, _ = center_crop_to_multiple(sample.target_image, 32)
            if offset != (0, 0):
                log.info("%s: center crop to %sx%s at offset %s",
                         stem, source.shape[0], source.shape[1], offset)
            outputs = e2ecd_forward(source, target, weights, arch)
            write_flow(out_dir / f"{stem}_flow.flo", outputs["w0"])
            write_flow(out_dir / f"{stem}_prob.flo", outputs["p0"])
            write_mask(out_dir / f"{stem}_change.png",
                       binarize_change_prob(outputs["p0"], DEFAULT_THRESHOLD))
            meta = {
                "stem": stem,
                "crop": [int(offset[0]), int(offset[1])],
                "height": int(source.shape[0]),
                "width": int(source.shape[1]),
            }
            with open(out_dir / f"{stem}_meta.json", "w", encoding="utf-8") as f:
                json.dump(meta, f, indent=2, sort_keys=True)
                f.write("\n")
            return None
        except (E2ECDError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
            return exc

    failures = 0
    for stem, exc in zip(stems, _run_pool(workers, forward_one, stems)):
        if exc is not None:
            failures += 1
            log.error("forward on %s failed: %s", stem, exc)
    log.info("forward pass on %d/%d samples into %s", len(stems) - failures, len(stems), out_dir)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# eval


def _crop_like_pred(arr: np.ndarray, meta: dict) -> np.ndarray:
    oy, ox = meta.get("crop", [0, 0])
    h = meta.get("height", arr.shape[0])
    w = meta.get("width", arr.shape[1])
    return arr[oy : oy + h, ox : ox + w]


def cmd_eval(args: argparse.Namespace) -> int:
    res = Resolver(args)
    pred_dir = _existing_dir(res.require("pred"), "prediction")
    gt_dir = _existing_dir(res.require("gt"), "ground-truth")
    out_dir = _out_dir(res)
    radii = _parse_radii(res.get("radii", ",".join(str(r) for r in DEFAULT_RADII)))
    delta = res.get("delta", DEFAULT_DELTA, float)
    threshold = res.get("threshold", DEFAULT_THRESHOLD, float)
    res.write_sidecar(out_dir)

    gt_stems = set(list_sample_stems(gt_dir))
    pred_stems = {p.name[: -len("_prob.flo")] for p in pred_dir.glob("*_prob.flo")}
    orphans = sorted(gt_stems ^ pred_stems)
    for stem in orphans:
        side = "prediction" if stem in gt_stems else "ground truth"
        log.error("no %s for sample %s", side, stem)

    evaluator = CorpusEvaluator(radii, delta, threshold)
    rows = []
    failures = 0
    for stem in sorted(gt_stems & pred_stems):
        try:
            sample, _ = read_sample(gt_dir, stem)
            pred_flow = read_flow(pred_dir / f"{stem}_flow.flo")
            pred_prob = read_flow(pred_dir / f"{stem}_prob.flo")
            meta_path = pred_dir / f"{stem}_meta.json"
            if meta_path.exists():
                with open(meta_path, encoding="utf-8") as f:
                    meta = json.load(f)
            else:
                meta = {}
            gt_change = _crop_like_pred(sample.change_map, meta)
            gt_flow = _crop_like_pred(sample.gt_flow, meta)
            valid = _crop_like_pred(sample.validity_mask, meta)
            reports = evaluator.add_sample(pred_prob, pred_flow, gt_change, gt_flow, valid)
            rows.extend((stem, r) for r in reports)
        except (E2ECDError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
            failures += 1
            log.error("evaluating %s failed: %s", stem, exc)
    rows.extend(("total", r) for r in evaluator.totals())
    report_path = out_dir / "report.csv"
    write_metrics_csv(report_path, rows)
    log.info("wrote %s", report_path)
    return 1 if (failures or orphans) else 0


# ---------------------------------------------------------------------------
# stats


def cmd_stats(args: argparse.Namespace) -> int:
    res = Resolver(args)
    corpus_dir = _existing_dir(res.require("corpus"), "corpus")
    out_dir = _out_dir(res)
    res.write_sidecar(out_dir)

    records = []
    failures = 0
    for stem in list_sample_stems(corpus_dir):
        try:
            sample, meta = read_sample(corpus_dir, stem)
            records.append(
                (sample.event_name, meta.get("split", "unassigned"),
                 sample.valid_positive_count(), sample.valid_negative_count())
            )
        except (E2ECDError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
            failures += 1
            log.error("reading %s failed: %s", stem, exc)
    rows = aggregate_stats(records) if records else []
    path = out_dir / STATS_NAME
    write_stats_csv(path, rows)
    log.info("wrote %s", path)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# inspect


_HEAT_STOPS = np.array(
    [
        [0.00, 0.00, 0.00, 0.15],
        [0.25, 0.05, 0.25, 0.70],
        [0.50, 0.75, 0.15, 0.45],
        [0.75, 0.95, 0.55, 0.10],
        [1.00, 1.00, 1.00, 0.90],
    ]
)


def flow_magnitude_heatmap(flow: np.ndarray) -> np.ndarray:
    """Map flow magnitude to a dark-to-bright (H, W, 3) color raster."""
    mag = np.hypot(flow[..., 0].astype(np.float64), flow[..., 1].astype(np.float64))
    peak = mag.max()
    norm = mag / peak if peak > 0 else mag
    channels = [np.interp(norm, _HEAT_STOPS[:, 0], _HEAT_STOPS[:, c]) for c in (1, 2, 3)]
    return np.stack(channels, axis=-1).astype(np.float32)


def cmd_inspect(args: argparse.Namespace) -> int:
    res = Resolver(args)
    corpus_dir = _existing_dir(res.require("corpus"), "corpus")
    pred_value = res.get("pred", None)
    pred_dir = _existing_dir(pred_value, "prediction") if pred_value else None
    out_dir = _out_dir(res)
    only = res.get("stem", None)
    res.write_sidecar(out_dir)

    stems = [only] if only else list_sample_stems(corpus_dir)
    failures = 0
    for stem in stems:
        try:
            sample, _ = read_sample(corpus_dir, stem)
            write_image(out_dir / f"{stem}_source.png", sample.source_image)
            write_image(out_dir / f"{stem}_target.png", sample.target_image)
            write_image(out_dir / f"{stem}_warp_gt.png",
                        warp_by_flow(sample.source_image, sample.gt_flow))
            write_mask(out_dir / f"{stem}_change_gt.png", sample.change_map)
            flow_for_heatmap = sample.gt_flow
            if pred_dir is not None:
                flow_path = pred_dir / f"{stem}_flow.flo"
                prob_path = pred_dir / f"{stem}_prob.flo"
                if flow_path.exists() and prob_path.exists():
                    pred_flow = read_flow(flow_path)
                    pred_prob = read_flow(prob_path)
                    source = sample.source_image
                    if pred_flow.shape[:2] != source.shape[:2]:
                        meta_path = pred_dir / f"{stem}_meta.json"
                        with open(meta_path, encoding="utf-8") as f:
                            source = _crop_like_pred(source, json.load(f))
                    write_image(out_dir / f"{stem}_warp_pred.png",
                                warp_by_flow(source, pred_flow))
                    write_mask(out_dir / f"{stem}_change_pred.png",
                               binarize_change_prob(pred_prob, DEFAULT_THRESHOLD))
                    flow_for_heatmap = pred_flow
                else:
                    log.warning("missing prediction files for %s; emitting GT panels only", stem)
            write_image(out_dir / f"{stem}_flowmag.png", flow_magnitude_heatmap(flow_for_heatmap))
        except (E2ECDError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
            failures += 1
            log.error("inspect on %s failed: %s", stem, exc)
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="e2ecd",
        description="Synthesize, run and evaluate end-to-end change detection on "
        "unregistered bi-temporal image pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", help="key = value config file; flags override it")
        p.add_argument("--seed", type=int, help="base random seed (default 0)")
        p.add_argument("--workers", type=int, help="worker threads (default 1)")
        p.add_argument("--output", help="output directory")

    p = sub.add_parser("synth", help="synthesize an unregistered corpus with ground truth")
    common(p)
    p.add_argument("--input", help="registered input corpus directory")
    p.add_argument("--min-positive", dest="min_positive", type=int,
                   help="drop samples with fewer valid positive pixels (default 100)")
    p.add_argument("--max-rotation", dest="max_rotation", type=float)
    p.add_argument("--scale-min", dest="scale_min", type=float)
    p.add_argument("--scale-max", dest="scale_max", type=float)
    p.add_argument("--max-translation-frac", dest="max_translation_frac", type=float)
    p.add_argument("--max-shear", dest="max_shear", type=float)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("forward", help="run the network forward pass over a corpus")
    common(p)
    p.add_argument("--corpus", help="synthesized corpus directory")
    p.add_argument("--weights", help="weight container path")
    p.add_argument("--weights-seed", dest="weights_seed", type=int,
                   help="initialize fresh weights from this seed instead of a file")
    p.add_argument("--arch", help="architecture config file")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    common(p)
    p.add_argument("--pred", help="prediction directory")
    p.add_argument("--gt", help="ground-truth corpus directory")
    p.add_argument("--radii", help="comma-separated relaxation radii (default 0,5)")
    p.add_argument("--delta", type=float, help="PCK threshold fraction (default 0.05)")
    p.add_argument("--threshold", type=float,
                   help="change probability binarization threshold (default 0.5)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="corpus statistics table (I/P/N per event and split)")
    common(p)
    p.add_argument("--corpus", help="synthesized corpus directory")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("inspect", help="write inspection panels for samples")
    common(p)
    p.add_argument("--corpus", help="synthesized corpus directory")
    p.add_argument("--pred", help="prediction directory (optional)")
    p.add_argument("--stem", help="inspect a single sample")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return 2


def entrypoint() -> None:
    sys.exit(main())
