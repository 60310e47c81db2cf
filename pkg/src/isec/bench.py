"""Corpus benchmark: sweep a knob, segment every image, score, report CSV.

Corpus layout (only ``images/`` is required)::

    images/<stem>.{ppm,png}
    gt/<stem>.{pgm,csv}        ground-truth label maps
    next/<stem>.{ppm,png}      successor frame
    flow/<stem>.flo            flow from the image to its successor
"""
from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io, metrics
from .core import IsecParams, validate_params
from .pipeline import segment

HEADER = ("image", "algorithm", "sweep_value", "superpixels", "metric", "value")
METRIC_ORDER = ("superpixels", "br", "ue", "muse", "mde", "error")
MEAN_ROW = "mean"
IMAGE_SUFFIXES = (".ppm", ".png")


def _find(directory: Path, stem: str, suffixes) -> Path | None:
    for s in suffixes:
        p = directory / (stem + s)
        if p.is_file():
            return p
    return None


def load_corpus(root) -> list[io.DatasetEntry]:
    root = Path(root)
    images = root / "images"
    if not images.is_dir():
        raise FileNotFoundError(f"corpus {root} has no images/ directory")
    entries = []
    for img in sorted(images.iterdir()):
        if img.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        stem = img.stem
        entries.append(io.DatasetEntry(
            image=img,
            gt=_find(root / "gt", stem, (".pgm", ".csv")),
            next_frame=_find(root / "next", stem, IMAGE_SUFFIXES),
            flow=_find(root / "flow", stem, (".flo",)),
        ))
    return entries


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def _segment(algo: str, img, sweep_value: float, params: IsecParams) -> np.ndarray:
    if algo == "box":
        return metrics.box_baseline(img.width, img.height, int(sweep_value))
    labels, _ = segment(img, dataclasses.replace(params, threshold_step=sweep_value))
    return labels


def score_entry(entry: io.DatasetEntry, algo: str, sweep_value: float,
                params: IsecParams, tol: int = 2) -> list[tuple]:
    """Rows for one image at one sweep point; failures become an ``error`` row."""
    name = entry.image.stem
    try:
        img = io.read_image(entry.image)
        seg = _segment(algo, img, sweep_value, params)
        count = int(seg.max()) + 1
        scores = [("superpixels", float(count))]
        if entry.gt is not None:
            gt = io.read_labels(entry.gt)
            scores.append(("br", metrics.boundary_recall(seg, metrics.seg_to_boundary(gt), tol)))
            scores.append(("ue", metrics.undersegmentation_error(seg, gt)))
        if entry.flow is not None and entry.next_frame is not None:
            flow = io.read_flo(entry.flow)
            seg2 = _segment(algo, io.read_image(entry.next_frame), sweep_value, params)
            scores.append(("muse", metrics.muse(seg, seg2, flow)))
            scores.append(("mde", metrics.mde(seg, flow)))
    except Exception as e:
        return [(name, algo, sweep_value, "", "error", f"{type(e).__name__}: {e}")]
    return [(name, algo, sweep_value, count, m, v) for m, v in scores]


def _job(args):
    return score_entry(*args)


def _sort_key(row):
    return (row[2], row[0] == MEAN_ROW, row[0], METRIC_ORDER.index(row[4]))


def run_bench(corpus, algo: str, sweep, params: IsecParams | None = None,
              tol: int = 2, jobs: int = 1) -> list[tuple]:
    """Per-image rows plus one mean row per (sweep value, metric).

    Row order is fixed (sweep value, image, metric) whatever ``jobs`` is.
    """
    if algo not in ("isec", "box"):
        raise ValueError(f"unknown algorithm {algo!r}")
    sweep = list(sweep)
    if not sweep:
        raise ValueError("sweep list is empty")
    params = params or IsecParams()
    if algo == "isec":
        for s in sweep:
            validate_params(dataclasses.replace(params, threshold_step=s))
    entries = corpus if isinstance(corpus, list) else load_corpus(corpus)
    tasks = [(e, algo, s, params, tol) for s in sweep for e in entries]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_job, tasks))
    else:
        results = [_job(t) for t in tasks]
    rows = [r for rs in results for r in rs]
    for s in sweep:
        ok = [r for r in rows if r[2] == s and r[4] != "error"]
        for m in METRIC_ORDER[:-1]:
            sel = [r for r in ok if r[4] == m]
            if sel:
                rows.append((MEAN_ROW, algo, s, np.mean([r[3] for r in sel]), m,
                             np.mean([r[5] for r in sel])))
    return sorted(rows, key=_sort_key)


def format_row(row) -> list[str]:
    image, algo, s, count, metric, value = row
    if image == MEAN_ROW:
        count = f"{count:.2f}"
    if metric != "error":
        value = _fmt(value)
    return [image, algo, f"{s:g}", str(count), metric, value]


def write_report(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for row in rows:
            w.writerow(format_row(row))


def read_report(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def sweep_means(rows, metric: str = "superpixels") -> dict[float, float]:
    """Mean ``metric`` per sweep value from a row list."""
    return {r[2]: float(r[5]) for r in rows if r[0] == MEAN_ROW and r[4] == metric}


def failed_all(rows) -> bool:
    per_image = [r for r in rows if r[0] != MEAN_ROW]
    return bool(per_image) and all(r[4] == "error" for r in per_image)
