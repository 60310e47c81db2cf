"""Command line: ``isec segment``, ``isec metrics`` and ``isec bench``.

Exit codes: 0 success, 1 usage or validation error, 2 I/O or format error,
3 degenerate input.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench, io, metrics
from .core import DegenerateInputError, IsecParams, ParamError, validate_params
from .pipeline import segment

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DEGENERATE = 0, 1, 2, 3

_DEFAULTS = IsecParams()
_PARAM_FLAGS = (
    ("--low", "low_threshold", float),
    ("--high-cap", "high_threshold_cap", float),
    ("--step", "threshold_step", float),
    ("--filter-size", "filter_size", int),
    ("--min-filter-size", "min_filter_size", int),
    ("--ratio", "high_low_ratio", float),
    ("--tau", "ed_binarize_threshold", float),
    ("--min-area", "min_superpixel_area", int),
    ("--sigma", "sigma", float),
)


class _Fail(Exception):
    def __init__(self, code, msg):
        super().__init__(msg)
        self.code = code


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("segmentation parameters")
    for flag, attr, typ in _PARAM_FLAGS:
        g.add_argument(flag, dest=attr, type=typ, default=getattr(_DEFAULTS, attr),
                       help=f"default {getattr(_DEFAULTS, attr)}")


def _params(args) -> IsecParams:
    return validate_params(IsecParams(**{attr: getattr(args, attr) for _, attr, _ in _PARAM_FLAGS}))


def cmd_segment(args) -> int:
    params = _params(args)
    img = io.read_image(args.input)
    timings = {}
    labels, traces = segment(img, params, timings)
    io.write_labels(labels, args.labels, args.format)
    if args.overlay:
        io.write_image(io.render_overlay(img, labels, (255, 0, 0)), args.overlay)
    print(f"superpixels: {int(labels.max()) + 1}")
    for t in traces:
        print(f"iteration {t.index}: low={t.low:.4f} high={t.high:.4f} S={t.filter_size} "
              f"edges={t.edge_pixels} borders={t.border_pixels}")
    for stage in ("gradient", "iterations", "refine", "total"):
        print(f"time {stage}: {timings[stage] * 1000:.1f} ms")
    return EXIT_OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise _Fail(EXIT_USAGE, f"metric {args.metric} requires {flags}")


def cmd_metrics(args) -> int:
    m = args.metric
    if m == "muse":
        _need(args, "seg1", "seg2", "flow")
        seg = io.read_labels(args.seg1)
        value = metrics.muse(seg, io.read_labels(args.seg2), io.read_flo(args.flow))
        name = args.seg1
    else:
        _need(args, "seg")
        seg = io.read_labels(args.seg)
        name = args.seg
        if m == "mde":
            _need(args, "flow")
            value = metrics.mde(seg, io.read_flo(args.flow))
        else:
            _need(args, "gt")
            gt = io.read_labels(args.gt)
            if m == "br":
                value = metrics.boundary_recall(seg, metrics.seg_to_boundary(gt), args.tol)
            else:
                value = metrics.undersegmentation_error(seg, gt)
    count = len(set(seg.labels.ravel().tolist()))
    print(f"{Path(name).stem},{m},{value:.6f},{count}")
    return EXIT_OK


def _sweep(text: str, algo: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise _Fail(EXIT_USAGE, f"bad --sweep list {text!r}") from None
    if not vals:
        raise _Fail(EXIT_USAGE, "--sweep list is empty")
    if algo == "box":
        vals = [int(v) for v in vals]
    return vals


def cmd_bench(args) -> int:
    params = _params(args)
    sweep = _sweep(args.sweep, args.algo)
    try:
        entries = bench.load_corpus(args.corpus)
    except FileNotFoundError as e:
        raise _Fail(EXIT_IO, str(e)) from None
    rows = bench.run_bench(entries, args.algo, sweep, params, args.tol, args.jobs)
    bench.write_report(rows, args.report)
    for s, n in bench.sweep_means(rows).items():
        print(f"sweep {s:g}: mean superpixels {n:.2f}")
    if bench.failed_all(rows):
        print("error: every image failed", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isec", description="Superpixel segmentation from clustered edge maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment one image")
    p.add_argument("--input", required=True)
    p.add_argument("--labels", required=True, help="output label map (.pgm or .csv)")
    p.add_argument("--format", choices=("pgm16", "csv"), default=None)
    p.add_argument("--overlay", help="optional boundary overlay image (.png or .ppm)")
    _add_param_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("metrics", help="score label maps")
    p.add_argument("metric", choices=("muse", "mde", "br", "ue"))
    p.add_argument("--seg")
    p.add_argument("--seg1")
    p.add_argument("--seg2")
    p.add_argument("--gt")
    p.add_argument("--flow")
    p.add_argument("--tol", type=int, default=2)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="sweep a corpus and write a CSV report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--algo", choices=("isec", "box"), default="isec")
    p.add_argument("--sweep", required=True, help="comma-separated steps (isec) or k values (box)")
    p.add_argument("--report", required=True)
    p.add_argument("--tol", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1)
    _add_param_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except _Fail as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except ParamError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (OSError, io.FormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
