"""Command-line front end: inpainting runs, quality metrics, mask generation.

Subcommands
-----------
inpaint-image   restore a PGM/PPM image under a PGM mask
inpaint-audio   restore a mono PCM16 WAV under a raw byte mask
inpaint-video   restore a directory of numbered frames under a mask file/dir
metrics         print a CSV metric row comparing two media files
mask-gen        write reproducible erasure masks (gaps, rect, scratches)

Exit codes: 0 success, 2 usage error, 3 I/O or input-format error,
4 solver abort.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import metrics as _metrics
from .inpaint import InpaintConfig, NoCompletePatchesError, inpaint
from .ndsignal import (
    Mask,
    MediaFormatError,
    load_audio,
    load_frames,
    load_image,
    load_mask,
    save_audio,
    save_frames,
    save_image,
    save_mask,
)
from .solver import DivergenceError, SolverTrace, TraceRecord

_DEFAULTS = {
    "inpaint-image": {"patch": (16, 16), "stride": (2, 2), "max_iter": 256},
    "inpaint-audio": {"patch": (4096,), "stride": (3968,), "max_iter": 1024},
    "inpaint-video": {"patch": (4, 8, 8), "stride": (1, 2, 2), "max_iter": 256},
}


class _UsageError(Exception):
    """Bad parameter combinations, reported with exit code 2."""


def _ints(text: str) -> tuple:
    return tuple(int(part) for part in text.split(","))


def _floats(text: str) -> tuple:
    return tuple(float(part) for part in text.split(","))


def _add_inpaint_flags(sub, name):
    d = _DEFAULTS[name]
    sub.add_argument("input")
    sub.add_argument("mask")
    sub.add_argument("output")
    sub.add_argument("--patch", type=_ints, default=d["patch"],
                     help="patch shape, comma-separated per axis")
    sub.add_argument("--stride", type=_ints, default=d["stride"],
                     help="stride per axis")
    sub.add_argument("--kappa", type=float, default=10.0,
                     help="initial penalty is kappa * peak")
    sub.add_argument("--shrink", type=float, default=0.5,
                     help="penalty multiplier on cost increase")
    sub.add_argument("--max-iter", type=int, default=d["max_iter"])
    sub.add_argument("--tol", type=float, default=1e-8)
    sub.add_argument("--clip", type=_floats, default=None, metavar="LO,HI",
                     help="clamp restored samples into [lo, hi]")
    sub.add_argument("--no-partial", action="store_true",
                     help="update every patch instead of only those touching erasures")
    sub.add_argument("--trace", default=None, metavar="OUT.CSV",
                     help="write per-iteration diagnostics")
    sub.add_argument("--ref", default=None,
                     help="ground truth for per-iteration metrics in the trace")
    sub.add_argument("--workers", type=int, default=1)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paco", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)
    for name in ("inpaint-image", "inpaint-audio", "inpaint-video"):
        _add_inpaint_flags(subs.add_parser(name), name)

    m = subs.add_parser("metrics", help="compare two media files")
    m.add_argument("reference")
    m.add_argument("test")

    g = subs.add_parser("mask-gen", help="generate an erasure mask")
    g.add_argument("kind", choices=("gaps", "rect", "scratches"))
    g.add_argument("output")
    g.add_argument("--shape", type=_ints, required=True,
                   help="mask shape, comma-separated per axis")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--rate", type=float, default=1e-4,
                   help="gaps: per-sample probability that an erasure starts")
    g.add_argument("--mean-length", type=float, default=1000.0,
                   help="gaps: mean erasure length (geometric)")
    g.add_argument("--at", type=_ints, default=None, metavar="R,C",
                   help="rect: top-left corner")
    g.add_argument("--size", type=_ints, default=None, metavar="H,W",
                   help="rect: extent")
    g.add_argument("--count", type=int, default=8, help="scratches: how many")
    g.add_argument("--width", type=int, default=2, help="scratches: width in samples")
    return parser


def _config_from_args(args) -> InpaintConfig:
    try:
        return InpaintConfig(
            patch_shape=args.patch,
            strides=args.stride,
            kappa=args.kappa,
            shrink=args.shrink,
            max_iter=args.max_iter,
            tol=args.tol,
            clip=tuple(args.clip) if args.clip is not None else None,
            partial_updates=not args.no_partial,
            workers=args.workers,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _merge_traces(traces: list[SolverTrace]) -> SolverTrace:
    """Average per-iteration records across channels into one trace.

    Channels that stop early contribute their final record to later rows.
    """
    if len(traces) == 1:
        return traces[0]
    merged = SolverTrace(traces[0].n_elements, traces[0].alpha)
    rows = max(len(t) for t in traces)

    def mean(values):
        values = [v for v in values if v is not None]
        return None if not values else float(np.mean(values))

    for i in range(rows):
        recs = [t.records[min(i, len(t) - 1)] for t in traces]
        merged.add(TraceRecord(
            iteration=i + 1,
            lam=mean([r.lam for r in recs]),
            cost=mean([r.cost for r in recs]),
            constraint_violation=mean([r.constraint_violation for r in recs]),
            cost_change=mean([r.cost_change for r in recs]),
            arg_change=mean([r.arg_change for r in recs]),
            rmse=mean([r.rmse for r in recs]),
            mad=mean([r.mad for r in recs]),
            bias=mean([r.bias for r in recs]),
            psnr=mean([r.psnr for r in recs]),
            ssim=mean([r.ssim for r in recs]),
        ))
    return merged


def _inpaint_channels(channels, mask, config, references):
    outputs = []
    traces = []
    for i, channel in enumerate(channels):
        ref = references[i] if references else None
        restored, trace = inpaint(channel, mask, config, reference=ref)
        outputs.append(restored)
        traces.append(trace)
    return outputs, _merge_traces(traces)


def _run_inpaint_image(args) -> int:
    config = _config_from_args(args)
    channels = load_image(args.input)
    mask = load_mask(args.mask, channels[0].shape)
    refs = load_image(args.ref) if args.ref else None
    outputs, trace = _inpaint_channels(channels, mask, config, refs)
    save_image(outputs, args.output)
    if args.trace:
        trace.to_csv(args.trace)
    return 0


def _run_inpaint_audio(args) -> int:
    config = _config_from_args(args)
    signal, rate = load_audio(args.input)
    mask = load_mask(args.mask, signal.shape)
    ref = load_audio(args.ref)[0] if args.ref else None
    restored, trace = inpaint(signal, mask, config, reference=ref)
    save_audio(restored, args.output, rate)
    if args.trace:
        trace.to_csv(args.trace)
    return 0


def _run_inpaint_video(args) -> int:
    config = _config_from_args(args)
    channels = load_frames(args.input)
    mask = load_mask(args.mask, channels[0].shape)
    refs = load_frames(args.ref) if args.ref else None
    outputs, trace = _inpaint_channels(channels, mask, config, refs)
    save_frames(outputs, args.output)
    if args.trace:
        trace.to_csv(args.trace)
    return 0


def _load_any(path):
    """Load media by extension/kind: list of channel Signals plus the peak."""
    if os.path.isdir(path):
        channels = load_frames(path)
    elif str(path).lower().endswith(".wav"):
        channels = [load_audio(path)[0]]
    else:
        channels = load_image(path)
    return channels, channels[0].peak


def _fmt_metric(value: float, allow_int: bool) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    if allow_int and float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _run_metrics(args) -> int:
    ref_channels, peak = _load_any(args.reference)
    test_channels, _ = _load_any(args.test)
    if len(ref_channels) != len(test_channels):
        raise MediaFormatError("channel count mismatch between reference and test")
    reports = [
        _metrics.report(r.samples, t.samples, peak)
        for r, t in zip(ref_channels, test_channels)
    ]
    def mean(field):
        return float(np.mean([getattr(rep, field) for rep in reports]))
    row = [
        _fmt_metric(mean("rmse"), True),
        _fmt_metric(mean("psnr_db"), True),
        _fmt_metric(mean("mad"), True),
        _fmt_metric(mean("bias"), True),
        _fmt_metric(mean("ssim"), False),
    ]
    print(",".join(row))
    return 0


def generate_mask(kind: str, shape, seed: int = 0, rate: float = 1e-4,
                  mean_length: float = 1000.0, at=None, size=None,
                  count: int = 8, width: int = 2) -> Mask:
    """Build a reproducible erasure mask of the requested kind.

    gaps: 1-D; erasure starts are per-sample Bernoulli(rate), lengths are
    geometric with the given mean. rect: a single missing rectangle.
    scratches: randomly placed vertical missing stripes; on 3-D shapes the
    stripes persist across every frame.
    """
    shape = tuple(shape)
    rng = np.random.default_rng(seed)
    missing = np.zeros(shape, dtype=bool)
    if kind == "gaps":
        if len(shape) != 1:
            raise ValueError("gaps masks are 1-D")
        n = shape[0]
        starts = np.flatnonzero(rng.random(n) < rate)
        lengths = rng.geometric(1.0 / mean_length, size=starts.size)
        flat = missing.reshape(-1)
        for start, length in zip(starts, lengths):
            flat[start : start + int(length)] = True
    elif kind == "rect":
        if len(shape) != 2 or at is None or size is None:
            raise ValueError("rect masks are 2-D and need --at and --size")
        r, c = at
        h, w = size
        missing[r : r + h, c : c + w] = True
    elif kind == "scratches":
        if len(shape) not in (2, 3):
            raise ValueError("scratch masks are 2-D or 3-D")
        n_cols = shape[-1]
        positions = rng.choice(max(n_cols - width, 1), size=count, replace=False)
        for pos in positions:
            missing[..., pos : pos + width] = True
    else:
        raise ValueError(f"unknown mask kind {kind!r}")
    if missing.all():
        raise ValueError("parameters erase every sample; refusing to write a full mask")
    return Mask(~missing)


def _run_mask_gen(args) -> int:
    try:
        mask = generate_mask(
            args.kind, args.shape, seed=args.seed, rate=args.rate,
            mean_length=args.mean_length, at=args.at, size=args.size,
            count=args.count, width=args.width,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    save_mask(mask, args.output)
    return 0


_RUNNERS = {
    "inpaint-image": _run_inpaint_image,
    "inpaint-audio": _run_inpaint_audio,
    "inpaint-video": _run_inpaint_video,
    "metrics": _run_metrics,
    "mask-gen": _run_mask_gen,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _RUNNERS[args.command](args)
    except _UsageError as exc:
        print(f"paco {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except (MediaFormatError, NoCompletePatchesError, OSError, ValueError) as exc:
        print(f"paco {args.command}: error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"paco {args.command}: solver abort: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
