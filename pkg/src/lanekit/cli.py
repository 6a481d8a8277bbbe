"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Usage problems are
argparse's domain; anything raised while actually working lands in the
LaneKitError handler and prints a single "error:" line.
"""

from __future__ import annotations

import argparse
import sys
import traceback

from .bench import run_bench
from .calibration import calibrate_zhang, parse_corners_file, refine_reprojection, save_model
from .config import load_config
from .errors import LaneKitError
from .evaluate import run_eval
from .pipeline import run_process
from .synth import run_synth


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for runtime
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("size must be positive")
    return w, h


def build_parser() -> _Parser:
    parser = _Parser(prog="lanekit", description="lane detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("calibrate", help="fit a camera model from board corners")
    p.add_argument("--corners", required=True, help="corner observations file")
    p.add_argument("--size", required=True, type=_size, metavar="WxH",
                   help="image size in pixels")
    p.add_argument("--out", required=True, help="output calibration JSON")

    p = sub.add_parser("process", help="run the pipeline over a frame directory")
    p.add_argument("--in", dest="input_dir", required=True, help="input frame directory")
    p.add_argument("--config", default=None, help="pipeline config file")
    p.add_argument("--out", dest="out_dir", required=True, help="output directory")
    p.add_argument("--debug", action="store_true",
                   help="also write masks and window traces")

    p = sub.add_parser("synth", help="render a synthetic test sequence")
    p.add_argument("--spec", required=True, help="scenario description file")
    p.add_argument("--out", dest="out_dir", required=True, help="output directory")

    p = sub.add_parser("eval", help="score output against generator truth")
    p.add_argument("--in", dest="input_dir", required=True, help="input frame directory")
    p.add_argument("--truth", required=True, help="truth file from synth")
    p.add_argument("--config", default=None, help="pipeline config file")

    p = sub.add_parser("bench", help="measure throughput")
    p.add_argument("--in", dest="input_dir", required=True, help="input frame directory")
    p.add_argument("--config", default=None, help="pipeline config file")
    p.add_argument("--reps", type=int, default=3, help="repetitions (default 3)")
    return parser


def _cmd_calibrate(args) -> int:
    views = parse_corners_file(args.corners)
    result = refine_reprojection(calibrate_zhang(views, args.size), views)
    save_model(result.model, args.out)
    print(f"calibrated {len(views)} views, rms {result.rms_reprojection_error:.4f} px")
    print(f"wrote {args.out}")
    return 0


def _cmd_process(args) -> int:
    cfg = load_config(args.config)
    csv_path = run_process(args.input_dir, cfg, args.out_dir, debug=args.debug)
    print(f"wrote {csv_path}")
    return 0


def _cmd_synth(args) -> int:
    count = run_synth(args.spec, args.out_dir)
    print(f"wrote {count} frames to {args.out_dir}")
    return 0


def _cmd_eval(args) -> int:
    cfg = load_config(args.config)
    report = run_eval(args.input_dir, args.truth, cfg)
    print(report.to_text(), end="")
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    report = run_bench(args.input_dir, cfg, reps=args.reps)
    print(report.to_text(), end="")
    return 0


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "process": _cmd_process,
    "synth": _cmd_synth,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except LaneKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
