"""Command-line entry point.

Exit codes: 0 success, 1 internal invariant violation, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .detector import DEFAULT_THRESHOLD, DetectorConfig, Variant, detect
from .edges import DEFAULT_MAG_THRESHOLD, edges_from_image, read_edges_csv, write_edges_csv
from .paramgeom import ParamGrid
from .pixmap import PGMError, load_pgm, render_points, save_pgm
from .synth import gen_scene, parse_line_spec, write_truth_csv


class UsageError(Exception):
    pass


class InvariantViolation(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _add_detector_flags(p: argparse.ArgumentParser, removal: bool = True) -> None:
    p.add_argument("input", type=Path, help="PGM image or edge-list CSV (set,x,y)")
    p.add_argument("--threshold", type=_positive, default=DEFAULT_THRESHOLD,
                   help="votes a region must exceed to be subdivided (default %(default)s)")
    if removal:
        p.add_argument("--no-removal", action="store_true",
                       help="keep solution points voting after their line is reported")
    p.add_argument("--no-pruning", action="store_true", help="disable sub-quadrant pruning")
    p.add_argument("--sobel-threshold", type=_non_negative, default=DEFAULT_MAG_THRESHOLD,
                   help="minimum |gx|+|gy| for an edge pixel (default %(default)s)")
    p.add_argument("--n", type=int, default=None,
                   help="grid side for CSV input (default: inferred from the coordinates)")


def _load_input(args):
    """Return (alpha, beta, width, height, is_image)."""
    path: Path = args.input
    suffix = path.suffix.lower()
    if suffix not in (".pgm", ".csv"):
        raise UsageError(f"{path}: expected a .pgm or .csv input")
    try:
        if suffix == ".pgm":
            img = load_pgm(path)
            if img.width < 3 or img.height < 3:
                raise UsageError(f"{path}: image must be at least 3x3 for Sobel")
            alpha, beta = edges_from_image(img, args.sobel_threshold)
            return alpha, beta, img.width, img.height, True
        alpha, beta = read_edges_csv(path.read_text(encoding="utf-8"))
    except (OSError, PGMError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    coords = [c for p in alpha + beta for c in (p.x, p.y)]
    side = args.n if args.n is not None else max(coords, default=1) + 1
    if side < 2:
        side = 2
    if coords and max(coords) >= side:
        raise UsageError(f"{path}: coordinates exceed --n {side}")
    return alpha, beta, side, side, False


def _config(args, variant: Variant) -> DetectorConfig:
    if args.no_pruning and variant is Variant.CIRCUMCIRCLE:
        raise UsageError("--no-pruning only applies to the exact variant")
    removal = not getattr(args, "no_removal", True)
    return DetectorConfig(args.threshold, variant, removal, not args.no_pruning)


def cmd_detect(args) -> int:
    variant = Variant(args.variant)
    cfg = _config(args, variant)
    alpha, beta, width, height, is_image = _load_input(args)
    grid = bench.grid_for(width, height)
    det = detect(alpha, beta, grid, cfg)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    (out / "lines.json").write_text(det.to_json(), encoding="utf-8")
    save_pgm(out / "solution.pgm", render_points(width, height, det.solution_points))
    if is_image:
        pts = [(p.x, p.y) for p in alpha + beta]
        save_pgm(out / "edges.pgm", render_points(width, height, pts))
    print(f"{len(det.lines)} line(s), {det.stats.total_votes} votes -> {out}")
    return 0


def cmd_compare(args) -> int:
    cfg = _config(args, Variant.EXACT)
    alpha, beta, width, height, _ = _load_input(args)
    row = bench.compare_row(alpha, beta, bench.grid_for(width, height), cfg, args.repeat)
    text = bench.write_rows([row], bench.COMPARE_COLUMNS)
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    if row["votes_exact"] > row["votes_circum"]:
        raise InvariantViolation("exact variant cast more votes than the circumcircle variant")
    return 0


def cmd_synth(args) -> int:
    try:
        lines = [parse_line_spec(s) for s in args.lines]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    if args.noise > args.n * args.n:
        raise UsageError("--noise exceeds the pixel count")
    scene = gen_scene(args.n, lines, args.noise, args.seed)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    save_pgm(out / "scene.pgm", scene.image)
    (out / "edges.csv").write_text(write_edges_csv(scene.edges), encoding="utf-8")
    (out / "truth.csv").write_text(write_truth_csv(scene.truth), encoding="utf-8")
    print(f"{len(scene.edges)} edge points -> {out}")
    return 0


def cmd_bench(args) -> int:
    cfg = _config(args, Variant.EXACT)
    images = {}
    if args.synthetic:
        for i in range(args.count):
            images[f"synthetic{i + 1}"] = bench.step_scene(256, args.lines, args.seed + i)
    if args.images is not None:
        paths = sorted(p for p in args.images.glob("*") if p.suffix.lower() == ".pgm")
        for p in paths:
            try:
                images[p.stem] = load_pgm(p)
            except (OSError, PGMError) as exc:
                raise UsageError(f"{p}: {exc}") from None
    if not images:
        raise UsageError("no input images (pass --images DIR with .pgm files or --synthetic)")
    sizes = sorted(set(args.sizes))
    if any(s < 3 for s in sizes):
        raise UsageError("--sizes must all be >= 3")

    def progress(name, size):
        print(f"  {name} @ {size}x{size} done", file=sys.stderr)

    report = bench.run_bench(images, cfg, args.repeat, sizes, args.sobel_threshold, progress)
    text = report.to_csv()
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    for row in report.compares:
        if row["votes_exact"] > row["votes_circum"]:
            raise InvariantViolation(f"{row['image']}@{row['size']}: exact votes exceed circumcircle votes")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hierhough", description="Hierarchical Hough line detection on PGM images and edge lists.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect lines in a PGM image or edge list")
    _add_detector_flags(p)
    p.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.EXACT.value)
    p.add_argument("--out", type=Path, default=Path("hough_out"), help="output directory")
    p.set_defaults(func=cmd_detect)

    # compare and bench always run without removal, see compare_variants
    p = sub.add_parser("compare", help="votes and timing of exact vs circumcircle on one input")
    _add_detector_flags(p, removal=False)
    p.add_argument("--repeat", type=_positive, default=1000,
                   help="timed repetitions per variant (default %(default)s)")
    p.add_argument("--out", type=Path, default=None, help="also write the CSV row here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate a synthetic scene with known lines")
    p.add_argument("--n", type=int, required=True, help="image side")
    p.add_argument("--lines", action="append", default=[], metavar="SET:M:B",
                   help="line as set:m:b, e.g. A:1/2:3 (repeatable)")
    p.add_argument("--noise", type=_non_negative, default=0, help="number of noise pixels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("synth_out"), help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="votes/time report across image sizes")
    p.add_argument("--images", type=Path, default=None, help="directory of .pgm images")
    p.add_argument("--synthetic", action="store_true", help="add synthetic step-edge scenes")
    p.add_argument("--count", type=_positive, default=3, help="synthetic scenes (default %(default)s)")
    p.add_argument("--lines", type=_positive, default=3, help="lines per synthetic scene")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", type=int, nargs="+", default=list(bench.BENCH_SIZES))
    p.add_argument("--threshold", type=_positive, default=DEFAULT_THRESHOLD)
    p.add_argument("--no-pruning", action="store_true")
    p.add_argument("--sobel-threshold", type=_non_negative, default=DEFAULT_MAG_THRESHOLD)
    p.add_argument("--repeat", type=_positive, default=1000)
    p.add_argument("--out", type=Path, default=None, help="report CSV path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
