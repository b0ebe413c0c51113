"""Synthetic scenes with known lines, for recovery and benchmark runs.

Noise positions and their set tags come from ``numpy.random.default_rng``
(PCG64) seeded with the caller's seed, so a seed reproduces a scene
exactly within this package.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._rational import parse_rational, rational_str
from .edges import EdgePoint, EdgeSet, raster_order
from .pixmap import GrayImage


@dataclass(frozen=True)
class GroundTruthLine:
    """ALPHA: y = m*x + b. BETA: x = m*y + b."""

    set: EdgeSet
    m: Fraction
    b: Fraction
    n_points: int = 0

    def __post_init__(self):
        object.__setattr__(self, "set", EdgeSet(self.set))
        object.__setattr__(self, "m", Fraction(self.m))
        object.__setattr__(self, "b", Fraction(self.b))
        if abs(self.m) > 1:
            raise ValueError(f"|m| must be <= 1, got {self.m}")


def round_half_up(q: Fraction) -> int:
    return math.floor(q + Fraction(1, 2))


def rasterize_line(gt: GroundTruthLine, n: int) -> list[tuple[int, int]]:
    """Image points (x, y) of a line, one per step along its dominant axis."""
    pts = []
    for t in range(n):
        s = round_half_up(gt.m * t + gt.b)
        if 0 <= s < n:
            pts.append((t, s) if gt.set is EdgeSet.ALPHA else (s, t))
    return pts


@dataclass
class Scene:
    image: GrayImage
    edges: list[EdgePoint]
    truth: list[GroundTruthLine]

    @property
    def alpha(self) -> list[EdgePoint]:
        return [p for p in self.edges if p.set is EdgeSet.ALPHA]

    @property
    def beta(self) -> list[EdgePoint]:
        return [p for p in self.edges if p.set is EdgeSet.BETA]


def gen_scene(n: int, lines: Sequence[GroundTruthLine], noise_points: int, seed: int) -> Scene:
    """Draw lines plus uniform noise on an n x n black image.

    A pixel shared by several lines keeps the tag of the first. Noise
    pixels are drawn without replacement; those landing on a line pixel
    are absorbed, and each surviving one is tagged ALPHA or BETA by a fair
    coin from the same generator. Edges come back in raster order.
    """
    if noise_points < 0 or noise_points > n * n:
        raise ValueError(f"noise_points must lie in [0, {n * n}]")
    tags: dict[tuple[int, int], EdgeSet] = {}
    truth = []
    for gt in lines:
        pts = rasterize_line(gt, n)
        truth.append(GroundTruthLine(gt.set, gt.m, gt.b, len(pts)))
        for p in pts:
            tags.setdefault(p, gt.set)

    rng = np.random.default_rng(seed)
    if noise_points:
        cells = rng.choice(n * n, size=noise_points, replace=False)
        coins = rng.integers(0, 2, size=noise_points)
        for cell, coin in zip(cells.tolist(), coins.tolist()):
            p = (cell % n, cell // n)
            tags.setdefault(p, EdgeSet.BETA if coin else EdgeSet.ALPHA)

    canvas = np.zeros((n, n), dtype=np.uint8)
    for x, y in tags:
        canvas[n - 1 - y, x] = 255
    edges = raster_order((EdgePoint(x, y, s) for (x, y), s in tags.items()), n)
    return Scene(GrayImage.from_array(canvas), edges, truth)


def write_truth_csv(truth: Sequence[GroundTruthLine]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["set", "m", "b", "n_points"])
    for gt in truth:
        w.writerow([gt.set.value, rational_str(gt.m), rational_str(gt.b), gt.n_points])
    return buf.getvalue()


def read_truth_csv(text: str) -> list[GroundTruthLine]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(GroundTruthLine(EdgeSet(row["set"].strip()), parse_rational(row["m"]),
                                   parse_rational(row["b"]), int(row["n_points"])))
    return out


def parse_line_spec(spec: str) -> GroundTruthLine:
    """Parse ``set:m:b``, e.g. ``A:1/2:3`` or ``B:-0.25:10``."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"line spec {spec!r} is not set:m:b")
    tag = parts[0].strip().upper()
    if tag not in ("A", "B"):
        raise ValueError(f"line spec {spec!r}: set must be A or B")
    try:
        m, b = parse_rational(parts[1]), parse_rational(parts[2])
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"line spec {spec!r}: m and b must be rationals") from None
    return GroundTruthLine(EdgeSet(tag), m, b)


def random_lines(n: int, count: int, rng: np.random.Generator, min_points: int = 0,
                 sets=(EdgeSet.ALPHA, EdgeSet.BETA)) -> list[GroundTruthLine]:
    """Random lines with dyadic m in [-1, 1] and integer b, each rasterizing to >= min_points."""
    out = []
    while len(out) < count:
        s = sets[int(rng.integers(len(sets)))]
        m = Fraction(int(rng.integers(-64, 65)), 64)
        b = Fraction(int(rng.integers(-n, 2 * n)))
        gt = GroundTruthLine(s, m, b)
        if len(rasterize_line(gt, n)) >= max(min_points, 1):
            out.append(gt)
    return out
