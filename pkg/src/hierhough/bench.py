"""Vote-count and timing comparison between the exact and circumcircle variants."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .detector import DetectorConfig, compare_variants
from .edges import DEFAULT_MAG_THRESHOLD, edges_from_image
from .paramgeom import ParamGrid
from .pixmap import GrayImage

BENCH_SIZES = (32, 64, 128, 256)

COMPARE_COLUMNS = ["size", "votes_exact", "votes_circum", "time_exact", "time_circum", "c_v", "c_t"]
REPORT_COLUMNS = ["image", "size", "metric", "circum", "exact", "ratio", "log10_ratio"]


def resize_box(img: GrayImage, size: int) -> GrayImage:
    """Area-average resample to size x size."""
    if img.width == size and img.height == size:
        return img
    src = Image.fromarray(np.array(img.to_array()))
    return GrayImage.from_array(np.asarray(src.resize((size, size), Image.BOX)))


def grid_for(width: int, height: int) -> ParamGrid:
    return ParamGrid(max(width, height, 2))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def compare_row(alpha, beta, grid: ParamGrid, cfg: DetectorConfig, repeat: int) -> dict:
    cmp = compare_variants(alpha, beta, grid, cfg, repeat)
    return {
        "size": grid.n,
        "votes_exact": cmp.votes_exact,
        "votes_circum": cmp.votes_circum,
        "time_exact": cmp.time_exact,
        "time_circum": cmp.time_circum,
        "c_v": cmp.c_v,
        "c_t": cmp.c_t,
    }


def write_rows(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _log10(ratio):
    return math.log10(ratio) if ratio else None


@dataclass
class RunReport:
    """Per (image, size) comparisons, laid out like the votes/time table."""

    compares: list[dict] = field(default_factory=list)

    def add(self, image_id: str, row: dict) -> None:
        self.compares.append({"image": image_id, **row})

    def rows(self) -> list[dict]:
        out = []
        for c in self.compares:
            for metric, circ, exact, ratio in (
                ("votes", c["votes_circum"], c["votes_exact"], c["c_v"]),
                ("time", c["time_circum"], c["time_exact"], c["c_t"]),
            ):
                out.append({
                    "image": c["image"], "size": c["size"], "metric": metric,
                    "circum": circ, "exact": exact, "ratio": ratio,
                    "log10_ratio": _log10(ratio),
                })
        return out

    def to_csv(self) -> str:
        return write_rows(self.rows(), REPORT_COLUMNS)


def run_bench(images: dict[str, GrayImage], cfg: DetectorConfig, repeat: int,
              sizes=BENCH_SIZES, sobel_threshold: int = DEFAULT_MAG_THRESHOLD,
              progress=None) -> RunReport:
    report = RunReport()
    for name, img in images.items():
        for size in sizes:
            scaled = resize_box(img, size)
            alpha, beta = edges_from_image(scaled, sobel_threshold)
            report.add(name, compare_row(alpha, beta, grid_for(size, size), cfg, repeat))
            if progress:
                progress(name, size)
    return report


def step_scene(n: int, n_lines: int, seed: int, salt: float = 0.002) -> GrayImage:
    """Piecewise-constant image whose step edges run along random lines.

    Each line raises the luminance on one side by a fixed amount, so Sobel
    finds the lines at every resampled size. A sprinkle of salt pixels
    adds isolated edge noise.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:n, 0:n]
    acc = np.full((n, n), 40.0)
    for _ in range(n_lines):
        theta = rng.uniform(0, np.pi)
        cx, cy = rng.uniform(0.2 * n, 0.8 * n, size=2)
        side = (xx - cx) * np.cos(theta) + (yy - cy) * np.sin(theta) > 0
        acc += np.where(side, 180.0 / n_lines + 20, 0.0)
    img = np.clip(acc, 0, 255).astype(np.uint8)
    salt_mask = rng.random((n, n)) < salt
    img[salt_mask] = 255
    return GrayImage.from_array(img)
