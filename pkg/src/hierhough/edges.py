"""Sobel gradients and the ALPHA/BETA split of edge points.

ALPHA holds points on image lines with |slope| <= 1; BETA holds the rest
and carries swapped effective coordinates so that the detector only ever
deals with bounded slopes.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pixmap import GrayImage

DEFAULT_MAG_THRESHOLD = 128

GX_KERNEL = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]])
# rows run with increasing geometric y (bottom-up)
GY_KERNEL = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]])


class EdgeSet(str, enum.Enum):
    ALPHA = "A"
    BETA = "B"


@dataclass(frozen=True)
class EdgePoint:
    x: int
    y: int
    set: EdgeSet

    def __post_init__(self):
        if not isinstance(self.set, EdgeSet):
            object.__setattr__(self, "set", EdgeSet(self.set))

    @property
    def ex(self) -> int:
        return self.x if self.set is EdgeSet.ALPHA else self.y

    @property
    def ey(self) -> int:
        return self.y if self.set is EdgeSet.ALPHA else self.x

    @classmethod
    def from_effective(cls, ex: int, ey: int, set: EdgeSet) -> "EdgePoint":
        if set is EdgeSet.ALPHA:
            return cls(ex, ey, set)
        return cls(ey, ex, set)


@dataclass(frozen=True)
class GradientField:
    """Per-pixel Sobel responses, arrays indexed ``[y, x]`` with y from the bottom."""

    gx: np.ndarray
    gy: np.ndarray

    @property
    def width(self) -> int:
        return self.gx.shape[1]

    @property
    def height(self) -> int:
        return self.gx.shape[0]

    def at(self, x: int, y: int) -> tuple[int, int]:
        return int(self.gx[y, x]), int(self.gy[y, x])


def sobel(img: GrayImage) -> GradientField:
    """3x3 Sobel responses; the one-pixel border is left at (0, 0)."""
    if img.width < 3 or img.height < 3:
        raise ValueError(f"Sobel needs at least a 3x3 image, got {img.width}x{img.height}")
    f = img.to_array()[::-1].astype(np.int32)  # geometric orientation
    h, w = f.shape
    gx = np.zeros((h, w), dtype=np.int32)
    gy = np.zeros((h, w), dtype=np.int32)
    for dy in range(3):
        for dx in range(3):
            window = f[dy:h - 2 + dy, dx:w - 2 + dx]
            if GX_KERNEL[dy, dx]:
                gx[1:-1, 1:-1] += GX_KERNEL[dy, dx] * window
            if GY_KERNEL[dy, dx]:
                gy[1:-1, 1:-1] += GY_KERNEL[dy, dx] * window
    return GradientField(gx, gy)


def raster_order(points: Iterable[EdgePoint], height: int) -> list[EdgePoint]:
    """Sort into PGM raster order (top row first, then left to right)."""
    return sorted(points, key=lambda p: (height - 1 - p.y, p.x))


def partition_edges(grad: GradientField, mag_threshold: int = DEFAULT_MAG_THRESHOLD):
    """Threshold the L1 gradient magnitude and split edge pixels into (alpha, beta).

    A pixel is an edge iff ``|gx| + |gy| >= mag_threshold`` (and the
    threshold is positive). It goes to ALPHA when ``|gx| <= |gy|``, i.e. the
    edge tangent has slope magnitude at most 1. Both lists come back in
    raster order.
    """
    if mag_threshold < 0:
        raise ValueError("mag_threshold must be non-negative")
    if mag_threshold == 0:
        return [], []
    ax = np.abs(grad.gx)
    ay = np.abs(grad.gy)
    is_edge = (ax + ay) >= mag_threshold
    is_alpha = ax <= ay
    alpha, beta = [], []
    # walk raster order: geometric rows from the top down
    for y in range(grad.height - 1, -1, -1):
        for x in np.flatnonzero(is_edge[y]):
            x = int(x)
            if is_alpha[y, x]:
                alpha.append(EdgePoint(x, y, EdgeSet.ALPHA))
            else:
                beta.append(EdgePoint(x, y, EdgeSet.BETA))
    return alpha, beta


def edges_from_image(img: GrayImage, mag_threshold: int = DEFAULT_MAG_THRESHOLD):
    return partition_edges(sobel(img), mag_threshold)


def write_edges_csv(points: Iterable[EdgePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["set", "x", "y"])
    for p in points:
        w.writerow([p.set.value, p.x, p.y])
    return buf.getvalue()


def read_edges_csv(text: str) -> tuple[list[EdgePoint], list[EdgePoint]]:
    """Parse ``set,x,y`` rows (header optional) into (alpha, beta), keeping file order."""
    alpha, beta = [], []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or not "".join(row).strip():
            continue
        if lineno == 1 and row[0].strip().lower() == "set":
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields, got {len(row)}")
        tag = row[0].strip().upper()
        try:
            x, y = int(row[1]), int(row[2])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer coordinate") from None
        if x < 0 or y < 0:
            raise ValueError(f"line {lineno}: negative coordinate")
        if tag == "A":
            alpha.append(EdgePoint(x, y, EdgeSet.ALPHA))
        elif tag == "B":
            beta.append(EdgePoint(x, y, EdgeSet.BETA))
        else:
            raise ValueError(f"line {lineno}: unknown set tag {row[0]!r}")
    return alpha, beta


def split_sets(points: Sequence[EdgePoint]) -> tuple[list[EdgePoint], list[EdgePoint]]:
    alpha = [p for p in points if p.set is EdgeSet.ALPHA]
    beta = [p for p in points if p.set is EdgeSet.BETA]
    return alpha, beta
