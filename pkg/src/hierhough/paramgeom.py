"""Fixed-point geometry of the (m, b) parameter space.

Both axes are measured in integer *units*: the m-axis [-1, 1] and the
b-axis [-n, 2n] are each divided into ``2 * n_cells`` units, so every
region corner and center of the quad-tree down to the leaf level lands on
an integer. An edge point with effective coordinates (ex, ey) maps to the
parameter-space line ``b = ey - m * ex``; in units that line reads

    3n * beta = 2 * n_cells * (ey + ex + n) - 2 * ex * mu

and the side of the line a corner falls on is the sign of the integer

    2 * n_cells * (ey + ex + n) - 2 * ex * mu - 3n * beta.

Everything on the exact path uses Python or numpy integers only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

# bit positions, leftmost bit first
NE_BIT = 0b1000
NW_BIT = 0b0100
SW_BIT = 0b0010
SE_BIT = 0b0001


class Quad(enum.IntEnum):
    NE = 1
    NW = 2
    SW = 3
    SE = 4


# (m sign, b sign) of each child's offset from the parent center
QUAD_SIGNS = {Quad.NE: (1, 1), Quad.NW: (-1, 1), Quad.SW: (-1, -1), Quad.SE: (1, -1)}
QUAD_BIT = {Quad.NE: NE_BIT, Quad.NW: NW_BIT, Quad.SW: SW_BIT, Quad.SE: SE_BIT}
OPPOSITE = {Quad.NE: Quad.SW, Quad.NW: Quad.SE, Quad.SW: Quad.NE, Quad.SE: Quad.NW}


@dataclass(frozen=True)
class ParamGrid:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid side must be >= 2, got {self.n}")

    @property
    def l_max(self) -> int:
        return (self.n - 1).bit_length()

    @property
    def n_cells(self) -> int:
        return 1 << self.l_max

    @property
    def units(self) -> int:
        """Length of either axis in fixed-point units."""
        return 2 * self.n_cells

    @property
    def root(self) -> "Region":
        nc = self.n_cells
        return Region(0, nc, nc, nc)

    def m_value(self, mu) -> Fraction:
        return Fraction(-1) + Fraction(mu, self.n_cells)

    def b_value(self, beta) -> Fraction:
        return Fraction(-self.n) + Fraction(beta * 3 * self.n, 2 * self.n_cells)

    def leaf_at(self, i: int, j: int) -> "Region":
        """Leaf in m-column ``i`` and b-row ``j`` (both 0-based)."""
        return Region(self.l_max, 2 * i + 1, 2 * j + 1, 1)

    def leaf_index(self, region: "Region") -> tuple[int, int]:
        if region.level != self.l_max:
            raise ValueError("not a leaf region")
        return (region.cm - 1) // 2, (region.cb - 1) // 2


@dataclass(frozen=True)
class Region:
    level: int
    cm: int
    cb: int
    h: int

    def corners(self):
        """Corner unit coordinates in code order NE, NW, SW, SE."""
        cm, cb, h = self.cm, self.cb, self.h
        return ((cm + h, cb + h), (cm - h, cb + h), (cm - h, cb - h), (cm + h, cb - h))

    def contains_point(self, mu, beta) -> bool:
        return abs(mu - self.cm) <= self.h and abs(beta - self.cb) <= self.h


def check_region(region: Region, grid: ParamGrid) -> None:
    if not 0 <= region.level <= grid.l_max:
        raise ValueError(f"level {region.level} outside [0, {grid.l_max}]")
    if region.h != grid.n_cells >> region.level:
        raise ValueError("half-extent does not match level")
    for c in (region.cm, region.cb):
        if c - region.h < 0 or c + region.h > grid.units:
            raise ValueError("region exceeds parameter space")


def line_offset(ex: int, ey: int, grid: ParamGrid) -> int:
    """Constant term 2 * n_cells * (ey + ex + n) of the corner numerator."""
    return 2 * grid.n_cells * (ey + ex + grid.n)


def corner_numerator(ex: int, ey: int, mu: int, beta: int, grid: ParamGrid) -> int:
    return line_offset(ex, ey, grid) - 2 * mu * ex - 3 * grid.n * beta


def corner_sign(edge, corner: tuple[int, int], grid: ParamGrid) -> bool:
    """True when the corner lies strictly below the edge point's line."""
    mu, beta = corner
    return corner_numerator(edge.ex, edge.ey, mu, beta, grid) > 0


def corner_code(edge, region: Region, grid: ParamGrid) -> int:
    code = 0
    for bit, corner in zip((NE_BIT, NW_BIT, SW_BIT, SE_BIT), region.corners()):
        if corner_sign(edge, corner, grid):
            code |= bit
    return code


def passes(code: int) -> bool:
    return code != 0b0000 and code != 0b1111


MIXED = np.array([passes(c) for c in range(16)], dtype=bool)


def child_region(parent: Region, quad, grid: ParamGrid) -> Region:
    if parent.level >= grid.l_max:
        raise ValueError("cannot subdivide a leaf region")
    sm, sb = QUAD_SIGNS[Quad(quad)]
    h = parent.h >> 1
    return Region(parent.level + 1, parent.cm + sm * h, parent.cb + sb * h, h)


def _single_corner(code: int):
    """Quad whose corner alone is cut off by the line, or None."""
    for quad, bit in QUAD_BIT.items():
        if code == bit or code == 0b1111 ^ bit:
            return quad
    return None


def prune_child(parent_code: int, quad) -> bool:
    """Whether the line of a parent with this code provably misses the child.

    A line that separates a single corner C from the other three crosses
    only the two sides meeting at C, so it cannot reach the child
    diagonally opposite C.
    """
    cut = _single_corner(parent_code)
    return cut is not None and OPPOSITE[cut] == Quad(quad)


# PRUNE_TABLE[quad][code] for vectorised lookup
PRUNE_TABLE = {q: np.array([prune_child(c, q) for c in range(16)], dtype=bool) for q in Quad}


def circumcircle_distance(ex: int, ey: int, region: Region, grid: ParamGrid) -> float:
    # line in unit coordinates: 2*ex*mu + 3n*beta - offset = 0
    a = 2.0 * ex
    b = 3.0 * grid.n
    c = float(line_offset(ex, ey, grid))
    return abs(a * region.cm + b * region.cb - c) / math.sqrt(a * a + b * b)


def circumcircle_passes(edge, region: Region, grid: ParamGrid) -> bool:
    """Approximate membership: distance to center within the circumradius."""
    return circumcircle_distance(edge.ex, edge.ey, region, grid) <= region.h * math.sqrt(2.0)


def leaf_params(region: Region, grid: ParamGrid):
    """Exact (m_lo, m_hi, b_lo, b_hi) covered by a leaf region."""
    if region.level != grid.l_max:
        raise ValueError("leaf_params needs a leaf region")
    return (
        grid.m_value(region.cm - 1),
        grid.m_value(region.cm + 1),
        grid.b_value(region.cb - 1),
        grid.b_value(region.cb + 1),
    )


# -- vectorised kernels used by the detector -------------------------------

def region_codes(offset: np.ndarray, two_ex: np.ndarray, region: Region, three_n: int) -> np.ndarray:
    """Corner codes of many lines against one region (int64 arithmetic only).

    ``offset`` and ``two_ex`` are the per-edge terms ``line_offset`` and
    ``2 * ex``; the result is a uint8 array of 4-bit codes.
    """
    h = region.h
    base = offset - two_ex * region.cm - three_n * region.cb
    dm = two_ex * h
    db = three_n * h
    # numerator at (cm + sm*h, cb + sb*h) is base - sm*dm - sb*db
    top = base - db
    bottom = base + db
    code = (top > dm).view(np.uint8) << 3
    code |= (top > -dm).view(np.uint8) << 2
    code |= (bottom > -dm).view(np.uint8) << 1
    code |= (bottom > dm).view(np.uint8)
    return code


# Lattice of a subdivided region, (m step, b step) in parent half-extents.
# Bits 0-3 of a lattice index are the parent's own corner code; bits 4-8
# are the signs at the center and the four edge midpoints.
_LATTICE_BIT = {
    (1, 1): NE_BIT, (-1, 1): NW_BIT, (-1, -1): SW_BIT, (1, -1): SE_BIT,
    (0, 0): 1 << 4, (0, 1): 1 << 5, (0, -1): 1 << 6, (1, 0): 1 << 7, (-1, 0): 1 << 8,
}


def _child_table(quad: Quad) -> np.ndarray:
    sm, sb = QUAD_SIGNS[quad]
    # child corner (dm, db) in child half-extents -> lattice point of the parent
    corners = [((sm + dm) // 2, (sb + db) // 2) for dm, db in ((1, 1), (-1, 1), (-1, -1), (1, -1))]
    table = np.zeros(512, dtype=np.uint8)
    for index in range(512):
        code = 0
        for bit, point in zip((NE_BIT, NW_BIT, SW_BIT, SE_BIT), corners):
            if index & _LATTICE_BIT[point]:
                code |= bit
        table[index] = code
    return table


CHILD_TABLE = {q: _child_table(q) for q in Quad}


def lattice_index(offset: np.ndarray, two_ex: np.ndarray, parent_codes: np.ndarray,
                  parent: Region, three_n: int) -> np.ndarray:
    """9-bit lattice signs of many lines over a parent region.

    ``CHILD_TABLE[quad][index]`` is then the corner code of each line
    against that child, identical to evaluating the child's corners.
    """
    base = offset - two_ex * parent.cm - three_n * parent.cb
    dm = two_ex * parent.h
    db = three_n * parent.h
    index = parent_codes.astype(np.uint16)
    index |= (base > 0).view(np.uint8).astype(np.uint16) << 4
    index |= (base > db).view(np.uint8).astype(np.uint16) << 5
    index |= (base > -db).view(np.uint8).astype(np.uint16) << 6
    index |= (base > dm).view(np.uint8).astype(np.uint16) << 7
    index |= (base > -dm).view(np.uint8).astype(np.uint16) << 8
    return index


def region_circum(offset: np.ndarray, two_ex: np.ndarray, region: Region, three_n: int) -> np.ndarray:
    """Circumcircle membership of many lines against one region (float path)."""
    a = two_ex.astype(np.float64)
    b = float(three_n)
    dist = np.abs(a * region.cm + b * region.cb - offset.astype(np.float64)) / np.sqrt(a * a + b * b)
    return dist <= region.h * math.sqrt(2.0)
