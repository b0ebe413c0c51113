"""Hierarchical voting over the (m, b) quad-tree.

Each set of edge points (ALPHA, then BETA) is processed independently.
Starting from the whole parameter space, every edge point's line gets a
4-bit corner code per region; mixed codes vote. A region whose votes
strictly exceed the threshold is split into NE, NW, SW, SE children,
visited depth first. A super-threshold leaf yields a detected line and,
with removal on, its supporting points are zeroed at every level.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._rational import rational_str
from .edges import EdgePoint, EdgeSet
from .paramgeom import (
    MIXED,
    CHILD_TABLE,
    PRUNE_TABLE,
    ParamGrid,
    Quad,
    Region,
    child_region,
    lattice_index,
    leaf_params,
    region_circum,
    region_codes,
)

DEFAULT_THRESHOLD = 40

# stored for circumcircle members; the float test has no corner pattern
CIRCUM_MEMBER = 0b1010


class Variant(str, enum.Enum):
    EXACT = "exact"
    CIRCUMCIRCLE = "circum"


@dataclass(frozen=True)
class DetectorConfig:
    threshold: int = DEFAULT_THRESHOLD
    variant: Variant = Variant.EXACT
    removal: bool = True
    pruning: bool = True

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError(f"threshold must be >= 1, got {self.threshold}")


class CodeStack:
    """One 4-bit code per (edge, level), two codes per byte.

    Levels are paired: byte ``e * pairs + level // 2`` holds levels
    ``2k`` (low nibble) and ``2k + 1`` (high nibble) of edge ``e``. With an
    odd level count the last level is packed two edges per byte after the
    paired block, so the total is exactly ``ceil(n_edges * levels / 2)``.
    """

    def __init__(self, n_edges: int, levels: int):
        self.n_edges = n_edges
        self.levels = levels
        self.pairs = levels // 2
        self.data = np.zeros((n_edges * levels + 1) // 2, dtype=np.uint8)

    @property
    def nbytes(self) -> int:
        return self.data.nbytes

    def _tail(self, level: int) -> bool:
        return level == 2 * self.pairs

    def get(self, level: int, idx: np.ndarray) -> np.ndarray:
        if self._tail(level):
            base = self.n_edges * self.pairs
            shift = ((idx & 1) << 2).astype(np.uint8)
            return (self.data[base + (idx >> 1)] >> shift) & 0xF
        return (self.data[idx * self.pairs + (level >> 1)] >> ((level & 1) << 2)) & 0xF

    def set(self, level: int, idx: np.ndarray, codes) -> None:
        if np.isscalar(codes):
            codes = np.full(idx.shape, codes & 0xF, dtype=np.uint8)
        if self._tail(level):
            base = self.n_edges * self.pairs
            # neighbouring edges share a byte: write each parity separately
            for parity in (0, 1):
                sel = (idx & 1) == parity
                byte = base + (idx[sel] >> 1)
                shift = parity << 2
                self.data[byte] = (self.data[byte] & (0xF0 >> shift)) | (codes[sel] << shift)
            return
        byte = idx * self.pairs + (level >> 1)
        shift = (level & 1) << 2
        self.data[byte] = (self.data[byte] & (0xF0 >> shift)) | (codes << shift)

    def clear(self, idx: np.ndarray) -> None:
        """Zero every level's code for the given edges."""
        for level in range(self.levels):
            self.set(level, idx, 0)


@dataclass
class VoteStats:
    votes_per_level: list[int]
    nodes_expanded: int = 0
    code_evaluations: int = 0
    pruned_children: int = 0
    wall_time: float = 0.0

    @property
    def total_votes(self) -> int:
        return sum(self.votes_per_level)

    def merge(self, other: "VoteStats") -> None:
        for i, v in enumerate(other.votes_per_level):
            self.votes_per_level[i] += v
        self.nodes_expanded += other.nodes_expanded
        self.code_evaluations += other.code_evaluations
        self.pruned_children += other.pruned_children

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "votes_per_level": list(self.votes_per_level),
            "total_votes": self.total_votes,
            "nodes_expanded": self.nodes_expanded,
            "code_evaluations": self.code_evaluations,
            "pruned_children": self.pruned_children,
        }
        if timing:
            d["wall_time"] = self.wall_time
        return d


@dataclass(frozen=True)
class DetectedLine:
    set: EdgeSet
    leaf: Region
    m_lo: Fraction
    m_hi: Fraction
    b_lo: Fraction
    b_hi: Fraction
    support: tuple[tuple[int, int], ...]

    @property
    def votes(self) -> int:
        return len(self.support)

    def contains(self, m, b) -> bool:
        return self.m_lo <= m <= self.m_hi and self.b_lo <= b <= self.b_hi

    def to_dict(self) -> dict:
        return {
            "set": self.set.value,
            "m_lo": rational_str(self.m_lo),
            "m_hi": rational_str(self.m_hi),
            "b_lo": rational_str(self.b_lo),
            "b_hi": rational_str(self.b_hi),
            "votes": self.votes,
            "support": [list(p) for p in self.support],
        }


@dataclass
class Detection:
    lines: list[DetectedLine]
    solution_points: list[tuple[int, int]]
    stats: VoteStats
    # (set, level, cm, cb) -> votes, filled only when tracing
    node_votes: dict = field(default_factory=dict)

    def to_json(self, timing: bool = True) -> str:
        """JSON document with one compact object per detected line."""
        lines = ",\n".join("    " + json.dumps(ln.to_dict()) for ln in self.lines)
        stats = json.dumps(self.stats.to_dict(timing))
        body = f"[\n{lines}\n  ]" if lines else "[]"
        return f'{{\n  "lines": {body},\n  "stats": {stats}\n}}\n'


def _effective(points: Sequence[EdgePoint], grid: ParamGrid):
    ex = np.fromiter((p.ex for p in points), dtype=np.int64, count=len(points))
    ey = np.fromiter((p.ey for p in points), dtype=np.int64, count=len(points))
    if len(points) and (ex.min() < 0 or ey.min() < 0 or ex.max() >= grid.n or ey.max() >= grid.n):
        raise ValueError(f"edge point outside the [0, {grid.n}) grid range")
    return ex, ey


class _SetPass:
    """One traversal over a single edge set."""

    def __init__(self, points, edge_set, grid, cfg, stats, out, trace):
        self.points = points
        self.edge_set = edge_set
        self.grid = grid
        self.cfg = cfg
        self.stats = stats
        self.out = out
        self.trace = trace
        ex, ey = _effective(points, grid)
        self.offset = 2 * grid.n_cells * (ey + ex + grid.n)
        self.two_ex = 2 * ex
        self.three_n = 3 * grid.n
        self.store = CodeStack(len(points), grid.l_max + 1)
        self.exact = cfg.variant is Variant.EXACT
        self.pruning = cfg.pruning and self.exact
        self.removals = 0

    def _circum_codes(self, region: Region, idx: np.ndarray) -> np.ndarray:
        member = region_circum(self.offset[idx], self.two_ex[idx], region, self.three_n)
        return np.where(member, CIRCUM_MEMBER, 0).astype(np.uint8)

    def _record(self, region: Region, idx: np.ndarray, codes: np.ndarray) -> np.ndarray:
        self.store.set(region.level, idx, codes)
        voters = idx[MIXED[codes]]
        self.stats.votes_per_level[region.level] += len(voters)
        if self.trace is not None:
            self.trace[(self.edge_set.value, region.level, region.cm, region.cb)] = len(voters)
        return voters

    def run(self) -> None:
        if not self.points:
            return
        root = self.grid.root
        idx = np.arange(len(self.points), dtype=np.int64)
        self.stats.code_evaluations += len(idx)
        if self.exact:
            codes = region_codes(self.offset, self.two_ex, root, self.three_n)
        else:
            codes = self._circum_codes(root, idx)
        voters = self._record(root, idx, codes)
        self._after_vote(root, voters)

    def _after_vote(self, region: Region, voters: np.ndarray) -> None:
        if len(voters) <= self.cfg.threshold:
            return
        if region.level == self.grid.l_max:
            self._solution(region, voters)
        else:
            self._expand(region, voters)

    def _expand(self, parent: Region, candidates: np.ndarray) -> None:
        self.stats.nodes_expanded += 1
        level = parent.level
        seen_removals = -1
        lattice = None
        for quad in Quad:
            child = child_region(parent, quad, self.grid)
            if seen_removals != self.removals:
                # a solution in an earlier sibling may have zeroed codes
                parent_codes = self.store.get(level, candidates)
                live = MIXED[parent_codes]
                seen_removals = self.removals
                if self.exact and lattice is None:
                    lattice = lattice_index(self.offset[candidates], self.two_ex[candidates],
                                            parent_codes, parent, self.three_n)
            take = live
            if self.pruning:
                # pruned edges are never read back at this child's level
                skip = live & PRUNE_TABLE[quad][parent_codes]
                n_skip = int(np.count_nonzero(skip))
                if n_skip:
                    self.stats.pruned_children += n_skip
                    take = live & ~skip
            idx = candidates[take]
            self.stats.code_evaluations += len(idx)
            if self.exact:
                codes = CHILD_TABLE[quad][lattice[take]]
            else:
                codes = self._circum_codes(child, idx)
            voters = self._record(child, idx, codes)
            self._after_vote(child, voters)

    def _solution(self, leaf: Region, voters: np.ndarray) -> None:
        support = tuple((self.points[i].x, self.points[i].y) for i in voters)
        m_lo, m_hi, b_lo, b_hi = leaf_params(leaf, self.grid)
        self.out.lines.append(DetectedLine(self.edge_set, leaf, m_lo, m_hi, b_lo, b_hi, support))
        self.out.solution_points.extend(support)
        if self.cfg.removal:
            self.store.clear(voters)
            self.removals += 1


def detect(
    alpha: Sequence[EdgePoint],
    beta: Sequence[EdgePoint],
    grid: ParamGrid,
    cfg: DetectorConfig = DetectorConfig(),
    trace: bool = False,
) -> Detection:
    """Run the hierarchical transform on ALPHA and then BETA.

    With ``trace`` set, the vote count of every visited node is recorded in
    ``Detection.node_votes``.
    """
    # validate both sets before any traversal
    _effective(alpha, grid)
    _effective(beta, grid)
    stats = VoteStats([0] * (grid.l_max + 1))
    out = Detection([], [], stats, {} if trace else None)
    start = time.perf_counter()
    for points, edge_set in ((alpha, EdgeSet.ALPHA), (beta, EdgeSet.BETA)):
        _SetPass(list(points), edge_set, grid, cfg, stats, out, out.node_votes).run()
    stats.wall_time = time.perf_counter() - start
    if not trace:
        out.node_votes = {}
    return out


def code_store_bytes(n_edges: int, n: int) -> int:
    """Bytes a code store allocates for ``n_edges`` points on an n x n image."""
    return CodeStack(n_edges, ParamGrid(n).l_max + 1).nbytes


def dense_votes(points: Sequence[EdgePoint], grid: ParamGrid) -> np.ndarray:
    """Brute-force leaf accumulator, indexed ``[m column, b row]``.

    Every lattice corner of the leaf grid is tested against every edge
    line; a leaf counts an edge when its four corners disagree.
    """
    nc = grid.n_cells
    acc = np.zeros((nc, nc), dtype=np.int64)
    if not points:
        return acc
    ex, ey = _effective(points, grid)
    lattice = np.arange(0, 2 * nc + 1, 2, dtype=np.int64)  # leaf corners in units
    offset = 2 * nc * (ey + ex + grid.n)
    for e in range(len(points)):
        num = offset[e] - 2 * ex[e] * lattice[:, None] - 3 * grid.n * lattice[None, :]
        below = num > 0  # [mu corner, beta corner]
        ne = below[1:, 1:]
        nw = below[:-1, 1:]
        sw = below[:-1, :-1]
        se = below[1:, :-1]
        all_below = ne & nw & sw & se
        none_below = ~(ne | nw | sw | se)
        acc += ~(all_below | none_below)
    return acc


def dense_leaves(points: Sequence[EdgePoint], grid: ParamGrid, threshold: int) -> set[Region]:
    acc = dense_votes(points, grid)
    return {grid.leaf_at(int(i), int(j)) for i, j in zip(*np.nonzero(acc > threshold))}


@dataclass
class VariantComparison:
    votes_exact: int
    votes_circum: int
    time_exact: float
    time_circum: float

    @property
    def c_v(self):
        return self.votes_circum / self.votes_exact if self.votes_exact else None

    @property
    def c_t(self):
        # no exact votes means no edges at all, so there was nothing to time
        if not self.votes_exact or self.time_exact <= 0:
            return None
        return self.time_circum / self.time_exact


def compare_variants(alpha, beta, grid: ParamGrid, cfg: DetectorConfig = DetectorConfig(),
                     repeat: int = 1) -> VariantComparison:
    """Vote totals from one run of each variant, times summed over ``repeat`` runs.

    Both variants run with removal off whatever ``cfg`` says. Removal makes
    each traversal depend on which leaves it reported earlier, so the two
    variants would prune different subtrees and their totals would stop
    being comparable; without it every exact vote is also a circumcircle vote.
    """
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    results = {}
    for variant in (Variant.EXACT, Variant.CIRCUMCIRCLE):
        run_cfg = DetectorConfig(cfg.threshold, variant, removal=False, pruning=cfg.pruning)
        votes = None
        elapsed = 0.0
        for _ in range(repeat):
            det = detect(alpha, beta, grid, run_cfg)
            elapsed += det.stats.wall_time
            if votes is None:
                votes = det.stats.total_votes
        results[variant] = (votes, elapsed)
    (ve, te), (vc, tc) = results[Variant.EXACT], results[Variant.CIRCUMCIRCLE]
    return VariantComparison(ve, vc, te, tc)
