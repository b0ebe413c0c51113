"""Hierarchical slope-intercept Hough transform with exact integer corner codes."""

from .detector import (
    CodeStack,
    DetectedLine,
    Detection,
    DetectorConfig,
    Variant,
    VoteStats,
    compare_variants,
    dense_votes,
    detect,
)
from .edges import EdgePoint, EdgeSet, partition_edges, sobel
from .paramgeom import ParamGrid, Quad, Region, corner_code, passes
from .pixmap import GrayImage, read_pgm, render_points, write_pgm
from .synth import GroundTruthLine, gen_scene, rasterize_line

__version__ = "0.1.0"
