import csv
import io
import json
import math
from fractions import Fraction

import pytest

from hierhough.cli import main
from hierhough.detector import dense_leaves
from hierhough.edges import EdgeSet, read_edges_csv, write_edges_csv
from hierhough.paramgeom import ParamGrid, leaf_params
from hierhough.pixmap import GrayImage, load_pgm, save_pgm
from hierhough.synth import GroundTruthLine, gen_scene, rasterize_line


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_detect_black_image(tmp_path):
    src = tmp_path / "black.pgm"
    save_pgm(src, GrayImage.blank(16, 16))
    out = tmp_path / "out"
    assert run("detect", src, "--out", out) == 0
    doc = json.loads((out / "lines.json").read_text())
    assert doc["lines"] == [] and doc["stats"]["total_votes"] == 0
    assert load_pgm(out / "solution.pgm").pixels == bytes(256)
    assert load_pgm(out / "edges.pgm").pixels == bytes(256)


def _one_line_scene(tmp_path):
    # the first 60 of a 64-point line on a 64 x 64 image
    gt = GroundTruthLine(EdgeSet.ALPHA, Fraction(1, 8), 20)
    assert len(rasterize_line(gt, 64)) == 64
    assert run("synth", "--n", 64, "--lines", "A:1/8:20", "--seed", 1, "--out", tmp_path / "s") == 0
    text = (tmp_path / "s" / "edges.csv").read_text()
    rows = text.splitlines()
    # keep the header plus the first 60 points
    src = tmp_path / "line.csv"
    src.write_text("\n".join(rows[:61]) + "\n")
    return gt, src


def test_detect_one_synthetic_line(tmp_path):
    gt, src = _one_line_scene(tmp_path)
    out = tmp_path / "out"
    assert run("detect", src, "--n", 64, "--threshold", 40, "--out", out) == 0
    doc = json.loads((out / "lines.json").read_text())
    assert len(doc["lines"]) == 1
    line = doc["lines"][0]
    assert line["set"] == "A" and line["votes"] > 40
    assert not (out / "edges.pgm").exists()
    sol = load_pgm(out / "solution.pgm")
    assert sum(v == 255 for v in sol.pixels) == line["votes"]


def test_detect_no_removal_matches_dense_oracle(tmp_path):
    scene = gen_scene(32, [GroundTruthLine(EdgeSet.ALPHA, Fraction(1, 4), 6),
                           GroundTruthLine(EdgeSet.BETA, Fraction(-1, 2), 20)], 40, 4)
    src = tmp_path / "scene.csv"
    src.write_text(write_edges_csv(scene.edges))
    out = tmp_path / "out"
    assert run("detect", src, "--n", 32, "--threshold", 12, "--no-removal", "--out", out) == 0
    doc = json.loads((out / "lines.json").read_text())
    grid = ParamGrid(32)
    for tag, pts in (("A", scene.alpha), ("B", scene.beta)):
        got = {(Fraction(d["m_lo"]), Fraction(d["b_lo"])) for d in doc["lines"] if d["set"] == tag}
        want = {leaf_params(leaf, grid)[::2] for leaf in dense_leaves(pts, grid, 12)}
        assert got == want and got


def test_detect_pgm_image(tmp_path):
    scene = gen_scene(32, [GroundTruthLine(EdgeSet.ALPHA, 0, 12)], 0, 0)
    # a filled half-plane gives a clean step edge for Sobel
    arr = scene.image.to_array().copy()
    arr[: 32 - 12] = 255
    src = tmp_path / "step.pgm"
    save_pgm(src, GrayImage.from_array(arr))
    out = tmp_path / "out"
    assert run("detect", src, "--threshold", 20, "--out", out) == 0
    doc = json.loads((out / "lines.json").read_text())
    assert doc["lines"] and all(d["set"] == "A" for d in doc["lines"])
    assert (out / "edges.pgm").exists()


@pytest.mark.parametrize("flags", [["--threshold", "0"], ["--variant", "circum", "--no-pruning"]])
def test_detect_rejects_bad_flags(tmp_path, flags):
    src = tmp_path / "black.pgm"
    save_pgm(src, GrayImage.blank(8, 8))
    assert run("detect", src, "--out", tmp_path / "o", *flags) == 2


@pytest.mark.parametrize("name, content", [
    ("missing.pgm", None), ("bad.pgm", b"P6\n1 1\n255\n\x00"), ("bad.csv", b"Q,1,1\n"), ("x.txt", b""),
])
def test_detect_unreadable_input(tmp_path, name, content):
    src = tmp_path / name
    if content is not None:
        src.write_bytes(content)
    assert run("detect", src, "--out", tmp_path / "o") == 2


def test_compare_row(tmp_path, capsys):
    _, src = _one_line_scene(tmp_path)
    capsys.readouterr()
    out = tmp_path / "cmp.csv"
    assert run("compare", src, "--n", 64, "--repeat", 3, "--out", out) == 0
    (row,) = read_csv(out.read_text())
    assert list(row) == ["size", "votes_exact", "votes_circum", "time_exact", "time_circum", "c_v", "c_t"]
    assert int(row["size"]) == 64
    assert int(row["votes_circum"]) >= int(row["votes_exact"]) > 0
    assert float(row["c_v"]) >= 1
    assert float(row["c_v"]) == pytest.approx(int(row["votes_circum"]) / int(row["votes_exact"]))
    assert capsys.readouterr().out.startswith("size,")


def test_compare_empty_input(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("set,x,y\n")
    out = tmp_path / "cmp.csv"
    assert run("compare", src, "--repeat", 1, "--out", out) == 0
    (row,) = read_csv(out.read_text())
    assert row["votes_exact"] == row["votes_circum"] == "0"
    assert row["c_v"] == "" and row["c_t"] == ""


def test_compare_has_no_removal_flag(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("set,x,y\n")
    assert run("compare", src, "--no-removal") == 2


def test_synth_outputs(tmp_path):
    out = tmp_path / "s"
    assert run("synth", "--n", 8, "--lines", "A:0:5", "--noise", 0, "--seed", 1, "--out", out) == 0
    text = (out / "edges.csv").read_text()
    assert len(text.splitlines()) == 9
    alpha, beta = read_edges_csv(text)
    assert [(p.x, p.y) for p in alpha] == [(x, 5) for x in range(8)] and beta == []
    assert (out / "truth.csv").read_text() == "set,m,b,n_points\nA,0,5,8\n"
    assert load_pgm(out / "scene.pgm").width == 8


@pytest.mark.parametrize("flags", [["--lines", "A:2:0"], ["--lines", "bogus"], ["--noise", "65"]])
def test_synth_rejects(tmp_path, flags):
    assert run("synth", "--n", 8, "--out", tmp_path / "s", *flags) == 2


def test_synth_deterministic(tmp_path):
    args = ["synth", "--n", 32, "--lines", "B:1/3:4", "--lines", "A:-1/2:30", "--noise", 40, "--seed", 7]
    assert run(*args, "--out", tmp_path / "a") == 0
    assert run(*args, "--out", tmp_path / "b") == 0
    for name in ("scene.pgm", "edges.csv", "truth.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bench_synthetic(tmp_path):
    out = tmp_path / "report.csv"
    assert run("bench", "--synthetic", "--count", 1, "--sizes", 32, 64, "--repeat", 1, "--out", out) == 0
    rows = read_csv(out.read_text())
    assert len(rows) == 2 * 2
    assert [(r["size"], r["metric"]) for r in rows] == [("32", "votes"), ("32", "time"),
                                                       ("64", "votes"), ("64", "time")]
    for r in rows:
        ratio = float(r["ratio"])
        assert math.isclose(float(r["log10_ratio"]), math.log10(ratio), rel_tol=1e-12, abs_tol=1e-15)
        if r["metric"] == "votes":
            assert int(r["circum"]) >= int(r["exact"])


def test_bench_reproducible_except_time(tmp_path):
    args = ["bench", "--synthetic", "--count", 1, "--sizes", 32, "--repeat", 1, "--seed", 3]
    assert run(*args, "--out", tmp_path / "a.csv") == 0
    assert run(*args, "--out", tmp_path / "b.csv") == 0
    a = [r for r in read_csv((tmp_path / "a.csv").read_text()) if r["metric"] == "votes"]
    b = [r for r in read_csv((tmp_path / "b.csv").read_text()) if r["metric"] == "votes"]
    assert a == b


def test_bench_images_dir(tmp_path):
    d = tmp_path / "imgs"
    d.mkdir()
    scene = gen_scene(40, [GroundTruthLine(EdgeSet.ALPHA, Fraction(1, 5), 10)], 0, 0)
    arr = scene.image.to_array().copy()
    arr[:15] = 200
    save_pgm(d / "one.pgm", GrayImage.from_array(arr))
    out = tmp_path / "r.csv"
    assert run("bench", "--images", d, "--repeat", 1, "--out", out) == 0
    rows = read_csv(out.read_text())
    assert len(rows) == 2 * 4 and {r["image"] for r in rows} == {"one"}


def test_bench_empty_input(tmp_path):
    (tmp_path / "empty").mkdir()
    assert run("bench", "--images", tmp_path / "empty") == 2
    assert run("bench") == 2
