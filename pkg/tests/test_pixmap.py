import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hierhough.pixmap import (
    GrayImage,
    PGMDimensionError,
    PGMHeaderError,
    PGMMaxvalError,
    PGMTruncatedError,
    read_pgm,
    render_points,
    write_pgm,
)


def test_read_minimal_p5():
    img = read_pgm(b"P5\n2 2\n255\n" + bytes([0, 255, 0, 255]))
    assert (img.width, img.height) == (2, 2)
    assert img.pixels == bytes([0, 255, 0, 255])


def test_read_minimal_p2():
    img = read_pgm(b"P2\n1 1\n255\n0\n")
    assert img == GrayImage(1, 1, b"\x00")


def test_write_p2_single_pixel():
    assert write_pgm(GrayImage(1, 1, b"\x00"), binary=False) == b"P2\n1 1\n255\n0\n"


def test_header_width_before_height():
    img = GrayImage.blank(2, 3)
    header = write_pgm(img).split(b"\n")[1]
    assert header == b"2 3"


def test_comments_accepted_not_emitted():
    data = b"P2\n# made by hand\n2 1 # trailing\n255\n10 20\n"
    img = read_pgm(data)
    assert img.pixels == bytes([10, 20])
    assert b"#" not in write_pgm(img, binary=False)
    assert b"#" not in write_pgm(img, binary=True)


def test_p2_and_p5_agree():
    rng = np.random.default_rng(4)
    arr = rng.integers(0, 256, size=(5, 7))
    img = GrayImage.from_array(arr)
    assert read_pgm(write_pgm(img, True)) == read_pgm(write_pgm(img, False)) == img


@pytest.mark.parametrize("seed", range(20))
def test_round_trip_seeded(seed):
    rng = np.random.default_rng(seed)
    h, w = rng.integers(1, 40, size=2)
    img = GrayImage.from_array(rng.integers(0, 256, size=(h, w)))
    for binary in (True, False):
        assert read_pgm(write_pgm(img, binary)) == img


@given(
    st.integers(1, 12).flatmap(
        lambda w: st.integers(1, 12).flatmap(
            lambda h: st.tuples(st.just(w), st.just(h), st.binary(min_size=w * h, max_size=w * h))
        )
    ),
    st.booleans(),
)
@settings(max_examples=100)
def test_round_trip_property(dims, binary):
    w, h, data = dims
    img = GrayImage(w, h, data)
    assert read_pgm(write_pgm(img, binary)) == img


@pytest.mark.parametrize(
    "data, exc",
    [
        (b"P6\n1 1\n255\n\x00", PGMHeaderError),
        (b"P5\n1 x\n255\n\x00", PGMHeaderError),
        (b"P5\n1 1\n", PGMHeaderError),
        (b"P5\n1 1\n65535\n\x00\x00", PGMMaxvalError),
        (b"P5\n2 2\n255\n\x00\x00", PGMTruncatedError),
        (b"P2\n2 2\n255\n0 0 0\n", PGMTruncatedError),
        (b"P5\n0 2\n255\n", PGMDimensionError),
        (b"P5\n100000 100000\n255\n", PGMDimensionError),
        (b"P2\n1 1\n200\n201\n", PGMMaxvalError),
    ],
)
def test_parse_errors_are_distinct(data, exc):
    with pytest.raises(exc):
        read_pgm(data)


def test_low_maxval_rescaled():
    img = read_pgm(b"P2\n3 1\n1\n0 1 0\n")
    assert img.pixels == bytes([0, 255, 0])


def test_gray_image_invariants():
    with pytest.raises(ValueError):
        GrayImage(2, 2, b"\x00")
    with pytest.raises(ValueError):
        GrayImage.from_array(np.array([[256]]))


def test_render_empty():
    img = render_points(3, 2, [])
    assert img.pixels == bytes(6)


def test_render_single_point_bottom_left():
    img = render_points(2, 2, [(0, 0)])
    assert img.to_array().tolist() == [[0, 0], [255, 0]]
    assert img.at(0, 0) == 255


def test_render_rejects_out_of_bounds():
    with pytest.raises(ValueError):
        render_points(2, 2, [(2, 0)])
    with pytest.raises(ValueError):
        render_points(2, 2, [(0, -1)])


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 4)), max_size=40))
def test_render_counts_unique_points(points):
    img = render_points(7, 5, points)
    arr = img.to_array()
    assert np.count_nonzero(arr == 255) == len(set(points))
    assert np.count_nonzero(arr == 0) == 35 - len(set(points))
