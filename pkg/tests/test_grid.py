"""Vector algebra, validation and serialization of the dense field types."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

import graphlap as gl
from graphlap.grid import read_image_csv, write_csv, write_pgm

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, width=64)


def images(max_side=6):
    shapes = array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=max_side)
    return arrays(np.float64, shapes, elements=finite_floats).map(gl.ImageGrid)


def image_pairs(max_side=6):
    """Two ImageGrids of one common shape."""
    shapes = array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=max_side)
    return shapes.flatmap(
        lambda s: st.tuples(
            arrays(np.float64, s, elements=finite_floats).map(gl.ImageGrid),
            arrays(np.float64, s, elements=finite_floats).map(gl.ImageGrid),
        )
    )


class TestConstruction:
    def test_values_are_float64_and_read_only(self):
        img = gl.ImageGrid([[1, 2], [3, 4]])
        assert img.values.dtype == np.float64
        with pytest.raises(ValueError):
            img.values[0, 0] = 5.0

    def test_input_array_is_copied(self):
        src = np.ones((2, 2))
        img = gl.ImageGrid(src)
        src[0, 0] = 7.0
        assert img.values[0, 0] == 1.0

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(gl.NonFiniteError):
            gl.ImageGrid([[0.0, bad]])
        with pytest.raises(gl.NonFiniteError):
            gl.Sinogram([[bad]])

    @pytest.mark.parametrize("bad", [[], [1.0, 2.0], [[[1.0]]], [[]]])
    def test_wrong_rank_or_empty_rejected(self, bad):
        with pytest.raises(gl.ShapeMismatch):
            gl.ImageGrid(bad)

    def test_shape_accessors(self):
        img = gl.ImageGrid(np.zeros((3, 5)))
        assert (img.height, img.width, img.shape) == (3, 5, (3, 5))
        sino = gl.Sinogram(np.zeros((4, 7)))
        assert (sino.num_angles, sino.num_detectors, sino.shape) == (4, 7, (4, 7))


class TestAlgebra:
    def test_dot_of_zeros_is_zero(self):
        z = gl.ImageGrid(np.zeros((4, 4)))
        assert gl.dot(z, z) == 0.0

    def test_dot_of_distinct_unit_pixels_is_zero(self):
        a = np.zeros((3, 3))
        b = np.zeros((3, 3))
        a[0, 1] = 1.0
        b[2, 2] = 1.0
        assert gl.dot(gl.ImageGrid(a), gl.ImageGrid(b)) == 0.0

    def test_dot_hand_computed_sum_of_squares(self):
        # 0.2^2 + 0.3^2 + 0.5^2 + 0.1^2 = 0.39
        u = gl.ImageGrid([[0.2, 0.3], [0.5, 0.1]])
        assert gl.dot(u, u) == pytest.approx(0.39, abs=1e-12)
        assert gl.norm(u) == pytest.approx(math.sqrt(0.39), abs=1e-12)

    def test_norm_of_zeros(self):
        assert gl.norm(gl.ImageGrid(np.zeros((2, 5)))) == 0.0

    def test_mixed_types_rejected(self):
        with pytest.raises(gl.ShapeMismatch):
            gl.dot(gl.ImageGrid(np.zeros((2, 2))), gl.Sinogram(np.zeros((2, 2))))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(gl.ShapeMismatch):
            gl.add(gl.ImageGrid(np.zeros((2, 2))), gl.ImageGrid(np.zeros((2, 3))))

    @given(image_pairs())
    def test_dot_is_bit_symmetric(self, pair):
        a, b = pair
        assert gl.dot(a, b) == gl.dot(b, a)

    @given(image_pairs())
    def test_cauchy_schwarz(self, pair):
        a, b = pair
        assert abs(gl.dot(a, b)) <= gl.norm(a) * gl.norm(b) * (1.0 + 1e-12)

    @given(images())
    def test_axpy_minus_one_cancels_exactly(self, a):
        assert gl.norm(gl.axpy(-1.0, a, a)) == 0.0

    @given(image_pairs())
    def test_axpy_zero_is_identity(self, pair):
        x, y = pair
        assert np.array_equal(gl.axpy(0.0, x, y).values, y.values)

    @given(image_pairs())
    def test_add_sub_axpy_consistent(self, pair):
        x, y = pair
        direct = gl.add(y, x)
        assert np.array_equal(gl.axpy(1.0, x, y).values, direct.values)
        back = gl.sub(direct, x)
        assert np.allclose(back.values, y.values, rtol=0, atol=1e-9)

    def test_scale_preserves_type(self):
        s = gl.scale(2.0, gl.Sinogram([[1.0, 2.0]]))
        assert isinstance(s, gl.Sinogram)
        assert np.array_equal(s.values, [[2.0, 4.0]])


class TestSerialization:
    def test_pgm_header_and_payload(self, tmp_path):
        img = gl.ImageGrid([[0.0, 1.0], [0.5, 2.0]])  # 2.0 clamps to 255
        path = tmp_path / "img.pgm"
        write_pgm(img, path)
        data = path.read_bytes()
        assert data.startswith(b"P5\n2 2\n255\n")
        assert data[len(b"P5\n2 2\n255\n"):] == bytes([0, 255, 128, 255])

    def test_pgm_clamps_negatives(self, tmp_path):
        path = tmp_path / "neg.pgm"
        write_pgm(gl.ImageGrid([[-3.0]]), path)
        assert path.read_bytes().endswith(bytes([0]))

    def test_csv_round_trip_is_lossless(self, tmp_path):
        rng = np.random.Generator(np.random.Philox(3))
        vals = rng.standard_normal((5, 7)) * np.logspace(-300, 2, 35).reshape(5, 7)
        vals[0, 0] = 1.0 / 3.0
        img = gl.ImageGrid(vals)
        path = tmp_path / "img.csv"
        write_csv(img, path)
        again = read_image_csv(path)
        assert np.array_equal(again.values, img.values)

    def test_csv_reader_skips_blank_lines(self, tmp_path):
        path = tmp_path / "img.csv"
        path.write_text("1.0,2.0\n\n3.0,4.0\n")
        img = read_image_csv(path)
        assert np.array_equal(img.values, [[1.0, 2.0], [3.0, 4.0]])
