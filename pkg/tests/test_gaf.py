import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qgafkit.errors import DegenerateWindowError, DomainError, ValidationError
from qgafkit.gaf import (
    AngularField,
    NormalizedSeries,
    encode_classical,
    gadf,
    gadf_matrix,
    gasf,
    gasf_matrix,
    normalize,
    normalize_sym,
    normalize_unit,
    to_polar,
)


def ns(values):
    return NormalizedSeries(np.array(values, dtype=float), "sym")


def gasf_oracle(x, y):
    return x * y - math.sqrt(1 - x * x) * math.sqrt(1 - y * y)


def gadf_oracle(x, y):
    return math.sqrt(1 - x * x) * y - x * math.sqrt(1 - y * y)


def test_normalize_unit_examples():
    assert normalize_unit([1, 2, 3]).values.tolist() == [0, 0.5, 1]
    np.testing.assert_allclose(normalize_unit([-0.2, 0, 0.2]).values, [0, 0.5, 1], atol=1e-15)
    with pytest.raises(DegenerateWindowError):
        normalize_unit([5, 5, 5])


def test_normalize_sym_examples():
    assert normalize_sym([1, 2, 3]).values.tolist() == [-1, 0, 1]
    assert normalize_sym([0, 10]).values.tolist() == [-1, 1]
    assert normalize_sym([0, 5, 10]).values[1] == 0.0
    with pytest.raises(DegenerateWindowError):
        normalize_sym([2, 2])
    assert normalize_sym([1, 3]).range_tag == "sym"


def test_normalize_rejects_bad_input():
    with pytest.raises(ValidationError):
        normalize([1.0, float("nan")])
    with pytest.raises(ValidationError):
        normalize([1.0])
    with pytest.raises(ValidationError):
        normalize([1.0, 2.0], "percent")


def test_polar_examples():
    p = to_polar(ns([1, 0, -1]))
    np.testing.assert_allclose(p.phi, [0, math.pi / 2, math.pi], atol=1e-15)
    assert to_polar(NormalizedSeries(np.zeros(4), "unit")).r.tolist() == [0.25, 0.5, 0.75, 1.0]
    assert to_polar(ns([0.5])).phi[0] == pytest.approx(1.0471975512, abs=1e-10)


def test_polar_clamps_tolerance_and_rejects_beyond():
    p = to_polar(ns([1 + 5e-13, -1 - 5e-13]))
    assert p.phi.tolist() == [0.0, math.pi]
    with pytest.raises(DomainError):
        ns([1 + 1e-9])
    with pytest.raises(DomainError):
        NormalizedSeries(np.array([-0.1]), "unit")


def test_gasf_examples():
    m = gasf(ns([1, 0])).matrix
    np.testing.assert_allclose(m, [[1, 0], [0, -1]], atol=1e-15)
    assert gasf(ns([0.5, 0.8])).matrix[0, 1] == pytest.approx(-0.119615, abs=1e-6)
    assert gasf(ns([0.5, 0.8])).matrix[0, 1] == pytest.approx(gasf_oracle(0.5, 0.8), abs=1e-15)
    assert gasf(ns([0.6])).matrix[0, 0] == pytest.approx(-0.28, abs=1e-15)
    assert gasf(ns([0.6])).kind == "GASF"


def test_gadf_examples():
    m = gadf(ns([0.5, 0.8])).matrix
    assert m[0, 1] == pytest.approx(0.392820, abs=1e-6)
    assert m[0, 1] == pytest.approx(gadf_oracle(0.5, 0.8), abs=1e-15)
    assert m[1, 0] == -m[0, 1]
    assert np.all(np.diag(gadf(ns(np.linspace(-1, 1, 7))).matrix) == 0)


def test_gasf_matrix_examples():
    np.testing.assert_allclose(gasf_matrix(ns([1, 0])).matrix, gasf(ns([1, 0])).matrix, atol=1e-15)
    assert gasf_matrix(ns([0])).matrix.tolist() == [[-1.0]]


def test_gadf_matrix_follows_sine_of_difference():
    # phi = [0, pi/2]: entry (0, 1) = sin(0 - pi/2) = -1
    m = gadf_matrix(ns([1, 0])).matrix
    assert m.tolist() == [[0.0, -1.0], [1.0, 0.0]]
    np.testing.assert_allclose(gadf(ns([1, 0])).matrix, m, atol=1e-15)


def test_encode_classical_kinds():
    x = np.linspace(-0.02, 0.03, 30)
    assert encode_classical(x, "gasf").kind == "GASF"
    assert encode_classical(x, "GADF", start=40).source_window_start == 40
    with pytest.raises(ValidationError):
        encode_classical(x, "QGASF")


def test_angular_field_must_be_square():
    with pytest.raises(ValidationError):
        AngularField("GASF", np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        AngularField("MTF", np.zeros((2, 2)))


sym_values = arrays(np.float64, st.integers(1, 40), elements=st.floats(-1, 1))


@settings(max_examples=300, deadline=None)
@given(sym_values)
def test_dual_paths_agree(v):
    s = ns(v)
    assert np.max(np.abs(gasf(s).matrix - gasf_matrix(s).matrix)) <= 1e-12
    assert np.max(np.abs(gadf(s).matrix - gadf_matrix(s).matrix)) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(sym_values)
def test_symmetry_range_and_diagonal(v):
    s = ns(v)
    for m in (gasf(s).matrix, gasf_matrix(s).matrix):
        assert np.array_equal(m, m.T)
        assert m.min() >= -1 and m.max() <= 1
        np.testing.assert_allclose(np.diag(m), 2 * v * v - 1, rtol=0, atol=1e-12)
    for m in (gadf(s).matrix, gadf_matrix(s).matrix):
        assert np.array_equal(m, -m.T)
        assert m.min() >= -1 and m.max() <= 1


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(2, 40), elements=st.floats(-0.2, 0.2)),
       st.floats(1e-3, 1e3), st.floats(-10, 10), st.sampled_from(["unit", "sym"]))
def test_normalize_affine_invariant(x, a, b, tag):
    # keep the shifted window's spread well above the rounding of a*x + b
    if a * (x.max() - x.min()) < 1e-3:
        return
    base = normalize(x, tag).values
    moved = normalize(a * x + b, tag).values
    np.testing.assert_allclose(moved, base, rtol=0, atol=1e-9)
