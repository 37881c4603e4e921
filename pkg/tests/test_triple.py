import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxreg.errors import DimensionMismatch, NotHermitian, NotPositiveDefinite, OutOfRange
from maxreg.triple import build_triple, operator_norm_scales, scale_norm

from conftest import random_hpd, random_triple_grams

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(1, 12)


# construction --------------------------------------------------------------


def test_scalar_triple():
    T = build_triple([[1.0]], [[4.0]])
    assert T.eigvals == pytest.approx([4.0])
    assert T.embed_const == pytest.approx(0.5)


def test_diagonal_triple():
    T = build_triple(np.eye(2), np.diag([1.0, 9.0]))
    assert T.eigvals == pytest.approx([1.0, 9.0])
    assert T.embed_const == pytest.approx(1.0)


def test_two_by_two_eigenvectors():
    T = build_triple(np.eye(2), [[2.0, 1.0], [1.0, 2.0]])
    assert T.eigvals == pytest.approx([1.0, 3.0])
    s = 1 / np.sqrt(2)
    assert np.allclose(T.eigvecs[:, 0], [s, -s])
    assert np.allclose(T.eigvecs[:, 1], [s, s])


def test_rejects_bad_grams():
    with pytest.raises(NotHermitian):
        build_triple(np.eye(2), [[2.0, 1.0], [0.0, 2.0]])
    with pytest.raises(NotPositiveDefinite):
        build_triple(np.eye(2), np.diag([1.0, -1.0]))
    with pytest.raises(DimensionMismatch):
        build_triple(np.eye(2), np.eye(3))


def test_eigendata_read_only():
    T = build_triple(np.eye(2), np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        T.eigvals[0] = 5.0


@given(seeds, dims)
def test_parseval(seed, n):
    rng = np.random.default_rng(seed)
    H, V = random_triple_grams(rng, n)
    T = build_triple(H, V)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    c = T.coords(v)
    assert np.sum(np.abs(c) ** 2) == pytest.approx(T.h_norm(v) ** 2, rel=1e-10)
    assert np.sum(T.eigvals * np.abs(c) ** 2) == pytest.approx(T.v_norm(v) ** 2, rel=1e-10)
    assert np.all(T.eigvals >= T.embed_const ** -2 * (1 - 1e-12))


# scale norms ---------------------------------------------------------------


def test_scale_norm_examples():
    T = build_triple([[1.0]], [[4.0]])
    assert scale_norm(T, [1.0], 0.5) == pytest.approx(np.sqrt(2.0))
    D = build_triple(np.eye(2), np.diag([1.0, 9.0]))
    assert scale_norm(D, [1.0, 1.0], 0.5) == pytest.approx(2.0)


def test_scale_norm_order_zero_is_h_norm(rng):
    H, V = random_triple_grams(rng, 5)
    T = build_triple(H, V)
    v = rng.standard_normal(5)
    assert scale_norm(T, v, 0.0) == pytest.approx(T.h_norm(v), rel=1e-12)
    assert scale_norm(T, v, 1.0) == pytest.approx(T.v_norm(v), rel=1e-12)


def test_scale_norm_rejects_order():
    T = build_triple([[1.0]], [[4.0]])
    with pytest.raises(OutOfRange):
        scale_norm(T, [1.0], 1.5)
    with pytest.raises(DimensionMismatch):
        scale_norm(T, [1.0, 2.0], 0.5)


@given(seeds, dims, st.floats(0.0, 1.0))
def test_interpolation_inequality(seed, n, ell):
    rng = np.random.default_rng(seed)
    T = build_triple(*random_triple_grams(rng, n))
    v = rng.standard_normal(n)
    lhs = scale_norm(T, v, ell)
    rhs = scale_norm(T, v, 0.0) ** (1 - ell) * scale_norm(T, v, 1.0) ** ell
    assert lhs <= rhs * (1 + 1e-10)


@given(seeds, dims, st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_monotone_when_spectrum_above_one(seed, n, a, b):
    rng = np.random.default_rng(seed)
    H = random_hpd(rng, n, cond=5.0)
    T = build_triple(H, 2.0 * H + random_hpd(rng, n))  # lam >= 2
    lo, hi = sorted((a, b))
    v = rng.standard_normal(n)
    assert scale_norm(T, v, lo) <= scale_norm(T, v, hi) * (1 + 1e-12)


# operator norms ------------------------------------------------------------


def test_operator_norm_examples():
    T = build_triple([[1.0]], [[4.0]])
    assert operator_norm_scales(T, [[2.0]], 1.0, -1.0) == pytest.approx(0.5)
    D = build_triple(np.eye(2), np.diag([1.0, 9.0]))
    assert operator_norm_scales(D, np.diag([1.0, 3.0]), 1.0, 0.0) == pytest.approx(1.0)


@given(seeds, dims, st.floats(-1.0, 1.0), st.floats(-3.0, 3.0))
def test_multiple_of_identity(seed, n, ell, c):
    T = build_triple(*random_triple_grams(np.random.default_rng(seed), n))
    assert operator_norm_scales(T, c * np.eye(n), ell, ell) == pytest.approx(abs(c), rel=1e-10, abs=1e-14)


@given(seeds, dims, st.floats(0.0, 0.99))
def test_duality(seed, n, gamma):
    rng = np.random.default_rng(seed)
    T = build_triple(*random_triple_grams(rng, n))
    B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = operator_norm_scales(T, B, 1.0, -gamma)
    b = operator_norm_scales(T, T.h_adjoint(B), gamma, -1.0)
    assert a == pytest.approx(b, rel=1e-10)


@given(seeds, dims)
def test_operator_norm_bounds_action(seed, n):
    rng = np.random.default_rng(seed)
    T = build_triple(*random_triple_grams(rng, n))
    B = rng.standard_normal((n, n))
    v = rng.standard_normal(n)
    nrm = operator_norm_scales(T, B, 0.5, -0.5)
    assert scale_norm(T, B @ v, -0.5) <= nrm * scale_norm(T, v, 0.5) * (1 + 1e-10) + 1e-14
