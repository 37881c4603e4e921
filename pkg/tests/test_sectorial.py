import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxreg.errors import NonCoercive, NotStable, OutOfRange, SingularResolvent
from maxreg.form import diag_perturbed
from maxreg.sectorial import (
    ESTIMATES,
    QuadratureConfig,
    analyticity_constant,
    decay_constants,
    inv_sqrt,
    inv_sqrt_oracle,
    lambda_samples,
    make_snapshot,
    matrix_snapshot,
    resolvent,
    resolvent_continuity_constant,
    semigroup_apply,
    semigroup_matrix,
    semigroup_oracle,
    sqrt_from_inv,
    verify_resolvent_estimates,
)
from maxreg.triple import build_triple, operator_norm_scales

from conftest import random_hpd, random_sectorial

E1, E3 = np.exp(-1.0), np.exp(-3.0)
# frozen from closed forms: e^{-A} and A^{-1/2} for A = [[2,1],[1,2]] (eigenvalues 1, 3)
EXP_SYM = np.array([[0.208833254769653132, -0.159046186401789189], [-0.159046186401789189, 0.208833254769653132]])
INVSQRT_SYM = np.array([[0.788675134594812882, -0.211324865405187118], [-0.211324865405187118, 0.788675134594812882]])

SYM = np.array([[2.0, 1.0], [1.0, 2.0]])
JORDAN = np.array([[2.0, 1.0], [0.0, 2.0]])


# snapshots ------------------------------------------------------------------


def test_snapshot_default_angle_is_numerical_range():
    T = build_triple(np.eye(2), np.eye(2))
    P = make_snapshot(T, np.diag([1.0, 2.0]))
    assert P.sector_theta == 0.0
    assert P.contour_vartheta == pytest.approx(np.pi / 4)


def test_snapshot_angle_from_constants():
    T = build_triple(np.eye(1), np.eye(1))
    P = make_snapshot(T, [[1.0]], M=1.0, delta=1.0)
    assert P.sector_theta == pytest.approx(np.pi / 4)


def test_snapshot_rejects():
    T = build_triple(np.eye(1), np.eye(1))
    with pytest.raises(NonCoercive):
        make_snapshot(T, [[-1.0]])
    with pytest.raises(NotStable):
        make_snapshot(T, [[-1.0]], theta=0.5)
    with pytest.raises(OutOfRange):
        make_snapshot(T, [[1.0]], theta=0.2, vartheta=0.1)


# resolvents -------------------------------------------------------------------


def test_resolvent_examples():
    assert resolvent(matrix_snapshot([[2.0]]), -1.0) == pytest.approx(np.array([[-1 / 3]]))
    R = resolvent(matrix_snapshot(np.diag([1.0, 3.0])), 1j)
    assert np.allclose(R, np.diag([1 / (1j - 1), 1 / (1j - 3)]))
    R = resolvent(matrix_snapshot(JORDAN), 0.0)
    assert np.allclose(R, [[-0.5, 0.25], [0.0, -0.5]])


def test_resolvent_at_eigenvalue():
    P = matrix_snapshot([[1.0]], theta=0.5)
    with pytest.warns(UserWarning), pytest.raises(SingularResolvent):
        resolvent(P, 1.0)


@given(st.integers(0, 2 ** 32 - 1))
def test_resolvent_identity(seed):
    rng = np.random.default_rng(seed)
    P = matrix_snapshot(random_sectorial(rng, 5))
    lam, mu = -1.0 + 2.0j, -3.0 - 0.5j
    R1, R2 = resolvent(P, lam), resolvent(P, mu)
    assert np.allclose(R1 - R2, (mu - lam) * R1 @ R2, atol=1e-12)


def test_scalar_estimate_constant():
    P = make_snapshot(build_triple([[1.0]], [[1.0]]), [[1.0]])
    rep = verify_resolvent_estimates(P, 0.0, [-1.0, -10.0, -100.0])
    # |(lam - 1)^{-1}| (1 + |lam|) = 1 on the negative axis
    assert rep.constants["scale_to_scale"] == pytest.approx(1.0)
    assert rep.constants["scale_to_scale"] <= 2.0


def test_identity_estimate_constant():
    T = build_triple(np.eye(3), np.eye(3))
    P = make_snapshot(T, np.eye(3))
    for ell in (0.0, 0.5, 1.0):
        rep = verify_resolvent_estimates(P, ell, [-1.0])
        assert rep.constants["dual_to_dual"] == pytest.approx(1.0)


def test_diagonal_large_lambda_limit():
    T = build_triple(np.eye(2), np.diag([1.0, 3.0]))
    P = make_snapshot(T, np.diag([1.0, 3.0]))
    rep = verify_resolvent_estimates(P, 1.0, [-1e6])
    assert rep.constants["scale_to_scale"] == pytest.approx(1.0, rel=1e-5)


def test_estimates_reject_lambdas_inside_sector():
    P = matrix_snapshot([[1.0]], theta=0.5)
    with pytest.raises(OutOfRange):
        verify_resolvent_estimates(P, 0.5, [1.0 + 0.1j])


def test_estimate_labels_cover_six_bounds():
    labels = [e[0] for e in ESTIMATES]
    assert len(set(labels)) == 6


def test_estimates_bounded_without_growth():
    F = diag_perturbed(12, 0.6, 0.5, 1.0)
    P = make_snapshot(F.triple, F.S(0.5))
    rep = verify_resolvent_estimates(P, 0.5, lambda_samples(P, per_decade=4))
    assert all(np.isfinite(v) for v in rep.constants.values())
    assert not any(rep.growth.values())


# semigroup ------------------------------------------------------------------------


def test_semigroup_examples():
    assert semigroup_apply(matrix_snapshot([[1.0]]), 1.0, [1.0]) == pytest.approx([np.exp(-1.0)], abs=1e-8)
    v = semigroup_apply(matrix_snapshot(np.diag([1.0, 3.0])), 0.5, [1.0, 1.0])
    assert np.allclose(v, [np.exp(-0.5), np.exp(-1.5)], atol=1e-8)
    v = semigroup_apply(matrix_snapshot(JORDAN), 1.0, [0.0, 1.0])
    assert np.allclose(v, [-np.exp(-2.0), np.exp(-2.0)], atol=1e-8)


def test_semigroup_oracle_examples():
    assert np.array_equal(semigroup_oracle(matrix_snapshot(SYM), 0.0), np.eye(2))
    assert semigroup_oracle(matrix_snapshot([[3.0]]), 1.0) == pytest.approx(np.array([[np.exp(-3.0)]]))
    assert np.allclose(semigroup_oracle(matrix_snapshot(SYM), 1.0), EXP_SYM, atol=1e-14)
    assert EXP_SYM[0, 0] == pytest.approx((E1 + E3) / 2, abs=1e-15)


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8), st.sampled_from([0.01, 0.3, 1.0]))
def test_contour_matches_oracle(seed, n, t):
    rng = np.random.default_rng(seed)
    P = matrix_snapshot(random_sectorial(rng, n))
    v = rng.standard_normal(n)
    ref = semigroup_oracle(P, t) @ v
    assert np.linalg.norm(semigroup_apply(P, t, v) - ref) <= 1e-7 * np.linalg.norm(ref) + 1e-14


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(0.1, 0.2), (0.05, 0.5), (0.3, 0.7)]))
def test_semigroup_law(seed, ts):
    rng = np.random.default_rng(seed)
    P = matrix_snapshot(random_sectorial(rng, 6))
    t, s = ts
    v = rng.standard_normal(6)
    quad = QuadratureConfig()
    both = semigroup_apply(P, t + s, v, quad)
    comp = semigroup_apply(P, t, semigroup_apply(P, s, v, quad), quad)
    assert np.linalg.norm(both - comp) <= 5 * quad.tol * np.linalg.norm(both)


def test_semigroup_on_general_triple(rng):
    H = random_hpd(rng, 5, cond=4.0)
    V = H + random_hpd(rng, 5, cond=30.0)
    T = build_triple(H, V)
    P = make_snapshot(T, V + 0.3 * (np.triu(V, 1) - np.tril(V, -1)))
    v = rng.standard_normal(5)
    ref = semigroup_oracle(P, 0.2) @ v
    assert T.h_norm(semigroup_apply(P, 0.2, v) - ref) <= 1e-7 * T.h_norm(ref)


def test_semigroup_matrix_columns():
    P = matrix_snapshot(SYM)
    assert np.allclose(semigroup_matrix(P, 1.0), EXP_SYM, atol=1e-8)


# inverse square root --------------------------------------------------------------


def test_inv_sqrt_examples():
    assert inv_sqrt(matrix_snapshot([[4.0]])) == pytest.approx(np.array([[0.5]]), abs=1e-9)
    assert np.allclose(inv_sqrt(matrix_snapshot(np.diag([1.0, 9.0]))), np.diag([1.0, 1 / 3]), atol=1e-9)
    assert np.allclose(inv_sqrt(matrix_snapshot(SYM)), INVSQRT_SYM, atol=1e-9)
    assert np.allclose(inv_sqrt_oracle(SYM), INVSQRT_SYM, atol=1e-14)


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 10))
def test_inv_sqrt_squares_to_inverse(seed, n):
    rng = np.random.default_rng(seed)
    A = random_sectorial(rng, n)
    R = inv_sqrt(matrix_snapshot(A))
    Ainv = np.linalg.inv(A)
    assert np.linalg.norm(R @ R - Ainv) <= 1e-8 * np.linalg.norm(Ainv)
    assert np.linalg.norm(R @ A - A @ R) <= 1e-8 * np.linalg.norm(A)


def test_sqrt_from_inv_squares_to_operator(rng):
    A = random_hpd(rng, 6, cond=30.0)
    Q = sqrt_from_inv(matrix_snapshot(A))
    assert np.allclose(Q @ Q, A, rtol=1e-7, atol=1e-7)


def test_shifted_square_root_domains_are_equal():
    """``(A + mu)^{1/2} A^{-1/2}`` and its inverse stay bounded for mu in {0, 1, 10}, uniformly in n."""
    vals = []
    for n in (8, 16, 32):
        F = diag_perturbed(n, 0.6, 0.5, 1.0)
        T = F.triple
        P0 = make_snapshot(T, F.S(0.5))
        R0 = inv_sqrt(P0)
        row = []
        for mu in (0.0, 1.0, 10.0):
            Pm = make_snapshot(T, F.S(0.5) + mu * T.gram_H)
            X = sqrt_from_inv(Pm) @ R0
            row.append((operator_norm_scales(T, X, 0, 0), operator_norm_scales(T, np.linalg.inv(X), 0, 0)))
        vals.append(row)
    vals = np.array(vals)
    assert np.allclose(vals[:, 0], 1.0, atol=1e-7)
    assert np.all(np.abs(vals[-1] / vals[0] - 1.0) <= 0.1)


# smoothing bounds -------------------------------------------------------------------


def test_analyticity_constant_stable():
    F = diag_perturbed(16, 0.6, 0.5, 1.0)
    P = make_snapshot(F.triple, F.S(0.5))
    c1 = analyticity_constant(P, np.geomspace(1e-4, 10, 25))
    c4 = analyticity_constant(P, np.geomspace(1e-4, 10, 97))
    assert abs(c4 / c1 - 1) <= 0.1
    # self-adjoint part: sup_x x e^{-x} = 1/e is the scalar benchmark
    assert c4 >= np.exp(-1.0) * (1 - 1e-3)


def test_decay_constants_finite_and_stable():
    F = diag_perturbed(16, 0.6, 0.5, 1.0)
    P = make_snapshot(F.triple, F.S(0.5))
    a = decay_constants(P, 0.5, np.geomspace(1e-5, 5, 20))
    b = decay_constants(P, 0.5, np.geomspace(1e-5, 5, 77))
    for k in a:
        assert np.isfinite(a[k]) and abs(b[k] / a[k] - 1) <= 0.1


def test_resolvent_continuity_constant_stable():
    F = diag_perturbed(16, 0.6, 0.5, 2.0)
    P = make_snapshot(F.triple, F.S(0.0))
    lams = lambda_samples(P, per_decade=3)
    cs = [resolvent_continuity_constant(F, 0.5, 0.5 + d, 0.5, lams) for d in (1e-1, 1e-2, 1e-3)]
    assert all(np.isfinite(cs))
    assert max(cs) <= 10 * min(cs)
