import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxreg.errors import NonCoercive, OutOfRange
from maxreg.form import (
    ModulusOfContinuity,
    NonAutonomousForm,
    adjoint_form,
    bound_of,
    coercivity_of,
    certify_constants,
    diag_perturbed,
    sample_pairs,
    scalar_poly,
    unshifted,
)
from maxreg.triple import build_triple

from conftest import random_triple_grams

SCALAR = build_triple([[1.0]], [[1.0]])


def scalar_form(fn, modulus=ModulusOfContinuity(), M=10.0, delta=1.0):
    return NonAutonomousForm(SCALAR, lambda t: np.array([[fn(t)]]), 1.0, M, delta, modulus)


def test_certify_constant_scalar():
    rep = certify_constants(scalar_form(lambda t: 2.0, M=2.0, delta=2.0))
    assert rep.M_observed == pytest.approx(2.0)
    assert rep.delta_observed == pytest.approx(2.0)
    assert rep.omega_violation is None


def test_certify_linear_scalar():
    F = scalar_form(lambda t: 1.0 + t, ModulusOfContinuity("holder", 1.0, 1.0, 0.0), M=2.0, delta=1.0)
    rep = certify_constants(F)
    assert rep.delta_observed == pytest.approx(1.0)
    assert rep.M_observed == pytest.approx(2.0)
    assert rep.omega_violation is None
    assert rep.worst_omega_ratio == pytest.approx(1.0)


def test_certify_rejects_negative_form():
    with pytest.raises(NonCoercive):
        certify_constants(scalar_form(lambda t: -1.0))


def test_certify_flags_modulus_violation():
    F = scalar_form(lambda t: 1.0 + 2.0 * t, ModulusOfContinuity("holder", 1.0, 1.0, 0.0), M=3.0)
    rep = certify_constants(F)
    assert rep.omega_violation is not None
    assert rep.worst_omega_ratio == pytest.approx(2.0)


def test_certify_warns_on_optimistic_constants():
    F = scalar_form(lambda t: 2.0, M=1.0, delta=3.0)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        certify_constants(F)
    assert len(rec) == 2


def test_adjoint_examples():
    for S, Sa in (([[2.0]], [[2.0]]), ([[1 + 1j]], [[1 - 1j]]), ([[2.0, 1.0], [0.0, 2.0]], [[2.0, 0.0], [1.0, 2.0]])):
        S = np.array(S)
        T = build_triple(np.eye(len(S)), np.eye(len(S)))
        F = NonAutonomousForm(T, lambda t, S=S: S, 1.0, 3.0, 1.0)
        assert np.array_equal(adjoint_form(F).S(0.3), np.array(Sa))


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 8))
def test_adjoint_involution(seed, n):
    rng = np.random.default_rng(seed)
    T = build_triple(*random_triple_grams(rng, n))
    A, B = rng.standard_normal((2, n, n)) + 1j * rng.standard_normal((2, n, n))
    F = NonAutonomousForm(T, lambda t: A + t * B, 1.0, 1.0, 1.0)
    for t in (0.0, 0.4, 1.0):
        assert np.array_equal(adjoint_form(adjoint_form(F)).S(t), F.S(t))


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.0, 1.0))
def test_numerical_range_in_sector(seed, t):
    rng = np.random.default_rng(seed)
    T = build_triple(*random_triple_grams(rng, 6))
    K = rng.standard_normal((6, 6))
    F = NonAutonomousForm(T, lambda t: T.gram_V + 1j * t * (K - K.T), 1.0, 1.0, 1.0)
    S = F.S(t)
    M, delta = bound_of(T, S), coercivity_of(T, S)
    u = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    a = F(t, u, u)
    assert abs(a.imag) <= (M / delta) * a.real * (1 + 1e-12)


def test_modulus_checks():
    with pytest.raises(OutOfRange):
        ModulusOfContinuity("holder", 0.0, 1.0, 0.0)
    with pytest.raises(OutOfRange):
        ModulusOfContinuity("holder", 0.5, 1.0, 1.0)
    assert ModulusOfContinuity("holder", 0.6, 1.0, 0.5).admissible
    assert not ModulusOfContinuity("holder", 0.2, 1.0, 0.5).admissible


def test_modulus_integrals_closed_form():
    m = ModulusOfContinuity("holder", 0.6, 2.0, 0.5)
    # int_0^1 2 t^0.6 / t^1.25 dt = 2 / 0.35
    assert m.l1_integral(1.0) == pytest.approx(2.0 / 0.35)
    assert m.l2_integral(1.0) == pytest.approx(4.0 / 0.7)
    tab = ModulusOfContinuity("tabulated", gamma=0.5, samples=(np.linspace(0.01, 1, 200), 2 * np.linspace(0.01, 1, 200)))
    assert np.isfinite(tab.l1_integral(1.0))


def test_l2_integral_settles_under_refinement():
    m = ModulusOfContinuity("holder", 0.8, 1.0, 0.5)
    vals = [m.l2_integral(1.0, n) for n in (200, 400, 800)]
    exact = m.l2_integral(1.0)
    assert abs(vals[2] - exact) < abs(vals[0] - exact)
    assert vals[2] == pytest.approx(exact, rel=1e-3)


def test_sample_pairs_include_dyadic():
    pairs = sample_pairs(1.0, 5)
    gaps = {round(abs(t - s), 12) for t, s in pairs}
    assert round(2.0 ** -20, 12) in gaps
    assert all(0 <= s <= 1 and 0 <= t <= 1 for t, s in pairs)


def test_builtin_families_certify():
    for F in (scalar_poly([1.0, 1.0]), diag_perturbed(12, 0.6, 0.5, 2.0)):
        rep = certify_constants(F)
        assert rep.omega_violation is None
        assert rep.delta_observed >= F.coercivity_delta * (1 - 1e-9)
        assert F.modulus.admissible


def test_unshifted_removes_mass_multiple():
    T = build_triple(np.eye(2), np.diag([1.0, 4.0]))
    F = NonAutonomousForm(T, lambda t: np.diag([3.0, 6.0]), 1.0, 2.0, 1.0, shift=2.0)
    assert np.allclose(unshifted(F).S(0.5), np.diag([1.0, 4.0]))
    assert unshifted(F).shift == 0.0
