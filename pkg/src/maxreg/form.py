"""Non-autonomous sesquilinear forms a(t; u, v) = v^* S(t) u on a discrete triple."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.integrate as sint
import scipy.linalg as sla

from .errors import NonCoercive, OutOfRange
from .triple import HilbertTriple, build_triple, operator_norm_scales


@dataclass(frozen=True)
class ModulusOfContinuity:
    """Modulus ``omega`` bounding the V x V_gamma increments of the form.

    ``kind="holder"`` means ``omega(r) = c * r**alpha``; ``kind="tabulated"``
    interpolates ``samples = (r, omega(r))`` linearly (with ``omega(0) = 0``).
    """

    kind: str = "holder"
    alpha: float = 1.0
    c: float = 0.0
    gamma: float = 0.0
    samples: Optional[tuple] = None

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise OutOfRange(f"gamma={self.gamma} must lie in [0, 1)")
        if self.kind == "holder":
            if not 0.0 < self.alpha <= 1.0:
                raise OutOfRange(f"alpha={self.alpha} must lie in (0, 1]")
            if self.c < 0:
                raise OutOfRange("holder constant must be nonnegative")
        elif self.kind == "tabulated":
            if self.samples is None:
                raise OutOfRange("tabulated modulus needs samples")
        else:
            raise OutOfRange(f"unknown modulus kind {self.kind!r}")

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind == "holder":
            return self.c * r ** self.alpha
        rs, ws = (np.asarray(a, dtype=float) for a in self.samples)
        return np.interp(r, np.concatenate([[0.0], rs]), np.concatenate([[0.0], ws]))

    @property
    def admissible(self) -> bool:
        """Strict ``alpha > gamma/2`` (holder) -- what the maximal-regularity results need."""
        if self.kind == "holder":
            return self.alpha > self.gamma / 2
        return np.isfinite(self.l1_integral(1.0)) and np.isfinite(self.sup_ratio(1.0))

    def sup_ratio(self, T, n=2000):
        """``sup_{0<t<=T} omega(t) / t**(gamma/2)`` on a geometric grid."""
        t = T * np.logspace(-12, 0, n)
        return float(np.max(self(t) / t ** (self.gamma / 2)))

    def l1_integral(self, T):
        """``int_0^T omega(t) / t**(1+gamma/2) dt``; infinite when it diverges."""
        if self.kind == "holder":
            p = self.alpha - self.gamma / 2
            return self.c * T ** p / p if p > 0 else np.inf
        return _log_quad(lambda t: self(t) / t ** (1 + self.gamma / 2), T)

    def l2_integral(self, T, n_nodes=None):
        """``int_0^T omega(t)**2 / t**(1+gamma) dt``.

        With ``n_nodes`` the integral is evaluated by a trapezoid rule in
        ``log t`` on ``[log T - sqrt(n_nodes), log T]``, so refinement both
        shrinks the step and pushes the truncation towards 0 -- used to watch
        the quadrature settle.
        """
        f = lambda t: self(t) ** 2 / t ** (1 + self.gamma)
        if n_nodes is None:
            if self.kind == "holder":
                p = 2 * self.alpha - self.gamma
                return self.c ** 2 * T ** p / p if p > 0 else np.inf
            return _log_quad(f, T)
        x = np.linspace(np.log(T) - np.sqrt(n_nodes), np.log(T), n_nodes + 1)
        t = np.exp(x)
        return float(np.trapezoid(f(t) * t, x))


def _log_quad(f, T):
    val, _ = sint.quad(lambda x: f(np.exp(x)) * np.exp(x), -60.0, np.log(T), limit=400)
    return float(val)


@dataclass(frozen=True)
class NonAutonomousForm:
    """``a(t; u, v) = v^* matrix_at(t) u`` with declared constants.

    ``shift`` records a multiple of ``gram_H`` already folded into
    ``matrix_at`` to make the form coercive; solvers undo it with the
    exponential change of variables.
    """

    triple: HilbertTriple
    matrix_at: Callable[[float], np.ndarray]
    horizon: float
    bound_M: float
    coercivity_delta: float
    modulus: ModulusOfContinuity = field(default_factory=ModulusOfContinuity)
    shift: float = 0.0
    name: str = "form"

    def S(self, t):
        return np.asarray(self.matrix_at(float(t)))

    def operator(self, t):
        """Matrix of A(t) acting on H-representatives."""
        return self.triple.h_representative(self.S(t))

    def __call__(self, t, u, v):
        return np.vdot(v, self.S(t) @ u)


def adjoint_form(F: NonAutonomousForm) -> NonAutonomousForm:
    S = F.matrix_at
    return replace(F, matrix_at=lambda t: np.conj(np.asarray(S(t))).T, name=F.name + "*")


def coercivity_of(T: HilbertTriple, S) -> float:
    """Smallest eigenvalue of ``gram_V^{-1/2} Herm(S) gram_V^{-1/2}``."""
    S = np.asarray(S)
    herm = 0.5 * (S + np.conj(S).T)
    return float(sla.eigh(herm, T.gram_V, eigvals_only=True)[0])


def bound_of(T: HilbertTriple, S) -> float:
    """``sup |a(u,v)| / (|u|_V |v|_V)``."""
    return operator_norm_scales(T, T.h_representative(S), 1.0, -1.0)


def sector_tangent(T: HilbertTriple, S) -> float:
    """Exact ``sup |Im a(u,u)| / Re a(u,u)`` over the numerical range (needs Re part PD)."""
    S = np.asarray(S)
    re = 0.5 * (S + np.conj(S).T)
    im = (S - np.conj(S).T) / 2j
    if np.abs(im).max() == 0:
        return 0.0
    return float(np.abs(sla.eigh(im, re, eigvals_only=True)).max())


def sample_times(T, n_time_samples):
    return np.linspace(0.0, T, n_time_samples)


def sample_pairs(T, n_time_samples, max_dyadic=20):
    """All pairs of a uniform grid plus dyadic pairs ``|t - s| = T 2^-k`` near coincidence."""
    ts = sample_times(T, n_time_samples)
    i, j = np.triu_indices(n_time_samples, k=1)
    pairs = [(ts[a], ts[b]) for a, b in zip(i, j)]
    for k in range(1, max_dyadic + 1):
        d = T * 2.0 ** -k
        for base in (0.0, 0.5 * T, T - d):
            if base + d <= T:
                pairs.append((base, base + d))
    return pairs


@dataclass
class CertifyReport:
    M_observed: float
    delta_observed: float
    omega_violation: Optional[tuple]  # (t, s, observed, bound)
    worst_omega_ratio: float
    sector_ratio: float


def certify_constants(F: NonAutonomousForm, n_time_samples=9, n_vec_samples=16, seed=0) -> CertifyReport:
    """Falsification sweep for boundedness, coercivity and the modulus bound."""
    if n_time_samples < 2:
        raise OutOfRange("need at least two time samples")
    T = F.triple
    ts = sample_times(F.horizon, n_time_samples)
    mats = {float(t): F.S(t) for t in ts}
    M_obs = max(bound_of(T, S) for S in mats.values())
    delta_obs = min(coercivity_of(T, S) for S in mats.values())
    if delta_obs <= 0:
        raise NonCoercive(f"form {F.name!r} is not coercive: observed delta = {delta_obs:.3e}")

    # sector of the numerical range, probed with random vectors
    rng = np.random.default_rng(seed)
    ratio = 0.0
    for S in mats.values():
        for _ in range(n_vec_samples):
            u = rng.standard_normal(T.dim) + 1j * rng.standard_normal(T.dim)
            a = np.vdot(u, S @ u)
            ratio = max(ratio, abs(a.imag) / a.real)

    worst, violation = 0.0, None
    for t, s in sample_pairs(F.horizon, n_time_samples):
        St = mats.get(float(t))
        St = F.S(t) if St is None else St
        Ss = mats.get(float(s))
        Ss = F.S(s) if Ss is None else Ss
        obs = operator_norm_scales(T, T.h_representative(St - Ss), 1.0, -F.modulus.gamma)
        bound = float(F.modulus(abs(t - s)))
        r = obs / bound if bound > 0 else (np.inf if obs > 1e-14 else 0.0)
        if r > worst:
            worst = r
            if obs > bound * (1 + 1e-9) + 1e-14:
                violation = (float(t), float(s), obs, bound)
    if M_obs > F.bound_M * (1 + 1e-9):
        warnings.warn(f"observed bound {M_obs:.4g} exceeds declared M={F.bound_M:.4g}")
    if delta_obs < F.coercivity_delta * (1 - 1e-9):
        warnings.warn(f"observed delta {delta_obs:.4g} below declared {F.coercivity_delta:.4g}")
    return CertifyReport(M_obs, delta_obs, violation, worst, ratio)


def declared_constants(triple, matrix_at, horizon, n=9):
    """Observed (M, delta) on a uniform sample -- used to fill declared constants of built-in families."""
    ts = sample_times(horizon, n)
    mats = [np.asarray(matrix_at(t)) for t in ts]
    return max(bound_of(triple, S) for S in mats), min(coercivity_of(triple, S) for S in mats)


# built-in families ---------------------------------------------------------


def scalar_poly(coeffs, horizon=1.0, gram_V=1.0, gamma=0.0):
    """Scalar form ``S(t) = [[sum_k coeffs[k] t**k]]`` on the triple ``H = C`` with ``|v|_V^2 = gram_V |v|^2``."""
    coeffs = [float(c) for c in coeffs]
    triple = build_triple([[1.0]], [[float(gram_V)]])
    poly = np.polynomial.Polynomial(coeffs)
    matrix_at = lambda t: np.array([[poly(t)]], dtype=float)
    M, delta = declared_constants(triple, matrix_at, horizon)
    # Lipschitz modulus; the V -> V_gamma' norm of the scalar 1 is lam^(-(1+gamma)/2)
    lip = float(np.abs(poly.deriv()(np.linspace(0, horizon, 201))).max()) if len(coeffs) > 1 else 0.0
    c = lip * float(gram_V) ** (-(1 + gamma) / 2)
    modulus = ModulusOfContinuity("holder", 1.0, c * (1 + 1e-9), gamma)
    return NonAutonomousForm(triple, matrix_at, float(horizon), M, delta, modulus, name="scalar_poly")


def diag_perturbed(n=16, alpha=0.6, gamma=0.5, amplitude=1.0, horizon=1.0):
    """Spectral model: ``H = C^n``, ``|v|_V^2 = sum d_i |v_i|^2`` with ``d_i = 1 + (i pi)^2``,
    ``S(t) = diag(d) + amplitude * t**alpha * J`` where ``J`` couples neighbours.

    ``J`` is bounded on H, so the increment is bounded V -> V_gamma' for every gamma.
    """
    d = 1.0 + (np.pi * np.arange(n)) ** 2
    triple = build_triple(np.eye(n), np.diag(d))
    J = np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1) + 0.5 * np.eye(n)
    D = np.diag(d)
    matrix_at = lambda t: D + amplitude * float(t) ** alpha * J
    M, delta = declared_constants(triple, matrix_at, horizon)
    c = abs(amplitude) * operator_norm_scales(triple, J, 1.0, -gamma)
    modulus = ModulusOfContinuity("holder", alpha, c * (1 + 1e-9), gamma)
    return NonAutonomousForm(triple, matrix_at, float(horizon), M, delta, modulus, name="diag_perturbed")


def unshifted(F: NonAutonomousForm) -> NonAutonomousForm:
    """The form with its recorded ``shift * gram_H`` removed (possibly no longer coercive)."""
    if F.shift == 0:
        return F
    S, G, mu = F.matrix_at, F.triple.gram_H, F.shift
    return replace(F, matrix_at=lambda t: np.asarray(S(t)) - mu * G, shift=0.0, name=F.name + "-unshifted")
