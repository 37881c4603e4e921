"""Functional calculus of the frozen operator A = gram_H^{-1} S.

The semigroup is computed from the resolvent by contour quadrature along
``Gamma = {r e^{+-i vartheta}}`` and the inverse square root from the
semigroup integral ``A^{-1/2} = pi^{-1/2} int_0^inf t^{-1/2} e^{-tA} dt``.
Both integrals are mapped to the real line by ``r = e^x`` (resp. ``t = e^x``)
and evaluated with the trapezoid rule, refined by halving until two levels
agree.  Dense ``expm``/eigendecompositions serve as the oracles.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NonCoercive, NotStable, OutOfRange, QuadratureNotConverged, SingularResolvent
from .form import bound_of, coercivity_of, sector_tangent
from .triple import HilbertTriple, operator_norm_scales


@dataclass(frozen=True)
class QuadratureConfig:
    n_nodes: int = 64  # initial nodes on the log-scale interval, per ray
    tol: float = 1e-9  # relative agreement between two refinement levels
    max_refine: int = 6
    r_min_rel: float = 1e-9  # lower cut of the ray, relative to the smallest |eigenvalue|
    decay: float = 40.0  # truncate once |e^{-lambda t}| < e^{-decay}


@dataclass(frozen=True, eq=False)
class SectorialSnapshot:
    triple: HilbertTriple
    S: np.ndarray
    op_A: np.ndarray
    sector_theta: float
    contour_vartheta: float

    @property
    def n(self):
        return self.triple.dim

    @property
    def eigvals(self):
        return np.linalg.eigvals(self.op_A)


def make_snapshot(triple: HilbertTriple, S, theta=None, M=None, delta=None, vartheta=None) -> SectorialSnapshot:
    """Freeze the form matrix ``S``.

    The sector angle is, in order of preference: ``theta`` if given,
    ``arctan(M/delta)`` from declared constants, or the exact numerical-range
    angle of ``S``.
    """
    S = np.asarray(S)
    op_A = triple.h_representative(S)
    if theta is None:
        if M is not None and delta is not None:
            theta = float(np.arctan(M / delta))
        else:
            if coercivity_of(triple, S) <= 0:
                raise NonCoercive("form matrix is not coercive; pass theta explicitly")
            theta = float(np.arctan(sector_tangent(triple, S)))
    if not 0.0 <= theta < np.pi / 2:
        raise OutOfRange(f"sector angle {theta} must lie in [0, pi/2)")
    if vartheta is None:
        vartheta = theta / 2 + np.pi / 4
    if not theta < vartheta < np.pi / 2:
        raise OutOfRange("contour angle must satisfy theta < vartheta < pi/2")
    ev = np.linalg.eigvals(op_A)
    if ev.real.min() <= 0:
        raise NotStable(f"spectrum touches the closed left half-plane (min Re = {ev.real.min():.3e})")
    if np.abs(np.angle(ev)).max() > theta + 1e-8:
        raise OutOfRange("spectrum leaves the declared sector")
    return SectorialSnapshot(triple, S, op_A, theta, float(vartheta))


def snapshot_of(F, t, **kw) -> SectorialSnapshot:
    return make_snapshot(F.triple, F.S(t), **kw)


def matrix_snapshot(A, theta=None) -> SectorialSnapshot:
    """Snapshot of a bare matrix on the trivial triple ``gram_H = gram_V = I``."""
    from .triple import build_triple

    A = np.asarray(A)
    n = A.shape[0]
    if theta is None:
        arg = float(np.abs(np.angle(np.linalg.eigvals(A))).max())
        theta = arg + min(0.1, 0.5 * (np.pi / 2 - arg))
    return make_snapshot(build_triple(np.eye(n), np.eye(n)), A, theta=theta)


# resolvents -------------------------------------------------------------


def resolvent(P: SectorialSnapshot, lam: complex):
    lam = complex(lam)
    if lam != 0 and abs(np.angle(lam)) < P.sector_theta:
        warnings.warn(f"lambda={lam} lies inside the sector")
    A = P.op_A
    n = A.shape[0]
    Mx = lam * np.eye(n) - A
    if np.linalg.cond(Mx) > 1e14:
        raise SingularResolvent(f"lambda={lam} is (numerically) an eigenvalue")
    return np.linalg.solve(Mx, np.eye(n, dtype=complex))


# (label, ell_in(ell), ell_out(ell), decay exponent(ell)); labels read "source_to_target"
# with "dual" = V_ell', "scale" = V_ell
ESTIMATES = (
    ("dual_to_dual", lambda l: -l, lambda l: -l, lambda l: 1.0),
    ("scale_to_scale", lambda l: l, lambda l: l, lambda l: 1.0),
    ("dual_to_V", lambda l: -l, lambda l: 1.0, lambda l: (1 - l) / 2),
    ("dual_to_H", lambda l: -l, lambda l: 0.0, lambda l: 1 - l / 2),
    ("H_to_scale", lambda l: 0.0, lambda l: l, lambda l: 1 - l / 2),
    ("dual_to_scale", lambda l: -l, lambda l: l, lambda l: 1 - l),
)


def lambda_samples(P: SectorialSnapshot, per_decade=8, n_rays=3, r_lo=1e-2, r_hi=None):
    """Points on rays ``r e^{+-i phi}`` with ``vartheta <= phi <= pi``, geometric in ``r``."""
    if r_hi is None:
        r_hi = 1e2 * max(np.abs(P.eigvals).max(), 1.0)
    n_r = int(np.ceil(per_decade * np.log10(r_hi / r_lo))) + 1
    radii = np.geomspace(r_lo, r_hi, n_r)
    phis = np.linspace(P.contour_vartheta, np.pi, n_rays)
    pts = [r * np.exp(1j * s * p) for p in phis for s in ((1, -1) if p < np.pi else (1,)) for r in radii]
    return np.array(pts)


@dataclass
class EstimateReport:
    ell: float
    constants: dict  # label -> observed constant
    worst_lambda: dict  # label -> lambda attaining it
    growth: dict  # label -> True when the max sits at the largest radius and still rises


def verify_resolvent_estimates(P: SectorialSnapshot, ell: float, lambda_samples_=None) -> EstimateReport:
    if not 0.0 <= ell <= 1.0:
        raise OutOfRange("ell must lie in [0, 1]")
    lams = lambda_samples(P) if lambda_samples_ is None else np.asarray(lambda_samples_)
    inside = (lams != 0) & (np.abs(np.angle(lams)) < P.sector_theta)
    if inside.any():
        raise OutOfRange("lambda samples must lie outside the sector")
    T = P.triple
    consts = {lab: 0.0 for lab, *_ in ESTIMATES}
    worst = {lab: None for lab, *_ in ESTIMATES}
    vals = {lab: [] for lab, *_ in ESTIMATES}
    for lam in lams:
        R = resolvent(P, lam)
        for lab, li, lo, ex in ESTIMATES:
            c = operator_norm_scales(T, R, li(ell), lo(ell)) * (1 + abs(lam)) ** ex(ell)
            vals[lab].append(c)
            if c > consts[lab]:
                consts[lab], worst[lab] = c, complex(lam)
    rmax = np.abs(lams).max()
    growth = {}
    for lab in consts:
        v = np.array(vals[lab])
        at_edge = np.isclose(np.abs(lams), rmax)
        growth[lab] = bool(np.any(at_edge & (v >= consts[lab] * (1 - 1e-12))) and _rising_at_edge(lams, v))
    return EstimateReport(float(ell), consts, worst, growth)


def _rising_at_edge(lams, v):
    r = np.abs(lams)
    order = np.argsort(r)
    tail = v[order][-6:]
    return bool(np.all(np.diff(tail) > 0) and tail[-1] > 1.05 * tail[0])


# semigroup --------------------------------------------------------------


def semigroup_oracle(P: SectorialSnapshot, t: float):
    if t < 0:
        raise OutOfRange("t must be nonnegative")
    n = P.n
    if t == 0:
        return np.eye(n, dtype=P.op_A.dtype)
    return sla.expm(-t * P.op_A)


def _trapezoid_line(g, x_lo, x_hi, tail, cfg: QuadratureConfig, scale_ref=None):
    """Trapezoid rule on the whole line, truncated to [x_lo, x_hi].

    ``g(x)`` returns the (array-valued) integrand; ``tail(h)`` returns the
    contribution of the infinitely many grid nodes below ``x_lo`` (computed
    from a local expansion).  The step is halved until two levels agree to
    ``cfg.tol`` relative to the result.
    """
    n = max(int(cfg.n_nodes), 2)
    h = (x_hi - x_lo) / n
    xs = x_lo + h * np.arange(n + 1)
    # full weight at x_lo too: the tail carries the rest of the line below it
    acc = sum(g(x) for x in xs)
    prev = h * acc + tail(h)
    for _ in range(cfg.max_refine):
        mids = x_lo + h * (np.arange(n) + 0.5)
        acc = acc + sum(g(x) for x in mids)
        h, n = h / 2, 2 * n
        cur = h * acc + tail(h)
        ref = np.linalg.norm(cur) if scale_ref is None else scale_ref
        err = np.linalg.norm(cur - prev)
        if err <= cfg.tol * max(ref, np.finfo(float).tiny):
            return cur, err
        prev = cur
    raise QuadratureNotConverged(f"trapezoid refinement stalled: error estimate {err:.3e}")


def _contour_exp(A, t, V, vartheta, cfg: QuadratureConfig):
    """``e^{-tA} V`` from the resolvent integral along Gamma (oriented downwards)."""
    n = A.shape[0]
    ev = np.linalg.eigvals(A)
    rho = np.abs(ev).min()
    r_lo = cfg.r_min_rel * rho
    r_hi = cfg.decay / (t * np.cos(vartheta))
    if r_hi <= r_lo:
        r_hi = 10 * r_lo
    eu, el = np.exp(1j * vartheta), np.exp(-1j * vartheta)
    I = np.eye(n)
    real = np.isrealobj(A) and np.isrealobj(V)

    def ray(r, e):
        lam = r * e
        return np.exp(-t * lam) * np.linalg.solve(lam * I - A, V) * e * r

    if real:
        # lower ray is the conjugate of the upper one
        g = lambda x: -np.imag(ray(np.exp(x), eu)) / np.pi
        R0 = np.linalg.solve(-A, V)
        tail_c = -np.imag(eu * R0) / np.pi
    else:
        g = lambda x: (ray(np.exp(x), el) - ray(np.exp(x), eu)) / (2j * np.pi)
        R0 = np.linalg.solve(-A, V)
        tail_c = (el - eu) * R0 / (2j * np.pi)

    def tail(h):
        q = np.exp(-h)
        return h * r_lo * q / (1 - q) * tail_c

    out, _ = _trapezoid_line(g, np.log(r_lo), np.log(r_hi), tail, cfg)
    return out


def semigroup_apply(P: SectorialSnapshot, t: float, v, quad: QuadratureConfig = QuadratureConfig()):
    if t <= 0:
        raise OutOfRange("t must be positive")
    return _contour_exp(P.op_A, float(t), np.asarray(v), P.contour_vartheta, quad)


def semigroup_matrix(P: SectorialSnapshot, t: float, quad: QuadratureConfig = QuadratureConfig()):
    return semigroup_apply(P, t, np.eye(P.n), quad)


# inverse square root ----------------------------------------------------


def inv_sqrt(P: SectorialSnapshot, quad: QuadratureConfig = QuadratureConfig()):
    """``A^{-1/2} = pi^{-1/2} int_0^inf t^{-1/2} e^{-tA} dt`` with ``t = e^x``."""
    A = P.op_A
    ev = np.linalg.eigvals(A)
    if ev.real.min() <= 0:
        raise NotStable("inverse square root needs an exponentially stable semigroup")
    n = A.shape[0]
    normA = np.linalg.norm(A, 2)
    t_lo = 1e-4 / normA
    t_hi = quad.decay / ev.real.min()
    I = np.eye(n)
    g = lambda x: np.exp(0.5 * x) * sla.expm(-np.exp(x) * A)

    def tail(h):
        # nodes x_lo - k h, k >= 1, with e^{-tA} ~ I - tA
        q = np.exp(-0.5 * h)
        s1 = np.sqrt(t_lo) * q / (1 - q)
        s3 = t_lo ** 1.5 * q ** 3 / (1 - q ** 3)
        return h * (s1 * I - s3 * A)

    cfg = QuadratureConfig(n_nodes=quad.n_nodes, tol=quad.tol, max_refine=quad.max_refine)
    out, _ = _trapezoid_line(g, np.log(t_lo), np.log(t_hi), tail, cfg)
    return out / np.sqrt(np.pi)


def sqrt_from_inv(P: SectorialSnapshot, quad: QuadratureConfig = QuadratureConfig()):
    """``A^{1/2}`` as the inverse of :func:`inv_sqrt`."""
    return np.linalg.inv(inv_sqrt(P, quad))


def inv_sqrt_oracle(A):
    """Principal ``A^{-1/2}`` by eigendecomposition (diagonalizable ``A`` only)."""
    w, X = np.linalg.eig(A)
    out = (X * w ** -0.5) @ np.linalg.inv(X)
    return out.real if np.isrealobj(A) and np.abs(out.imag).max() < 1e-12 * np.abs(out).max() else out


# diagnostics ------------------------------------------------------------


def analyticity_constant(P: SectorialSnapshot, t_samples):
    """``sup_t |t A e^{-tA}|_{L(H)}`` over the samples (oracle semigroup)."""
    T = P.triple
    return max(operator_norm_scales(T, t * P.op_A @ semigroup_oracle(P, t), 0.0, 0.0) for t in t_samples)


def decay_constants(P: SectorialSnapshot, ell, t_samples):
    """Observed constants of the smoothing bounds for ``e^{-tA}``.

    Returns a dict with the sups over ``t`` of
    ``t^{(1+ell)/2} |e^{-tA}|_{V_ell' -> V}``, ``t^{(1-ell)/2} |e^{-tA}|_{V_ell -> V}``
    and ``t^{ell/2} |e^{-tA}|_{V_ell' -> H}``.
    """
    T = P.triple
    out = {"dual_to_V": 0.0, "scale_to_V": 0.0, "dual_to_H": 0.0}
    for t in t_samples:
        E = semigroup_oracle(P, t)
        out["dual_to_V"] = max(out["dual_to_V"], t ** ((1 + ell) / 2) * operator_norm_scales(T, E, -ell, 1.0))
        out["scale_to_V"] = max(out["scale_to_V"], t ** ((1 - ell) / 2) * operator_norm_scales(T, E, ell, 1.0))
        out["dual_to_H"] = max(out["dual_to_H"], t ** (ell / 2) * operator_norm_scales(T, E, -ell, 0.0))
    return out


def resolvent_continuity_constant(F, t, s, gamma, lambdas):
    """``max_lambda |R_t(lambda) - R_s(lambda)|_{V_gamma' -> V} (1+|lambda|)^{1-gamma} / omega(|t-s|)``."""
    Pt, Ps = snapshot_of(F, t), snapshot_of(F, s)
    T = F.triple
    w = float(F.modulus(abs(t - s)))
    best = 0.0
    for lam in lambdas:
        D = resolvent(Pt, lam) - resolvent(Ps, lam)
        best = max(best, operator_norm_scales(T, D, -gamma, 1.0) * (1 + abs(lam)) ** (1 - gamma))
    return best / w if w > 0 else best


def observed_sector(P: SectorialSnapshot):
    """Largest |arg| of the spectrum."""
    return float(np.abs(np.angle(P.eigvals)).max())


def theta_from_constants(triple, S):
    """``arctan(M/delta)`` with the observed constants of ``S``."""
    d = coercivity_of(triple, S)
    if d <= 0:
        raise NonCoercive("form matrix is not coercive")
    return float(np.arctan(bound_of(triple, S) / d))
