"""Solvers for u' + A(t) u = f, u(0) = u0 on a uniform time grid.

Two independent routes:

* :func:`solve_stepping` -- implicit Euler / Crank-Nicolson, used as the oracle;
* :func:`solve_representation` -- the Volterra identity with frozen-coefficient
  semigroups,

      u(t) = e^{-tA(t)} u0 + int_0^t e^{-(t-s)A(t)} f(s) ds
                          + int_0^t e^{-(t-s)A(t)} (A(t) - A(s)) u(s) ds,

  solved by Picard iteration after an exponential shift.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import MaxIterExceeded, NotContracting, SingularSystem
from .form import NonAutonomousForm, unshifted
from .sectorial import QuadratureConfig, make_snapshot, semigroup_matrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeGrid:
    horizon: float
    n_steps: int

    def __post_init__(self):
        if self.n_steps < 2 or not self.horizon > 0:
            raise ValueError("need horizon > 0 and n_steps >= 2")

    @property
    def dt(self):
        return self.horizon / self.n_steps

    @property
    def nodes(self):
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: TimeGrid
    values: np.ndarray  # shape (n_steps + 1, n)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] != self.grid.n_steps + 1:
            raise ValueError(f"values of shape {v.shape} do not match {self.grid.n_steps + 1} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function has non-finite entries")

    @classmethod
    def from_callable(cls, grid, fn):
        return cls(grid, np.array([np.asarray(fn(t)) for t in grid.nodes]))

    @classmethod
    def zeros(cls, grid, n, dtype=float):
        return cls(grid, np.zeros((grid.n_steps + 1, n), dtype=dtype))

    def scaled(self, weights):
        """Node-wise multiplication by ``weights[k]``."""
        return GridFunction(self.grid, self.values * np.asarray(weights)[:, None])


@dataclass(frozen=True, eq=False)
class SolveReport:
    u: GridFunction
    du_norm: float
    Au_norm: float
    sup_V_norm: float
    iterations: int = 0
    q_norm_estimate: float = 0.0
    shift_mu: float = 0.0
    mr_constant: float = 0.0
    form: Optional[NonAutonomousForm] = None


# norms --------------------------------------------------------------------


def h_norms(triple, values):
    G = triple.gram_H
    return np.sqrt(np.maximum(np.einsum("ki,ij,kj->k", np.conj(values), G, values).real, 0.0))


def v_norms(triple, values):
    G = triple.gram_V
    return np.sqrt(np.maximum(np.einsum("ki,ij,kj->k", np.conj(values), G, values).real, 0.0))


def l2_time(grid, pointwise):
    """Trapezoid ``(int_0^T |.|^2 dt)^{1/2}`` from node values of the spatial norm."""
    return float(np.sqrt(np.trapezoid(np.asarray(pointwise) ** 2, dx=grid.dt)))


def time_derivative(u: GridFunction):
    """Central differences inside, one-sided second order at both ends."""
    return np.gradient(u.values, u.grid.dt, axis=0, edge_order=2)


def apply_operator(F: NonAutonomousForm, u: GridFunction):
    """Rows ``A(t_k) u_k``."""
    T = F.triple
    return np.array([T.h_representative(F.S(t) @ uk) for t, uk in zip(u.grid.nodes, u.values)])


@dataclass
class MRDiagnostics:
    du_norm: float
    Au_norm: float
    sup_V_norm: float
    mr_constant: float
    f_norm: float


def mr_diagnostics(F: NonAutonomousForm, u: GridFunction, f: Optional[GridFunction] = None) -> MRDiagnostics:
    T = F.triple
    du = time_derivative(u)
    Au = apply_operator(F, u)
    du_norm = l2_time(u.grid, h_norms(T, du))
    Au_norm = l2_time(u.grid, h_norms(T, Au))
    fv = du + Au if f is None else f.values
    f_norm = l2_time(u.grid, h_norms(T, fv))
    sup_V = float(v_norms(T, u.values).max())
    denom = T.v_norm(u.values[0]) + f_norm
    mr = (du_norm + Au_norm) / denom if denom > 0 else 0.0
    return MRDiagnostics(du_norm, Au_norm, sup_V, mr, f_norm)


def _report(F, u, f, **kw):
    d = mr_diagnostics(F, u, f)
    return SolveReport(u, d.du_norm, d.Au_norm, d.sup_V_norm, mr_constant=d.mr_constant, form=F, **kw)


def _data(F, grid, f, u0):
    n = F.triple.dim
    u0 = np.asarray(u0)
    if u0.shape != (n,):
        raise ValueError(f"u0 must have shape ({n},)")
    if f is None:
        f = GridFunction.zeros(grid, n)
    if f.grid != grid:
        raise ValueError("f lives on a different grid")
    return f, u0


# time stepping oracle ----------------------------------------------------------


def solve_stepping(F: NonAutonomousForm, f: Optional[GridFunction], u0, scheme="crank_nicolson", grid=None) -> SolveReport:
    """Implicit Euler or Crank-Nicolson for ``gram_H u' + S(t) u = gram_H f``."""
    grid = grid or (f.grid if f is not None else None)
    if grid is None:
        raise ValueError("need a time grid (pass f or grid)")
    f, u0 = _data(F, grid, f, u0)
    G = F.triple.gram_H
    dt = grid.dt
    ts = grid.nodes
    dtype = np.result_type(u0, f.values, F.S(0.0), float)
    U = np.zeros((grid.n_steps + 1, F.triple.dim), dtype=dtype)
    U[0] = u0
    S_prev = F.S(ts[0])
    for k in range(grid.n_steps):
        S_next = F.S(ts[k + 1])
        if scheme == "implicit_euler":
            lhs = G + dt * S_next
            rhs = G @ U[k] + dt * (G @ f.values[k + 1])
        elif scheme == "crank_nicolson":
            lhs = G + 0.5 * dt * S_next
            rhs = (G - 0.5 * dt * S_prev) @ U[k] + 0.5 * dt * (G @ (f.values[k] + f.values[k + 1]))
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        try:
            U[k + 1] = sla.solve(lhs, rhs)
        except sla.LinAlgError as exc:
            raise SingularSystem(f"step {k}: {exc}") from None
        S_prev = S_next
    return _report(F, GridFunction(grid, U), f)


# representation formula ----------------------------------------------------------


def _phi_blocks(A, dt):
    """``e^{-dt A}``, ``dt phi_2(-dt A)`` and ``dt (phi_1 - phi_2)(-dt A)`` from one augmented exponential."""
    n = A.shape[0]
    Z = -dt * A
    big = np.zeros((3 * n, 3 * n), dtype=np.result_type(A, float))
    big[:n, :n] = Z
    big[:n, n:2 * n] = np.eye(n)
    big[n:2 * n, 2 * n:] = np.eye(n)
    X = sla.expm(big)
    E, phi1, phi2 = X[:n, :n], X[:n, n:2 * n], X[:n, 2 * n:]
    return E, dt * phi2, dt * (phi1 - phi2)


def _phi_blocks_contour(A, dt, quad, triple):
    n = A.shape[0]
    P = make_snapshot(triple, triple.gram_H @ A)
    E = semigroup_matrix(P, dt, quad)
    Z = dt * A
    phi1 = np.linalg.solve(Z, np.eye(n) - E)
    phi2 = np.linalg.solve(Z, np.eye(n) - phi1)
    return E, dt * phi2, dt * (phi1 - phi2)


class _FrozenKernels:
    """Per-node frozen operators ``A_k`` with their exponential/phi blocks."""

    def __init__(self, A_list, dt, semigroup="oracle", quad=None, triple=None):
        self.A = A_list
        if semigroup == "contour":
            self.blocks = [_phi_blocks_contour(A, dt, quad or QuadratureConfig(), triple) for A in A_list]
        elif semigroup == "oracle":
            self.blocks = [_phi_blocks(A, dt) for A in A_list]
        else:
            raise ValueError(f"unknown semigroup evaluation {semigroup!r}")

    def integrate(self, k, g_rows, start=None):
        """Product-trapezoid ``int_0^{t_k} e^{-(t_k-s)A_k} g(s) ds`` with ``g`` linear on each panel.

        ``g_rows[j]`` is ``g(t_j)`` for ``j <= k``; ``start`` is propagated by
        ``e^{-t_k A_k}`` and added.
        """
        E, W0, W1 = self.blocks[k]
        dtype = np.result_type(E, g_rows) if start is None else np.result_type(E, g_rows, start)
        acc = np.zeros(g_rows.shape[1], dtype=dtype) if start is None else start.astype(dtype)
        if k == 0:
            return acc
        C = W0 @ g_rows[1:k + 1].T + W1 @ g_rows[:k].T
        for j in range(k):
            acc = E @ acc + C[:, j]
        return acc


def _volterra_part(kern, V, AV):
    """``(K v)(t_k) = int_0^{t_k} e^{-(t_k-s)A_k} (A_k - A(s)) v(s) ds`` for all k."""
    out = np.zeros_like(V, dtype=np.result_type(V, kern.blocks[0][0]))
    for k in range(1, V.shape[0]):
        g = (kern.A[k] @ V[: k + 1].T).T - AV[: k + 1]
        out[k] = kern.integrate(k, g)
    return out


def _sup_h(triple, X, weights=None):
    n = h_norms(triple, X)
    return float((n if weights is None else n * weights).max())


def solve_representation(F: NonAutonomousForm, f: Optional[GridFunction], u0, tol=1e-10, max_iter=200, grid=None,
                         u_init: Optional[GridFunction] = None, mu_candidates=None, semigroup="oracle",
                         quad: Optional[QuadratureConfig] = None) -> SolveReport:
    """Picard iteration on the Volterra identity, with the shift as a weight.

    Replacing ``A`` by ``A + mu`` and ``u`` by ``v = e^{-mu t} u`` leaves the
    identity invariant: ``e^{-(t-s)(A+mu)} e^{-mu s} = e^{-mu t} e^{-(t-s)A}``.
    The iteration is therefore carried out on the unshifted kernels and the
    shift enters only through the norm ``sup_k e^{-mu t_k} |u_k|_H`` in which
    the contraction factor is measured.  The first ``mu`` of ``mu_candidates``
    (default ``{0, 1, 10, 100} * delta / c_H**2``) with factor at most 1/2 is
    kept; iteration stops once ``sup_k |u^{m+1}_k - u^m_k|_H <= tol sup_k |u^m_k|_H``.
    """
    grid = grid or (f.grid if f is not None else None)
    if grid is None:
        raise ValueError("need a time grid (pass f or grid)")
    f, u0 = _data(F, grid, f, u0)
    T = F.triple
    ts = grid.nodes
    A_list = [F.operator(t) for t in ts]
    if mu_candidates is None:
        mu_candidates = default_shifts(F)

    kern = _FrozenKernels(A_list, grid.dt, semigroup, quad, T)
    base_part = np.array([kern.integrate(k, f.values, start=u0) for k in range(len(ts))])

    def step(V):
        AV = np.array([A @ v for A, v in zip(A_list, V)])
        return base_part + _volterra_part(kern, V, AV)

    iterates = [base_part if u_init is None else np.asarray(u_init.values)]
    for _ in range(3):
        iterates.append(step(iterates[-1]))

    best = None
    for mu in mu_candidates:
        w = np.exp(-mu * ts)
        d1 = _sup_h(T, iterates[2] - iterates[1], w)
        d2 = _sup_h(T, iterates[3] - iterates[2], w)
        # updates at rounding level: K vanishes (autonomous problem) or is already resolved
        floor = 1e3 * np.finfo(float).eps * _sup_h(T, iterates[1], w)
        q = d2 / d1 if d1 > floor else 0.0
        log.debug("mu=%g contraction estimate %.3g", mu, q)
        if best is None or q < best[1]:
            best = (float(mu), q)
        if q <= 0.5:
            break
    mu, q = best
    if q >= 1.0:
        raise NotContracting(f"contraction factor {q:.3g} >= 1 for every shift tried")

    V, prev = iterates[-1], iterates[-2]
    it = len(iterates) - 1
    while True:
        diff = _sup_h(T, V - prev)
        if diff <= tol * _sup_h(T, prev) or diff == 0.0:
            break
        if it >= max_iter:
            raise MaxIterExceeded(f"no convergence after {it} iterations (last update {diff:.3e})")
        prev, V = V, step(V)
        it += 1
    return _report(F, GridFunction(grid, V), f, iterations=it, q_norm_estimate=q, shift_mu=mu)


# shift ---------------------------------------------------------------------


def shift_transform(report: SolveReport, mu: float, direction="forward", form=None) -> SolveReport:
    """Multiply node values by ``e^{-mu t}`` (forward) or ``e^{mu t}`` (backward) and recompute norms."""
    sign = {"forward": -1.0, "backward": 1.0}[direction]
    u = report.u
    w = np.exp(sign * mu * u.grid.nodes)
    u2 = u.scaled(w)
    F = form or report.form
    if F is None:
        return replace(report, u=u2)
    d = mr_diagnostics(F, u2)
    return replace(report, u=u2, du_norm=d.du_norm, Au_norm=d.Au_norm, sup_V_norm=d.sup_V_norm,
                   mr_constant=d.mr_constant, form=F)


def default_shifts(F: NonAutonomousForm, offset=0.0):
    """Shift candidates ``offset + {0, 1, 10, 100} * delta / c_H**2``."""
    base = F.coercivity_delta / F.triple.embed_const ** 2
    return [offset + k * base for k in (0.0, 1.0, 10.0, 100.0)]


def solve(F: NonAutonomousForm, f: Optional[GridFunction], u0, method="stepping", grid=None, **kw) -> SolveReport:
    """Solve the problem of the *unshifted* form ``S(t) - F.shift * gram_H``.

    Time stepping runs on the unshifted operator directly (rescaling a
    stepping solution by ``e^{mu t}`` would amplify its error by ``e^{mu T}``).
    The representation solver uses ``F.shift`` as the base of its shift sweep,
    where the exponential weights are exact.
    """
    grid = grid or (f.grid if f is not None else None)
    f, u0 = _data(F, grid, f, u0)
    F0 = unshifted(F)
    if method == "stepping":
        return solve_stepping(F0, f, u0, scheme=kw.pop("scheme", "crank_nicolson"), grid=grid)
    if method == "representation":
        kw.setdefault("mu_candidates", default_shifts(F, F.shift))
        return solve_representation(F0, f, u0, grid=grid, **kw)
    raise ValueError(f"unknown method {method!r}")
