"""Study drivers shared by the command line, the scripts and the acceptance tests.

Every driver returns a list of flat dicts (one per table row) so the caller can
write CSV, assert on values, or print.
"""

from __future__ import annotations

import numpy as np

from .form import certify_constants, diag_perturbed, scalar_poly
from .robin import RobinProblem, assemble, convergence_study, manufactured_problem
from .sectorial import QuadratureConfig, lambda_samples, make_snapshot, verify_resolvent_estimates
from .solver import GridFunction, TimeGrid, h_norms, l2_time, solve
from .sqrt_property import form_distance, perturbed_sqrt_gap, sqrt_domain_constants

MANUFACTURED = ("separable", "growing", "rough_time", "neumann", "zero")


def robin_beta(kind, beta0=1.0, beta1=1.0, c=1.0, alpha=0.5):
    """Boundary coefficients ``beta_e(t)``: ``"constant"`` or ``"holder"`` (``beta_e + c t^alpha``)."""
    if kind == "constant":
        return lambda t: (beta0, beta1)
    if kind == "holder":
        return lambda t: (beta0 + c * t ** alpha, beta1 + c * t ** alpha)
    raise ValueError(f"unknown boundary family {kind!r}")


def robin_problem(problem: dict, n_cells=None) -> RobinProblem:
    n = int(n_cells if n_cells is not None else problem["n_cells"])
    kind = problem["beta_family"]
    if kind in MANUFACTURED:
        beta = None
        if kind == "zero":
            beta = robin_beta("holder", problem["beta0"], problem["beta1"], problem["c"], problem["alpha"])
        return manufactured_problem(kind, n, problem["T"], beta=beta, alpha=problem["alpha"], c=problem["c"])
    beta = robin_beta(kind, problem["beta0"], problem["beta1"], problem["c"], problem["alpha"])
    c = problem["c"] if kind == "holder" else 0.0
    return RobinProblem(n, beta, problem["alpha"], c, problem["T"], name=f"robin-{kind}")


def build_form(problem: dict):
    """The form selected by ``problem["family"]`` (and the Robin problem behind it, if any)."""
    fam = problem["family"]
    if fam == "scalar_poly":
        return scalar_poly(problem["coeffs"], problem["T"], problem["gram_V"], problem["gamma"]), None
    if fam == "diag_perturbed":
        return diag_perturbed(problem["n"], problem["alpha"], problem["gamma"], problem["amplitude"], problem["T"]), None
    if fam == "robin_1d":
        P = robin_problem(problem)
        return assemble(P), P
    raise ValueError(f"unknown family {fam!r}")


# data --------------------------------------------------------------------------


def spectral_data(F, grid: TimeGrid, signs, phases):
    """Data with a fixed spectral profile and per-mode signs/phases.

    ``u0 = sum s_i lam_i^{-3/2} phi_i`` and
    ``f(t) = sum s_i (1 + cos(2 pi t/T + theta_i)/2) lam_i^{-1/2} phi_i``.
    The decay puts ``u0`` well inside the operator domain, so the solution has
    no initial layer and the diagnostics converge with the time grid.
    """
    T = F.triple
    lam = T.eigvals
    signs = np.asarray(signs, dtype=float)
    u0 = T.from_coords(signs / lam ** 1.5)
    ts = grid.nodes
    C = signs[None, :] * (1.0 + 0.5 * np.cos(2 * np.pi * ts[:, None] / grid.horizon + np.asarray(phases)[None, :]))
    f = GridFunction(grid, (T.eigvecs @ (C / np.sqrt(lam)[None, :]).T).T)
    return f, u0


def random_coefficients(rng, n):
    """Random signs and phases for :func:`spectral_data`."""
    return rng.choice([-1.0, 1.0], n), rng.uniform(0.0, 2 * np.pi, n)


def named_data(F, grid, u0_kind="smooth", forcing="smooth", rng=None):
    """Deterministic data choices used by the command line."""
    n = F.triple.dim
    if u0_kind == "random" or forcing == "random":
        c_u, c_f = random_coefficients(rng if rng is not None else np.random.default_rng(0), n)
    else:
        c_u, c_f = np.ones(n), np.zeros(n)
    f_s, u0_s = spectral_data(F, grid, c_u, c_f)
    u0 = {"zero": np.zeros(n), "ones": np.ones(n), "smooth": u0_s, "random": u0_s}[u0_kind]
    f = {"zero": GridFunction.zeros(grid, n), "ones": GridFunction(grid, np.ones((grid.n_steps + 1, n))),
         "smooth": f_s, "random": f_s}[forcing]
    return f, u0


# drivers -------------------------------------------------------------------------


def triple_check(F, seed=0):
    rep = certify_constants(F, seed=seed)
    T = F.triple
    return [{"dim": T.dim, "embed_const": T.embed_const, "lam_min": float(T.eigvals.min()),
             "lam_max": float(T.eigvals.max()), "M_declared": F.bound_M, "M_observed": rep.M_observed,
             "delta_declared": F.coercivity_delta, "delta_observed": rep.delta_observed,
             "omega_alpha": F.modulus.alpha, "omega_gamma": F.modulus.gamma, "omega_c": F.modulus.c,
             "worst_omega_ratio": rep.worst_omega_ratio, "omega_violated": int(rep.omega_violation is not None),
             "sector_ratio": float(rep.sector_ratio)}]


def estimates_table(F, t, ells, per_decade=8):
    P = make_snapshot(F.triple, F.S(t))
    lams = lambda_samples(P, per_decade=per_decade)
    rows = []
    for ell in ells:
        rep = verify_resolvent_estimates(P, ell, lams)
        for lab, c in rep.constants.items():
            lam = rep.worst_lambda[lab]
            rows.append({"ell": float(ell), "estimate": lab, "constant": c, "worst_lambda_re": lam.real,
                         "worst_lambda_im": lam.imag, "growth_flag": int(rep.growth[lab])})
    return rows


def sqrt_study(problem: dict, levels, t=0.5, perturbation=0.1, quad=QuadratureConfig()):
    """Square-root constants and the perturbation gap on nested Robin meshes.

    The perturbed form scales the boundary matrix by ``1 + perturbation``.
    """
    rows = []
    for n_cells in levels:
        P = robin_problem(problem, n_cells)
        F = assemble(P)
        S1 = F.S(t)
        E = np.zeros((P.n_cells + 1, 2))
        E[0, 0] = E[-1, 1] = 1.0
        S2 = S1 + perturbation * E @ P.boundary_matrix(t) @ E.T
        P1 = make_snapshot(F.triple, S1)
        P2 = make_snapshot(F.triple, S2)
        c_low, c_up = sqrt_domain_constants(P1, quad)
        c_low_adj, c_up_adj = sqrt_domain_constants(make_snapshot(F.triple, S1.conj().T), quad)
        gamma = F.modulus.gamma
        gap = perturbed_sqrt_gap(P1, P2, gamma, quad)
        dist = form_distance(P1, P2, gamma)
        rows.append({"level": int(n_cells), "c_low": c_low, "c_up": c_up, "c_low_adjoint": c_low_adj,
                     "c_up_adjoint": c_up_adj, "gap": gap, "form_distance": dist,
                     "gap_ratio": gap / dist if dist > 0 else 0.0})
    return rows


def mr_study(form_for_grid, grids, n_draws, seed=0, method="stepping", **kw):
    """``mr_constant`` and ``sup_V_norm`` for random spectral data on several grids."""
    rng = np.random.default_rng(seed)
    rows = []
    F0 = form_for_grid(grids[0])
    draws = [random_coefficients(rng, F0.triple.dim) for _ in range(n_draws)]
    for n_steps in grids:
        grid = TimeGrid(F0.horizon, int(n_steps))
        F = form_for_grid(grid)
        for d, (c_u, c_f) in enumerate(draws):
            f, u0 = spectral_data(F, grid, c_u, c_f)
            rep = solve(F, f, u0, method=method, grid=grid, **kw)
            rows.append({"n_steps": int(n_steps), "draw": d, "mr_constant": rep.mr_constant,
                         "sup_V_norm": rep.sup_V_norm, "du_norm": rep.du_norm, "Au_norm": rep.Au_norm})
    return rows


def oracle_comparison(F, grids, u0_kind="smooth", forcing="smooth", seed=0, tol=1e-10, **kw):
    """Representation solver against Crank-Nicolson in relative ``L2(0,T;H)`` error."""
    rows = []
    for n_steps in grids:
        grid = TimeGrid(F.horizon, int(n_steps))
        f, u0 = named_data(F, grid, u0_kind, forcing, np.random.default_rng(seed))
        rep = solve(F, f, u0, method="representation", grid=grid, tol=tol, **kw)
        ref = solve(F, f, u0, method="stepping", grid=grid)
        num = l2_time(grid, h_norms(F.triple, rep.u.values - ref.u.values))
        den = l2_time(grid, h_norms(F.triple, ref.u.values))
        rows.append({"n_steps": int(n_steps), "relative_error": num / den if den > 0 else num,
                     "iterations": rep.iterations, "q_estimate": rep.q_norm_estimate, "shift_mu": rep.shift_mu,
                     "mr_constant": rep.mr_constant})
    return rows


def robin_convergence(problem: dict, levels, steps_per_cell=1, scheme="crank_nicolson", solver="stepping", **kw):
    P = robin_problem(problem, levels[0])
    return convergence_study(P, [(n, steps_per_cell * n) for n in levels], scheme=scheme, solver=solver, **kw)
