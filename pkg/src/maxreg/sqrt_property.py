"""Equivalence constants between ``|A^{1/2} v|_H`` and ``|v|_V``, and their perturbation stability."""

from __future__ import annotations

import numpy as np

from .errors import TripleMismatch
from .sectorial import QuadratureConfig, SectorialSnapshot, inv_sqrt, make_snapshot
from .triple import operator_norm_scales, scale_matrix


def sqrt_domain_constants(P: SectorialSnapshot, quad: QuadratureConfig = QuadratureConfig()):
    """``(c_low, c_up)``: extreme values of ``|A^{1/2} v|_H / |v|_V`` over ``v != 0``.

    ``A^{1/2}`` is the inverse of the quadrature inverse square root.
    """
    root = np.linalg.inv(inv_sqrt(P, quad))
    s = np.linalg.svd(scale_matrix(P.triple, root, 1.0, 0.0), compute_uv=False)
    return float(s.min()), float(s.max())


def adjoint_snapshot(P: SectorialSnapshot) -> SectorialSnapshot:
    """Snapshot of the H-adjoint operator (form matrix ``S^*``)."""
    return make_snapshot(P.triple, np.conj(P.S).T, theta=P.sector_theta, vartheta=P.contour_vartheta)


def _same_triple(P1, P2):
    T1, T2 = P1.triple, P2.triple
    if T1 is T2:
        return
    if T1.dim != T2.dim or not (np.allclose(T1.gram_H, T2.gram_H, rtol=1e-14, atol=0)
                                and np.allclose(T1.gram_V, T2.gram_V, rtol=1e-14, atol=0)):
        raise TripleMismatch("snapshots live on different triples")


def form_distance(P1: SectorialSnapshot, P2: SectorialSnapshot, gamma: float) -> float:
    """``sup |a1(u,v) - a2(u,v)| / (|u|_V |v|_{V_gamma})``."""
    _same_triple(P1, P2)
    T = P1.triple
    return operator_norm_scales(T, T.h_representative(P1.S - P2.S), 1.0, -gamma)


def perturbed_sqrt_gap(P1: SectorialSnapshot, P2: SectorialSnapshot, gamma: float = 0.0,
                       quad: QuadratureConfig = QuadratureConfig(), inv=None) -> float:
    """``|A1^{-1/2} - A2^{-1/2}|_{H -> V}``.

    ``gamma`` is accepted for symmetry with :func:`form_distance`; ``inv`` may
    carry precomputed inverse square roots ``(R1, R2)``.
    """
    _same_triple(P1, P2)
    if P1 is P2:
        return 0.0
    R1, R2 = inv if inv is not None else (inv_sqrt(P1, quad), inv_sqrt(P2, quad))
    return operator_norm_scales(P1.triple, R1 - R2, 0.0, 1.0)
