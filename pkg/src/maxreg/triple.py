"""Discrete Gelfand triple V -> H -> V' and the interpolation scale between them.

Everything is expressed through the generalized eigenproblem

    gram_V phi = lam gram_H phi,    phi_i^* gram_H phi_j = delta_ij,

so that for a coefficient vector ``v`` with spectral coordinates
``c = Phi^* gram_H v`` the scale norm of order ``ell`` is
``(sum_i lam_i**ell |c_i|**2) ** 0.5``.  Negative orders give the dual norms of
the H-representative (the Riesz identification ``u -> (. | u)_H``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, NotHermitian, NotPositiveDefinite, OutOfRange

HERMITIAN_TOL = 1e-12
MAX_DIM = 2048


@dataclass(frozen=True, eq=False)
class HilbertTriple:
    """Immutable discrete triple; build with :func:`build_triple`."""

    dim: int
    gram_H: np.ndarray
    gram_V: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    embed_const: float
    # Phi^* gram_H, i.e. the map to spectral coordinates
    _to_spec: np.ndarray = field(repr=False)

    def coords(self, v):
        """Spectral coordinates ``Phi^* gram_H v`` (works column-wise on matrices)."""
        return self._to_spec @ np.asarray(v)

    def from_coords(self, c):
        return self.eigvecs @ np.asarray(c)

    def weights(self, ell):
        return self.eigvals ** float(ell)

    def h_norm(self, v):
        v = np.asarray(v)
        return float(np.sqrt(max(np.real(np.vdot(v, self.gram_H @ v)), 0.0)))

    def v_norm(self, v):
        v = np.asarray(v)
        return float(np.sqrt(max(np.real(np.vdot(v, self.gram_V @ v)), 0.0)))

    def h_representative(self, S):
        """Matrix of the operator ``u -> gram_H^{-1} S u`` (form matrix -> operator)."""
        return np.linalg.solve(self.gram_H, S)

    def h_adjoint(self, B):
        """Adjoint of ``B`` with respect to the H inner product."""
        return np.linalg.solve(self.gram_H, np.conj(B).T @ self.gram_H)


def _check_hpd(name, G):
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {G.shape}")
    scale = max(np.abs(G).max(), 1.0)
    if np.abs(G - np.conj(G).T).max() > HERMITIAN_TOL * scale:
        raise NotHermitian(f"{name} is not Hermitian")
    G = 0.5 * (G + np.conj(G).T)
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"{name} is not positive definite") from None
    if np.linalg.eigvalsh(G).min() <= 0:
        raise NotPositiveDefinite(f"{name} is not positive definite")
    return G


def build_triple(gram_H, gram_V) -> HilbertTriple:
    gram_H = np.atleast_2d(np.asarray(gram_H))
    gram_V = np.atleast_2d(np.asarray(gram_V))
    if gram_H.shape != gram_V.shape:
        raise DimensionMismatch(f"gram_H {gram_H.shape} vs gram_V {gram_V.shape}")
    gram_H = _check_hpd("gram_H", gram_H)
    gram_V = _check_hpd("gram_V", gram_V)
    n = gram_H.shape[0]
    if n > MAX_DIM:
        raise DimensionMismatch(f"dimension {n} exceeds the cap {MAX_DIM}")

    # eigh normalizes to phi^* gram_H phi = I and sorts ascending
    lam, phi = sla.eigh(gram_V, gram_H)
    if lam.min() <= 0:
        raise NotPositiveDefinite("generalized eigenvalues must be positive")
    resid = np.abs(gram_V @ phi - (gram_H @ phi) * lam).max()
    if resid > 1e-10 * max(np.abs(gram_V).max(), 1.0) * max(1.0, np.abs(phi).max()):
        raise NotPositiveDefinite(f"eigen-residual {resid:.2e} too large (ill-conditioned Gram pair)")
    # deterministic sign convention: largest entry of each eigenvector has positive real part
    idx = np.argmax(np.abs(phi), axis=0)
    piv = phi[idx, np.arange(n)]
    phi = phi * (np.abs(piv) / piv)

    c_H = float(np.max(lam ** -0.5))
    to_spec = np.conj(phi).T @ gram_H
    for arr in (gram_H, gram_V, lam, phi, to_spec):
        arr.setflags(write=False)
    return HilbertTriple(n, gram_H, gram_V, lam, phi, c_H, to_spec)


def _check_ell(*ells):
    for ell in ells:
        if not -1.0 <= ell <= 1.0:
            raise OutOfRange(f"scale order {ell} outside [-1, 1]")


def scale_norm(T: HilbertTriple, v, ell: float) -> float:
    _check_ell(ell)
    v = np.asarray(v)
    if v.shape[0] != T.dim:
        raise DimensionMismatch(f"vector of length {v.shape[0]} for a triple of dimension {T.dim}")
    c = T.coords(v)
    return float(np.sqrt(np.sum(T.weights(ell) * np.abs(c) ** 2)))


def scale_matrix(T: HilbertTriple, B, ell_in: float, ell_out: float):
    """``D_out^{1/2} Phi^* gram_H B Phi D_in^{-1/2}`` -- B written in orthonormal coordinates."""
    _check_ell(ell_in, ell_out)
    B = np.asarray(B)
    if B.shape != (T.dim, T.dim):
        raise DimensionMismatch(f"operator of shape {B.shape} for a triple of dimension {T.dim}")
    M = T.coords(B @ T.eigvecs)
    return (T.weights(0.5 * ell_out)[:, None] * M) * T.weights(-0.5 * ell_in)[None, :]


def operator_norm_scales(T: HilbertTriple, B, ell_in: float, ell_out: float) -> float:
    """Norm of ``B`` as a map from the order-``ell_in`` space to the order-``ell_out`` space.

    ``B`` acts on H-representatives; for a form matrix ``S`` pass
    ``T.h_representative(S)``.
    """
    return float(np.linalg.norm(scale_matrix(T, B, ell_in, ell_out), 2))
