"""Unitary frames on balanced threefolds in which T^i_{ik} = 0 for all i, k.

The torsion of a threefold is packed into the torsion matrix
``A[i, a] = T^a_{jk}`` with ``(i, j, k)`` cyclic. Under a frame change
``e~_a = sum_b W[a, b] e_b`` with ``W`` unitary the torsion transforms as

    T~^c_{ab} = sum W[a, p] W[b, q] conj(W[c, r]) T^r_{pq}

and the torsion matrix as ``A~ = det(W) conj(W) A conj(W)^T``. A Takagi
factorization ``Q A Q^T = D`` therefore normalizes the frame with
``W = det(Q) conj(Q)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chern import UnitaryFrame, _frame_matrix
from .errors import FrameNotNormalizedError, NotBalancedError
from .functionals import _T, gauduchon_eta

SYMMETRY_TOL = 1e-10
BALANCED_TOL = 1e-8
NORMALIZED_TOL = 1e-8
CLUSTER_GAP = 1e-4
_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _check_n3(T):
    if T.shape != (3, 3, 3):
        raise ValueError(f"frame normalization is defined for n = 3, got torsion of shape {T.shape}")


def torsion_matrix(T) -> np.ndarray:
    """A[i, a] = T^a_{jk} for (i j k) a cyclic permutation of (1 2 3)."""
    T = _T(T)
    _check_n3(T)
    A = np.empty((3, 3), dtype=complex)
    for i, j, k in _CYCLIC:
        A[i] = T[:, j, k]
    return A


def torsion_from_matrix(A) -> np.ndarray:
    """Inverse of :func:`torsion_matrix` on torsion antisymmetric in its lower pair."""
    A = np.asarray(A, dtype=complex)
    T = np.zeros((3, 3, 3), dtype=complex)
    for i, j, k in _CYCLIC:
        T[:, j, k] = A[i]
        T[:, k, j] = -A[i]
    return T


def transform_torsion(T, W) -> np.ndarray:
    """Torsion components in the frame e~_a = sum_b W[a, b] e_b."""
    T = _T(T)
    return np.einsum("ap,bq,cr,rpq->cab", W, W, np.conj(W), T)


@dataclass(frozen=True, eq=False)
class TakagiFactorization:
    """``W @ A @ W.T == diag(D)`` with ``W`` unitary and ``D`` real, nonnegative, descending."""

    W: np.ndarray
    D: np.ndarray

    @property
    def D_matrix(self) -> np.ndarray:
        return np.diag(self.D)


def _clusters(values: np.ndarray, gap: float) -> list[list[int]]:
    scale = max(float(values.max(initial=0.0)), np.finfo(float).tiny)
    groups: list[list[int]] = []
    for k in range(len(values)):
        if groups and abs(values[k] - values[groups[-1][-1]]) <= gap * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def _cluster_factor(B: np.ndarray) -> np.ndarray:
    """Takagi rows for a complex symmetric block whose singular values nearly coincide.

    With ``B = B1 + i B2`` the real symmetric matrix ``[[B1, B2], [B2, -B1]]``
    has eigenvalues ``+-sigma``; an eigenvector ``(x, y)`` for ``+sigma`` gives
    ``v = x + i y`` with ``B conj(v) = sigma v``. When ``[B1, B2] = 0`` exactly
    this is the simultaneous diagonalization of ``B1``, ``B2``; unlike
    diagonalizing ``B1`` and then ``B2``, it stays backward stable when the
    block is only approximately degenerate.
    """
    m = B.shape[0]
    M = np.block([[B.real, B.imag], [B.imag, -B.real]])
    _, vecs = np.linalg.eigh(M)
    top = vecs[:, ::-1][:, :m]
    V, _ = np.linalg.qr(top[:m] + 1j * top[m:])
    return V.conj().T


def _sign_normalize(row: np.ndarray) -> np.ndarray:
    for c in row:
        if abs(c) > 1e-12:
            return -row if c.real < 0 or (c.real == 0 and c.imag < 0) else row
    return row


def takagi(A, symmetry_tol: float = SYMMETRY_TOL) -> TakagiFactorization:
    """Unitary ``W`` with ``W A W^T`` real nonnegative diagonal.

    Diagonalize ``A A*`` by ``U``, form ``B = U A U^T`` (block diagonal over
    clusters of singular values), factor each block and fix phases.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("takagi needs a square matrix")
    asym = float(np.max(np.abs(A - A.T), initial=0.0))
    if asym > symmetry_tol * max(1.0, float(np.max(np.abs(A), initial=0.0))):
        raise ValueError(f"matrix is not symmetric (|A - A^T| = {asym:.3g})")
    n = A.shape[0]
    if not np.any(A):
        return TakagiFactorization(np.eye(n, dtype=complex), np.zeros(n))

    d2, X = np.linalg.eigh(A @ A.conj().T)
    order = np.argsort(-d2, kind="stable")
    sigma = np.sqrt(np.maximum(d2[order], 0.0))
    U = X[:, order].conj().T
    B = U @ A @ U.T

    W = np.empty((n, n), dtype=complex)
    for group in _clusters(sigma, CLUSTER_GAP):
        if len(group) == 1:
            W[group] = U[group]
        else:
            W[group] = _cluster_factor(B[np.ix_(group, group)]) @ U[group]

    diag = np.diagonal(W @ A @ W.T)
    W = np.exp(-0.5j * np.angle(diag))[:, None] * W
    W = np.array([_sign_normalize(row) for row in W])
    D = np.diagonal(W @ A @ W.T).real.clip(min=0.0)
    order = np.argsort(-D, kind="stable")
    return TakagiFactorization(W[order], D[order])


def is_normalized(T, tol: float = NORMALIZED_TOL) -> bool:
    return _worst_diagonal_torsion(T)[0] <= tol


def _worst_diagonal_torsion(T):
    T = _T(T)
    diag = np.array([[T[i, i, k] for k in range(T.shape[0])] for i in range(T.shape[0])])
    i, k = np.unravel_index(np.argmax(np.abs(diag)), diag.shape)
    return float(abs(diag[i, k])), (int(i), int(k)), complex(diag[i, k])


def check_normalized(T, tol: float = NORMALIZED_TOL):
    """Raise :class:`FrameNotNormalizedError` naming the largest T^i_{ik}."""
    worst, (i, k), value = _worst_diagonal_torsion(T)
    if worst > tol:
        raise FrameNotNormalizedError(
            f"frame is not normalized: |T^{i + 1}_{{{i + 1}{k + 1}}}| = {worst:.3g}",
            (i + 1, i + 1, k + 1),
            value,
        )


def normalize_frame(e, T, balanced_tol: float = BALANCED_TOL):
    """Rotate ``e`` so that T^i_{ik} = 0; returns ``(frame, torsion)`` in the new frame.

    ``T`` are the torsion components in the frame ``e``. A torsion matrix
    that is already diagonal leaves the frame unchanged.
    """
    T = _T(T)
    _check_n3(T)
    eta = gauduchon_eta(T)
    if np.max(np.abs(eta)) > balanced_tol:
        raise NotBalancedError(f"torsion is not balanced (max |eta_i| = {np.max(np.abs(eta)):.3g})")
    e = _frame_matrix(e)
    A = torsion_matrix(T)
    off = A - np.diag(np.diagonal(A))
    if np.max(np.abs(off)) <= 1e-14 * max(1.0, float(np.max(np.abs(A)))):
        return UnitaryFrame(e), T.copy()
    # symmetrize away the O(eta) asymmetry admitted by the balanced tolerance
    fac = takagi(0.5 * (A + A.T), symmetry_tol=max(SYMMETRY_TOL, 4 * balanced_tol))
    W = np.linalg.det(fac.W) * fac.W.conj()
    T_new = transform_torsion(T, W)
    check_normalized(T_new)
    return UnitaryFrame(e @ W.T), T_new
