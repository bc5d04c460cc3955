"""Chern connection, torsion, curvature and their covariant derivatives at a point.

Index layout (all arrays are 0-based):

* ``gamma[k, i, j]``       = Gamma^k_{ij}, with nabla_{d_i} d_j = Gamma^k_{ij} d_k
* ``T[j, i, k]``           = T^j_{ik}
* ``T_m[j, i, k, m]``      = T^j_{ik,m}
* ``T_bar[j, i, k, l]``    = T^j_{ik,lbar}
* ``T_bar_m[j, i, k, l, m]``  = T^j_{ik,lbar m}
* ``T_m_bar[j, i, k, m, l]``  = T^j_{ik,m lbar}
* ``T_bar_bar[j, i, k, l, s]`` = T^j_{ik,lbar sbar}
* ``R[i, j, k, l]``        = R_{i jbar k lbar}
* ``R_m[i, j, k, l, m]``   = R_{i jbar k lbar,m}

For repeated comma indices the leftmost is applied first:
``T_{,ab} = nabla_b (nabla_a T)``.

Covariant derivatives are computed in the holomorphic coordinate frame,
where ``nabla_{d_lbar} d_k = 0`` and the connection acts through ``gamma``
alone, then transformed pointwise to a unitary frame.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field, replace

import numpy as np

from .dsl.metric import MetricJet
from .errors import JetOrderError, MetricError
from .taylor import TaylorAlgebra, algebra

# slot kinds: "u" upper (1,0), "d" lower (1,0), "b" lower (0,1)
T_SIGNATURE = "udd"
R_SIGNATURE = "dbdb"
SIGNATURES = {
    "T": "udd",
    "T_m": "uddd",
    "T_bar": "uddb",
    "T_bar_m": "uddbd",
    "T_m_bar": "udddb",
    "T_bar_bar": "uddbb",
    "R": "dbdb",
    "R_m": "dbdbd",
}


@dataclass(frozen=True, eq=False)
class ConnectionAtPoint:
    """Chern connection coefficients in the coordinate frame at a point."""

    gamma: np.ndarray
    d_gamma: np.ndarray  # d_gamma[k, i, j, m] = d_m Gamma^k_{ij}
    dbar_gamma: np.ndarray  # dbar_gamma[k, i, j, m] = d_mbar Gamma^k_{ij}
    order: int
    _alg: TaylorAlgebra = field(repr=False)
    _gamma_jet: np.ndarray = field(repr=False)
    _metric_jet: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.gamma.shape[0]


@dataclass(frozen=True, eq=False)
class TorsionAtPoint:
    """Torsion components and covariant derivatives; ``frame is None`` means coordinate frame."""

    T: np.ndarray
    T_m: np.ndarray | None = None
    T_bar: np.ndarray | None = None
    T_bar_m: np.ndarray | None = None
    T_m_bar: np.ndarray | None = None
    T_bar_bar: np.ndarray | None = None
    frame: np.ndarray | None = None

    def in_frame(self, e: "UnitaryFrame") -> "TorsionAtPoint":
        arrays = {
            name: None if getattr(self, name) is None else to_frame(getattr(self, name), SIGNATURES[name], e)
            for name in ("T", "T_m", "T_bar", "T_bar_m", "T_m_bar", "T_bar_bar")
        }
        return TorsionAtPoint(frame=_frame_matrix(e), **arrays)

    @property
    def has_derivatives(self) -> bool:
        return self.T_bar_bar is not None


@dataclass(frozen=True, eq=False)
class CurvatureAtPoint:
    """Curvature ``R_{i jbar k lbar}`` and its holomorphic covariant derivative."""

    R: np.ndarray
    R_m: np.ndarray | None = None
    frame: np.ndarray | None = None

    def in_frame(self, e: "UnitaryFrame") -> "CurvatureAtPoint":
        return CurvatureAtPoint(
            to_frame(self.R, "dbdb", e),
            None if self.R_m is None else to_frame(self.R_m, "dbdbd", e),
            _frame_matrix(e),
        )


@dataclass(frozen=True, eq=False)
class UnitaryFrame:
    """Frame vectors as columns: ``e_a = sum_i e[i, a] d_i``.

    Unitarity means ``sum_{ij} g_{i jbar} e[i, a] conj(e[j, b]) = delta_ab``,
    i.e. ``e.T @ g @ e.conj() == I``.
    """

    e: np.ndarray

    def gram(self, g: np.ndarray) -> np.ndarray:
        return self.e.T @ g @ self.e.conj()

    def rotated(self, u: np.ndarray) -> "UnitaryFrame":
        """Frame ``e'_a = sum_b u[b, a] e_b``; unitary ``u`` keeps it unitary."""
        return UnitaryFrame(self.e @ u)


def _frame_matrix(e) -> np.ndarray:
    return e.e if isinstance(e, UnitaryFrame) else np.asarray(e)


def _require_order(jet: MetricJet, order: int, what: str):
    if jet.order < order:
        raise JetOrderError(f"{what} needs a metric jet of order {order}, got {jet.order}")


def chern_connection(jet: MetricJet) -> ConnectionAtPoint:
    """Gamma^k_{ij} = sum_l g^{k lbar} d_i g_{j lbar} together with its first derivatives."""
    _require_order(jet, 2, "chern_connection")
    n = jet.n
    alg = algebra(2 * n, jet.order)
    G = jet.taylor()
    H = alg.inv(G).transpose(1, 0, 2)  # H[k, l] = g^{k lbar}
    dG = alg.grad(G, range(n)).transpose(2, 0, 1, 3)  # dG[i, j, l] = d_i g_{j lbar}
    gamma = alg.mul("kl,ijl->kij", H, dG)
    d_gamma = alg.grad(gamma, range(n))
    dbar_gamma = alg.grad(gamma, range(n, 2 * n))
    return ConnectionAtPoint(
        alg.value(gamma),
        alg.value(d_gamma),
        alg.value(dbar_gamma),
        jet.order,
        alg,
        gamma,
        G,
    )


def _torsion_jet(conn: ConnectionAtPoint) -> np.ndarray:
    g = conn._gamma_jet
    return g - g.transpose(0, 2, 1, 3)


def torsion(conn: ConnectionAtPoint) -> TorsionAtPoint:
    """T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji} in the coordinate frame."""
    return TorsionAtPoint(conn._alg.value(_torsion_jet(conn)))


def _curvature_jet(conn: ConnectionAtPoint) -> np.ndarray:
    # R_{i jbar k lbar} = -g_{p lbar} d_jbar Gamma^p_{ik}
    alg = conn._alg
    n = conn.n
    dbar_gamma = alg.grad(conn._gamma_jet, range(n, 2 * n))  # [p, i, k, j]
    return -alg.mul("pl,pikj->ijkl", conn._metric_jet, dbar_gamma)


def curvature(jet: MetricJet, conn: ConnectionAtPoint | None = None) -> CurvatureAtPoint:
    """Chern curvature R_{i jbar k lbar} in the coordinate frame.

    Equivalent to ``-d_i d_jbar g_{k lbar} + g^{p qbar} (d_i g_{k qbar})(d_jbar g_{p lbar})``.
    """
    _require_order(jet, 2, "curvature")
    if conn is None:
        conn = chern_connection(jet)
    return CurvatureAtPoint(conn._alg.value(_curvature_jet(conn)))


def _nabla(alg: TaylorAlgebra, A: np.ndarray, signature: str, gamma: np.ndarray, antiholomorphic: bool):
    """Covariant derivative of a tensor jet; the direction becomes a new last slot."""
    rank = len(signature)
    n = gamma.shape[0]
    letters = [c for c in string.ascii_lowercase if c not in "mrxyz"][:rank]
    variables = range(n, 2 * n) if antiholomorphic else range(n)
    out = alg.grad(A, variables)
    a_sub = "".join(letters)
    out_sub = a_sub + "m"
    conj_gamma = alg.conj(gamma) if antiholomorphic else None
    for s, kind in enumerate(signature):
        inner = a_sub[:s] + "r" + a_sub[s + 1 :]
        x = letters[s]
        if antiholomorphic:
            if kind == "b":
                out = out - alg.mul(f"rm{x},{inner}->{out_sub}", conj_gamma, A)
        elif kind == "u":
            out = out + alg.mul(f"{x}mr,{inner}->{out_sub}", gamma, A)
        elif kind == "d":
            out = out - alg.mul(f"rm{x},{inner}->{out_sub}", gamma, A)
    return out


def covariant_derivatives_T(conn: ConnectionAtPoint, T: TorsionAtPoint, jet: MetricJet) -> TorsionAtPoint:
    """Fill first and second Chern covariant derivatives of the torsion (coordinate frame)."""
    _require_order(jet, 3, "second covariant derivatives of T")
    if T.frame is not None:
        raise ValueError("covariant derivatives are computed from coordinate-frame torsion")
    alg = conn._alg
    gamma = conn._gamma_jet
    t = _torsion_jet(conn)
    t_m = _nabla(alg, t, "udd", gamma, False)
    t_bar = _nabla(alg, t, "udd", gamma, True)
    t_bar_m = _nabla(alg, t_bar, "uddb", gamma, False)
    t_m_bar = _nabla(alg, t_m, "uddd", gamma, True)
    t_bar_bar = _nabla(alg, t_bar, "uddb", gamma, True)
    v = alg.value
    return TorsionAtPoint(v(t), v(t_m), v(t_bar), v(t_bar_m), v(t_m_bar), v(t_bar_bar))


def covariant_derivative_R(conn: ConnectionAtPoint, R: CurvatureAtPoint, jet: MetricJet) -> CurvatureAtPoint:
    """Fill R_{i jbar k lbar,m} (coordinate frame)."""
    _require_order(jet, 3, "covariant derivative of R")
    if R.frame is not None:
        raise ValueError("covariant derivatives are computed from coordinate-frame curvature")
    alg = conn._alg
    r = _curvature_jet(conn)
    r_m = _nabla(alg, r, "dbdb", conn._gamma_jet, False)
    return CurvatureAtPoint(alg.value(r), alg.value(r_m))


def unitary_frame_at(jet: MetricJet | np.ndarray) -> UnitaryFrame:
    """Lower-triangular unitary frame with positive real diagonal.

    Writes ``conj(g) = L^H L`` with ``L`` lower triangular (a reversed
    Cholesky factorization) and returns ``e = L^{-1}``.
    """
    g = jet.g if isinstance(jet, MetricJet) else np.asarray(jet, dtype=complex)
    m = np.conj(g)
    m = 0.5 * (m + m.conj().T)
    rev = m[::-1, ::-1]
    try:
        c = np.linalg.cholesky(rev)
    except np.linalg.LinAlgError as exc:
        raise MetricError("metric is not positive definite") from exc
    lower = c.conj().T[::-1, ::-1]
    e = np.linalg.inv(lower)
    e = np.tril(e)
    return UnitaryFrame(e)


def to_frame(A: np.ndarray, signature: str, e: UnitaryFrame | np.ndarray) -> np.ndarray:
    """Transform coordinate-frame components to frame components.

    Each ``u`` slot contracts with ``e^{-1}``, each ``d`` slot with ``e``
    and each ``b`` slot with ``conj(e)``.
    """
    e = _frame_matrix(e)
    A = np.asarray(A)
    if A.ndim != len(signature) or any(s != e.shape[0] for s in A.shape):
        raise ValueError(f"tensor of shape {A.shape} does not match signature {signature!r}")
    mats = {"u": np.linalg.inv(e).T, "d": e, "b": e.conj()}
    out = A
    for s, kind in enumerate(signature):
        if kind not in mats:
            raise ValueError(f"unknown slot kind {kind!r}")
        # contract slot s with mats[kind][i, a], putting the new index back in place
        out = np.moveaxis(np.tensordot(out, mats[kind], axes=([s], [0])), -1, s)
    return out


@dataclass(frozen=True, eq=False)
class PointTensors:
    """Everything computed at one point, in one unitary frame."""

    point: np.ndarray
    jet: MetricJet
    connection: ConnectionAtPoint
    torsion_coord: TorsionAtPoint
    curvature_coord: CurvatureAtPoint
    frame: UnitaryFrame
    torsion: TorsionAtPoint
    curvature: CurvatureAtPoint

    def with_frame(self, frame: UnitaryFrame) -> "PointTensors":
        return replace(
            self,
            frame=frame,
            torsion=self.torsion_coord.in_frame(frame),
            curvature=self.curvature_coord.in_frame(frame),
        )


def point_tensors(jet: MetricJet, frame: UnitaryFrame | None = None) -> PointTensors:
    """Full torsion/curvature data at the jet's point, in ``frame`` (default: unitary_frame_at)."""
    conn = chern_connection(jet)
    t = covariant_derivatives_T(conn, torsion(conn), jet)
    r = covariant_derivative_R(conn, curvature(jet, conn), jet)
    if frame is None:
        frame = unitary_frame_at(jet)
    return PointTensors(jet.point, jet, conn, t, r, frame, t.in_frame(frame), r.in_frame(frame))
