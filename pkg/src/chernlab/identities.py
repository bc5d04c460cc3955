"""Curvature and torsion identities evaluated as numerical residuals.

Every residual is an array over free indices whose entries vanish when the
identity holds; reports keep its max-abs entry and the (1-based) index
tuple where it is attained. Inputs are :class:`~chernlab.chern.PointTensors`
and all components are read in their unitary frame.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .chern import PointTensors, _torsion_jet, to_frame
from .errors import MissingDataError
from .functionals import _T, ricci, torsion_norm
from .normalize import check_normalized

SYMBOLIC_TOL = 1e-6
FD_TOL = 1e-3


class IdentityId(str, enum.Enum):
    B1 = "B1"
    B2 = "B2"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    EQ11 = "EQ11"
    EQ31 = "EQ31"
    EQ32 = "EQ32"
    EQ33 = "EQ33"
    EQ36A = "EQ36A"
    EQ36B = "EQ36B"
    EQ37 = "EQ37"
    EQ38 = "EQ38"


DEFAULT = "default"
VARIANTS = {
    IdentityId.B2: ("as-printed", "standard"),
    IdentityId.C2: ("as-printed", "uniform-barred"),
}
LEMMAS = (
    IdentityId.EQ32,
    IdentityId.EQ33,
    IdentityId.EQ36A,
    IdentityId.EQ36B,
    IdentityId.EQ37,
    IdentityId.EQ38,
)

# free-index names of each residual array, in axis order
INDEX_NAMES = {
    IdentityId.B1: "ijkl",
    IdentityId.B2: "ijklm",
    IdentityId.C1: "kjlim",
    IdentityId.C2: "jiklm",
    IdentityId.C3: "jik",
    IdentityId.EQ11: "ijkl",
    IdentityId.EQ31: "ijkl",
    IdentityId.EQ32: "ijkl",
    IdentityId.EQ33: "ijkl",
    IdentityId.EQ36A: "ji",
    IdentityId.EQ36B: "jik",
    IdentityId.EQ37: "lmkji",
    IdentityId.EQ38: "jik",
}


@dataclass(frozen=True, eq=False)
class ResidualReport:
    """Max-abs residual of one identity (or pipeline check such as ``"P"``) at a point."""

    identity: IdentityId | str
    variant: str
    point: np.ndarray
    max_abs_residual: float
    index_argmax: tuple[int, ...]
    tolerance: float
    passed: bool

    def row(self, manifold: str, point_index: int) -> dict:
        return {
            "manifold": manifold,
            "point_index": point_index,
            "identity": getattr(self.identity, "value", self.identity),
            "variant": self.variant,
            "max_abs_residual": self.max_abs_residual,
            "argmax_indices": list(self.index_argmax),
            "pass": self.passed,
        }


def default_tolerance(tensors: PointTensors) -> float:
    return FD_TOL if tensors.jet.method == "fd" else SYMBOLIC_TOL


def report(identity, variant, residual, tensors: PointTensors, tol=None) -> ResidualReport:
    residual = np.asarray(residual)
    if tol is None:
        tol = default_tolerance(tensors)
    mags = np.abs(residual)
    flat = int(np.argmax(mags)) if mags.size else 0
    where = tuple(int(i) + 1 for i in np.unravel_index(flat, mags.shape)) if mags.ndim else ()
    worst = float(mags.max(initial=0.0))
    return ResidualReport(IdentityId(identity), variant, tensors.point, worst, where, tol, worst <= tol)


def _need(arr, name):
    if arr is None:
        raise MissingDataError(f"{name} is required but was not computed")
    return arr


def _delta(n):
    return np.eye(n)


# residual arrays


def bianchi_first_array(tensors: PointTensors) -> np.ndarray:
    """[i,j,k,l]: R_{k jbar i lbar} - R_{i jbar k lbar} - T^l_{ik,jbar}."""
    R = tensors.curvature.R
    T_bar = _need(tensors.torsion.T_bar, "T^j_{ik,lbar}")
    return R.transpose(2, 1, 0, 3) - R - np.einsum("likj->ijkl", T_bar)


def bianchi_second_array(tensors: PointTensors, variant: str) -> np.ndarray:
    """[i,j,k,l,m] residual of the second Bianchi identity in the given reading.

    as-printed: R_{k jbar i lbar,m} - R_{m jbar k lbar,i} - sum_r T^r_{im} R_{r jbar i lbar}
    standard:   R_{i jbar k lbar,m} - R_{m jbar k lbar,i} - sum_r T^r_{im} R_{r jbar k lbar}
    """
    R = tensors.curvature.R
    Rm = _need(tensors.curvature.R_m, "R_{i jbar k lbar,m}")
    T = tensors.torsion.T
    swapped = Rm.transpose(4, 1, 2, 3, 0)
    if variant == "standard":
        return Rm - swapped - np.einsum("rim,rjkl->ijklm", T, R)
    if variant == "as-printed":
        tail = np.einsum("rim,rjil->ijlm", T, R)[:, :, None, :, :]
        return Rm.transpose(2, 1, 0, 3, 4) - swapped - tail
    raise ValueError(f"unknown B2 variant {variant!r}")


def commutation_c1_array(tensors: PointTensors) -> np.ndarray:
    """[k,j,l,i,m]: T^k_{jl,ibar mbar} - T^k_{jl,mbar ibar} - sum_r conj(T^r_{im}) T^k_{jl,rbar}."""
    t = tensors.torsion
    bb = _need(t.T_bar_bar, "T^j_{ik,lbar sbar}")
    T_bar = _need(t.T_bar, "T^j_{ik,lbar}")
    return bb - bb.transpose(0, 1, 2, 4, 3) - np.einsum("rim,kjlr->kjlim", t.T.conj(), T_bar)


def _c2_lhs(tensors: PointTensors) -> np.ndarray:
    t = tensors.torsion
    bm = _need(t.T_bar_m, "T^j_{ik,lbar m}")
    mb = _need(t.T_m_bar, "T^j_{ik,m lbar}")
    return bm - mb.transpose(0, 1, 2, 4, 3)


def commutation_c2_array(tensors: PointTensors, variant: str) -> np.ndarray:
    """[j,i,k,l,m]: T^j_{ik,lbar m} - T^j_{ik,m lbar} - (right side).

    as-printed first summand: T^r_{ik} R_{m lbar r jbar};
    uniform-barred first summand: T^r_{ik} R_{m lbar j rbar}.
    """
    T = tensors.torsion.T
    R = tensors.curvature.R
    if variant == "as-printed":
        first = np.einsum("rik,mlrj->jiklm", T, R)
    elif variant == "uniform-barred":
        first = np.einsum("rik,mljr->jiklm", T, R)
    else:
        raise ValueError(f"unknown C2 variant {variant!r}")
    rhs = first - np.einsum("jrk,mlir->jiklm", T, R) - np.einsum("jir,mlkr->jiklm", T, R)
    return _c2_lhs(tensors) - rhs


def commutation_c3_array(tensors: PointTensors) -> np.ndarray:
    """[j,i,k]: sum_l (T^j_{ik,lbar l} - T^j_{ik,l lbar}) - (rho2 contraction)."""
    T = tensors.torsion.T
    rho2 = ricci(tensors.curvature.R, 2)
    lhs = np.einsum("jikll->jik", _c2_lhs(tensors))
    rhs = (
        np.einsum("rik,rj->jik", T, rho2)
        - np.einsum("jrk,ir->jik", T, rho2)
        - np.einsum("jir,kr->jik", T, rho2)
    )
    return lhs - rhs


def rbc_constant_array(tensors: PointTensors, c: float) -> np.ndarray:
    """[i,j,k,l]: R_{i jbar k lbar} + R_{k lbar i jbar} - 2c delta_{il} delta_{kj}."""
    R = tensors.curvature.R
    d = _delta(R.shape[0])
    return R + R.transpose(2, 3, 0, 1) - 2 * c * np.einsum("il,kj->ijkl", d, d)


def lemma_array(identity, tensors: PointTensors, c: float = 0.0) -> np.ndarray:
    identity = IdentityId(identity)
    t = tensors.torsion
    T = t.T
    n = T.shape[0]
    d = _delta(n)
    if identity is IdentityId.EQ32:
        T_bar = _need(t.T_bar, "T^j_{ik,lbar}")
        rhs = 2 * c * (np.einsum("ij,kl->ijkl", d, d) - np.einsum("il,kj->ijkl", d, d))
        return np.einsum("likj->ijkl", T_bar) - np.einsum("jikl->ijkl", T_bar) - rhs
    if identity is IdentityId.EQ33:
        T_bar = _need(t.T_bar, "T^j_{ik,lbar}")
        R = tensors.curvature.R
        return (
            2 * R
            - 2 * c * np.einsum("ij,kl->ijkl", d, d)
            + np.einsum("likj->ijkl", T_bar)
            + np.einsum("kjli->ijkl", T_bar).conj()
        )
    if identity is IdentityId.EQ36A:
        return np.einsum("jiss->ji", _need(t.T_bar, "T^j_{ik,lbar}"))
    if identity is IdentityId.EQ36B:
        bm = _need(t.T_bar_m, "T^j_{ik,lbar m}")
        return np.einsum("jikss->jik", bm) - np.einsum("ris,jrks->jik", T, t.T_bar)
    if identity is IdentityId.EQ37:
        bm = _need(t.T_bar_m, "T^j_{ik,lbar m}")
        return bm - bm.transpose(0, 4, 2, 3, 1) + np.einsum("rim,lrkj->lmkji", T, t.T_bar)
    if identity is IdentityId.EQ38:
        bm = _need(t.T_bar_m, "T^j_{ik,lbar m}")
        mb = _need(t.T_m_bar, "T^j_{ik,m lbar}")
        return np.einsum("jikss->jik", bm) - np.einsum("jikss->jik", mb)
    raise ValueError(f"{identity.value} is not a lemma identity")


# report-level operations


def residual_bianchi(kind: str, tensors: PointTensors, variant: str | None = None, tol=None) -> ResidualReport:
    if kind in ("first", IdentityId.B1, "B1"):
        return report(IdentityId.B1, DEFAULT, bianchi_first_array(tensors), tensors, tol)
    if kind in ("second", IdentityId.B2, "B2"):
        variant = variant or "standard"
        return report(IdentityId.B2, variant, bianchi_second_array(tensors, variant), tensors, tol)
    raise ValueError(f"Bianchi kind must be 'first' or 'second', got {kind!r}")


def residual_commutation(kind, tensors: PointTensors, variant: str | None = None, tol=None) -> ResidualReport:
    kind = IdentityId(kind)
    if kind is IdentityId.C1:
        return report(kind, DEFAULT, commutation_c1_array(tensors), tensors, tol)
    if kind is IdentityId.C2:
        variant = variant or "as-printed"
        return report(kind, variant, commutation_c2_array(tensors, variant), tensors, tol)
    if kind is IdentityId.C3:
        return report(kind, DEFAULT, commutation_c3_array(tensors), tensors, tol)
    raise ValueError(f"commutation kind must be C1, C2 or C3, got {kind.value}")


def residual_rbc_constant(tensors: PointTensors, c: float, tol=None) -> ResidualReport:
    """Constant-B curvature identity; reported as EQ11 for c = 0 and EQ31 otherwise."""
    identity = IdentityId.EQ11 if c == 0 else IdentityId.EQ31
    return report(identity, DEFAULT, rbc_constant_array(tensors, c), tensors, tol)


def residual_lemma(identity, tensors: PointTensors, c: float = 0.0, tol=None) -> ResidualReport:
    return report(identity, DEFAULT, lemma_array(identity, tensors, c), tensors, tol)


def evaluate(identity, tensors: PointTensors, c: float = 0.0, tol=None) -> list[ResidualReport]:
    """All registered variants of one identity at one point."""
    identity = IdentityId(identity)
    if identity is IdentityId.B1:
        return [residual_bianchi("first", tensors, tol=tol)]
    if identity is IdentityId.B2:
        return [residual_bianchi("second", tensors, v, tol) for v in VARIANTS[identity]]
    if identity is IdentityId.C2:
        return [residual_commutation(identity, tensors, v, tol) for v in VARIANTS[identity]]
    if identity in (IdentityId.C1, IdentityId.C3):
        return [residual_commutation(identity, tensors, tol=tol)]
    if identity is IdentityId.EQ11:
        return [residual_rbc_constant(tensors, 0.0, tol)]
    if identity is IdentityId.EQ31:
        return [report(identity, DEFAULT, rbc_constant_array(tensors, c), tensors, tol)]
    return [residual_lemma(identity, tensors, c, tol)]


def run_suite(tensors: PointTensors, identities=tuple(IdentityId), c: float = 0.0, tol=None) -> list[ResidualReport]:
    out = []
    for identity in identities:
        out.extend(evaluate(identity, tensors, c, tol))
    return out


def passing_variants(reports) -> dict[IdentityId, list[str]]:
    """Variants that pass at every report they appear in, per identity."""
    seen: dict = {}
    for r in reports:
        if r.identity in VARIANTS:
            seen.setdefault(r.identity, {}).setdefault(r.variant, True)
            seen[r.identity][r.variant] &= r.passed
    return {k: [v for v in VARIANTS[k] if seen[k].get(v)] for k in seen}


# Bochner quantities


@dataclass(frozen=True)
class BochnerQuantities:
    """f, the gradient sum, P and their combination at one point.

    ``P`` uses the covariant-derivative form 2 Re sum T^r_{is} T^j_{rk,sbar} conj(T^j_{ik}).
    ``P_general`` is sum (T^j_{ik,s sbar} conj(T^j_{ik}) + T^j_{ik} conj(T^j_{ik,sbar s})),
    which with ``first_sum`` gives the Laplacian of f for any metric;
    ``Lf_direct`` is that Laplacian computed from the Taylor jet of f itself.
    """

    f: float
    first_sum: float
    P: float
    Lf_reconstructed: float
    P_general: float | None = None
    Lf_direct: float | None = None


def _real(value: complex, what: str, tol: float = 1e-10) -> float:
    if abs(value.imag) > tol * max(1.0, abs(value.real)):
        raise ArithmeticError(f"{what} has imaginary part {value.imag:.3g}")
    return float(value.real)


def laplacian_of_torsion_norm(tensors: PointTensors) -> float:
    """sum_s f_{,s sbar} of f = |T|^2, from the Taylor jet of f in coordinates."""
    conn = tensors.connection
    alg = conn._alg
    n = conn.n
    T = _torsion_jet(conn)
    G = conn._metric_jet
    H = alg.inv(G).transpose(1, 0, 2)  # H[i, a] = g^{i abar}
    Tc = alg.conj(T)
    s = alg.mul("jb,bac->jac", G, Tc)
    s = alg.mul("ia,jac->jic", H, s)
    s = alg.mul("kc,jic->jik", H, s)
    f = alg.mul("jik,jik->", T, s)
    hess = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            alpha = [0] * (2 * n)
            alpha[i] += 1
            alpha[n + j] += 1
            hess[i, j] = alg.derivative_value(f, tuple(alpha))
    return _real(np.sum(alg.value(H) * hess), "Laplacian of f")


def bochner_quantities(tensors: PointTensors, direct: bool = True) -> BochnerQuantities:
    t = tensors.torsion
    T = t.T
    T_m = _need(t.T_m, "T^j_{ik,m}")
    T_bar = _need(t.T_bar, "T^j_{ik,lbar}")
    f = torsion_norm(T)
    first = float(np.sum(np.abs(T_m) ** 2) + np.sum(np.abs(T_bar) ** 2))
    P = 2.0 * float(np.einsum("ris,jrks,jik->", T, T_bar, T.conj()).real)
    P_general = Lf = None
    if t.T_bar_m is not None and t.T_m_bar is not None:
        value = np.einsum("jikss,jik->", t.T_m_bar, T.conj()) + np.einsum(
            "jik,jikss->", T, t.T_bar_m.conj()
        )
        P_general = _real(value, "P_general", 1e-8)
        if direct:
            Lf = laplacian_of_torsion_norm(tensors)
    return BochnerQuantities(f, first, P, first + P, P_general, Lf)


def p_vanishing_array(T) -> np.ndarray:
    """[i,j,k,s]: sum_r T^r_{is} T^j_{rk}, zeroed unless i, j, k are distinct."""
    T = _T(T)
    n = T.shape[0]
    full = np.einsum("ris,jrk->ijks", T, T)
    idx = np.arange(n)
    distinct = (idx[:, None, None] != idx[None, :, None]) & (idx[:, None, None] != idx[None, None, :]) & (
        idx[None, :, None] != idx[None, None, :]
    )
    return np.where(distinct[..., None], full, 0.0)


def p_vanishing_check(tensors, frame=None, tol: float = 1e-12, normalized_tol: float = 1e-8) -> ResidualReport:
    """The inner torsion product behind P = 0 for a normalized threefold frame.

    ``tensors`` is a :class:`PointTensors` (transformed to ``frame`` when
    given) or a bare torsion array already in the normalized frame. Raises
    :class:`~chernlab.errors.FrameNotNormalizedError` if T^i_{ik} != 0.
    """
    if isinstance(tensors, PointTensors):
        point = tensors.point
        T = tensors.torsion.T if frame is None else to_frame(tensors.torsion_coord.T, "udd", frame)
    else:
        point = None
        T = _T(tensors)
    if T.shape != (3, 3, 3):
        raise ValueError("the P-vanishing check is defined for n = 3")
    check_normalized(T, normalized_tol)
    res = p_vanishing_array(T)
    mags = np.abs(res)
    where = tuple(int(i) + 1 for i in np.unravel_index(int(np.argmax(mags)), mags.shape))
    worst = float(mags.max())
    return ResidualReport("P", DEFAULT, point, worst, where, tol, worst <= tol)
