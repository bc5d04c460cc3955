"""Scalar and matrix curvature functionals in a unitary frame."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REALNESS_TOL = 1e-10
SIGN_TOL = 1e-6
_ROUNDOFF = 16 * np.finfo(float).eps


def _R(R) -> np.ndarray:
    """Components from a CurvatureAtPoint or a bare array."""
    return np.asarray(R if isinstance(R, np.ndarray) else getattr(R, "R", R))


def _T(T) -> np.ndarray:
    """Components from a TorsionAtPoint or a bare array (``ndarray.T`` is a transpose)."""
    return np.asarray(T if isinstance(T, np.ndarray) else getattr(T, "T", T))


def hsc(R, X) -> float:
    """Holomorphic sectional curvature R_{X Xbar X Xbar} / |X|^4."""
    R = _R(R)
    X = np.asarray(X, dtype=complex)
    norm2 = float(np.vdot(X, X).real)
    if norm2 == 0:
        raise ValueError("holomorphic sectional curvature needs a nonzero vector")
    value = np.einsum("i,j,k,l,ijkl->", X, X.conj(), X, X.conj(), R) / norm2**2
    if abs(value.imag) > REALNESS_TOL * max(1.0, abs(value.real)):
        raise ArithmeticError(f"R_(X Xbar X Xbar) has imaginary part {value.imag:.3g}")
    return float(value.real)


def bisectional_matrix(R) -> np.ndarray:
    """Real symmetric Q_{ij} = R_{i ibar j jbar}."""
    R = _R(R)
    q = np.einsum("iijj->ij", R)
    if np.max(np.abs(q.imag), initial=0.0) > REALNESS_TOL * max(1.0, np.max(np.abs(q))):
        raise ArithmeticError("R_(i ibar j jbar) is not real")
    return q.real


def _weights(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ValueError("weights must be nonnegative")
    if not np.any(a > 0):
        raise ValueError("weights must have positive norm")
    return a


def rbc(R, a) -> float:
    """Real bisectional curvature (1/|a|^2) sum_{ij} R_{i ibar j jbar} a_i a_j."""
    a = _weights(a)
    q = bisectional_matrix(R)
    return float(a @ q @ a / (a @ a))


def rotate(R, u: np.ndarray) -> np.ndarray:
    """Components of R in the frame e'_a = sum_p u[p, a] e_p."""
    return np.einsum("pa,qb,rc,sd,pqrs->abcd", u, u.conj(), u, u.conj(), _R(R), optimize=True)


@dataclass(frozen=True, eq=False)
class BisectionalSpectrum:
    """Extremes of B over unitary rotations of the base frame and nonnegative unit weights.

    ``argmin``/``argmax`` are ``(u, a)`` pairs with ``u`` the rotation applied
    to the base frame, so ``rbc(rotate(R, u), a)`` reproduces the value.
    """

    min_value: float
    max_value: float
    argmin: tuple[np.ndarray, np.ndarray]
    argmax: tuple[np.ndarray, np.ndarray]
    restarts: int
    converged: bool

    def sign(self, tol: float = SIGN_TOL) -> str:
        if self.min_value > tol:
            return "positive"
        if self.max_value < -tol:
            return "negative"
        if abs(self.min_value) <= tol and abs(self.max_value) <= tol:
            return "zero"
        if self.min_value >= -tol:
            return "nonnegative"
        if self.max_value <= tol:
            return "nonpositive"
        return "indefinite"


class _Objective:
    """Batched B(u, a) and its Riemannian gradient for a fixed base tensor."""

    def __init__(self, R: np.ndarray, sign: float):
        n = R.shape[0]
        self.n = n
        self.sign = sign
        self.rmat = R.reshape(n * n, n * n)

    def projectors(self, u):
        # P[b, i] = vec(u_i u_i^H), shape (batch, n*n, n)
        n = self.n
        return np.einsum("bpi,bqi->bpqi", u, u.conj()).reshape(u.shape[0], n * n, n)

    def value(self, u, a):
        v = self.projectors(u)
        q = np.einsum("bxi,xy,byj->bij", v, self.rmat, v).real
        return self.sign * np.einsum("bi,bij,bj->b", a, q, a), q

    def gradient(self, u, a, q):
        n = self.n
        v = self.projectors(u)
        k = np.einsum("bxj,bj->bx", v, a)
        x = np.einsum("xy,by->bx", self.rmat, k).reshape(-1, n, n)
        y = np.einsum("bx,xy->by", k, self.rmat).reshape(-1, n, n)
        rot = np.einsum("bpa,bpq,bqc->bac", u, x + y, u.conj())
        e = rot * a[:, None, :]
        g = 2.0 * e.conj()
        g_u = self.sign * 0.5 * (g - np.conj(np.swapaxes(g, 1, 2)))
        qs = 0.5 * (q + np.swapaxes(q, 1, 2))
        g_a = self.sign * 2.0 * np.einsum("bij,bj->bi", qs, a)
        g_a = g_a - np.sum(g_a * a, axis=1, keepdims=True) * a
        # a boundary coordinate that descent would push negative cannot move
        blocked = (a <= 0) & (g_a > 0)
        g_a = np.where(blocked, 0.0, g_a)
        return g_u, g_a


def _retract_u(u, step):
    q, r = np.linalg.qr(u @ (np.eye(u.shape[1]) + step))
    d = np.diagonal(r, axis1=1, axis2=2)
    phase = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1), 1)
    return q * phase[:, None, :]


def _retract_a(a):
    a = np.maximum(a, 0.0)
    norm = np.linalg.norm(a, axis=1, keepdims=True)
    return np.where(norm > 0, a / np.where(norm > 0, norm, 1), 0.0)


def _random_unitary(rng, batch, n):
    z = rng.standard_normal((batch, n, n)) + 1j * rng.standard_normal((batch, n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def _descend(obj: _Objective, u, a, max_iter, grad_tol):
    """Backtracking projected gradient descent on a batch of starts.

    A start stops when its projected gradient norm reaches ``grad_tol`` or
    when no step decreases ``f`` beyond roundoff; only the former counts as
    converged.
    """
    f, q = obj.value(u, a)
    step = np.ones(u.shape[0])
    stalled = np.zeros(u.shape[0], dtype=bool)
    for _ in range(max_iter + 1):
        g_u, g_a = obj.gradient(u, a, q)
        gnorm2 = np.sum(np.abs(g_u) ** 2, axis=(1, 2)) + np.sum(g_a**2, axis=1)
        converged = np.sqrt(gnorm2) <= grad_tol
        active = ~(converged | stalled)
        if not np.any(active) or _ == max_iter:
            break
        t = np.minimum(step * 2.0, 1.0)
        accepted = ~active
        u_new, a_new, f_new, q_new = u.copy(), a.copy(), f.copy(), q.copy()
        for _ls in range(60):
            todo = ~accepted
            if not np.any(todo):
                break
            uc = _retract_u(u[todo], -t[todo, None, None] * g_u[todo])
            ac = _retract_a(a[todo] - t[todo, None] * g_a[todo])
            bad = np.sum(ac, axis=1) == 0
            ac[bad] = a[todo][bad]
            fc, qc = obj.value(uc, ac)
            ok = fc <= f[todo] - 1e-4 * t[todo] * gnorm2[todo]
            # near an optimum the decrease drops below roundoff in f before the
            # gradient reaches grad_tol; accept steps that keep f within
            # roundoff and shrink the gradient
            flat = ~ok & (fc <= f[todo] + _ROUNDOFF * np.maximum(1.0, np.abs(f[todo])))
            if np.any(flat):
                gu_c, ga_c = obj.gradient(uc[flat], ac[flat], qc[flat])
                gn_c = np.sum(np.abs(gu_c) ** 2, axis=(1, 2)) + np.sum(ga_c**2, axis=1)
                ok[np.flatnonzero(flat)[gn_c < 0.81 * gnorm2[todo][flat]]] = True
            idx = np.flatnonzero(todo)
            take = idx[ok]
            u_new[take], a_new[take], f_new[take], q_new[take] = uc[ok], ac[ok], fc[ok], qc[ok]
            accepted[take] = True
            t[idx[~ok]] *= 0.5
        stalled |= ~accepted
        step = np.where(accepted, t, step)
        u, a, f, q = u_new, a_new, f_new, q_new
    return u, a, f, converged


def _simplex_grid(n: int, per_edge: int) -> np.ndarray:
    m = per_edge - 1
    pts = []

    def rec(prefix, left, slots):
        if slots == 1:
            pts.append(prefix + [left])
            return
        for k in range(left + 1):
            rec(prefix + [k], left - k, slots - 1)

    rec([], m, n)
    a = np.array(pts, dtype=float)
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def rbc_extremes(
    R,
    restarts: int = 32,
    seed: int = 0,
    max_iter: int = 500,
    grad_tol: float = 1e-9,
    grid_per_edge: int = 33,
) -> BisectionalSpectrum:
    """Minimum and maximum of B over unitary frame rotations and weights.

    Multi-start projected gradient descent (and ascent) with backtracking:
    the frame rotation is updated along the skew-Hermitian gradient with a
    QR retraction, the weights are projected back onto the nonnegative unit
    sphere. For ``n == 3`` a barycentric grid over the weight simplex is
    evaluated as a safeguard at the base frame and at both optimizers.
    """
    R = np.asarray(_R(R), dtype=complex)
    n = R.shape[0]
    rng = np.random.default_rng(seed)
    u0 = np.concatenate([np.eye(n, dtype=complex)[None], _random_unitary(rng, restarts - 1, n)])
    a0 = np.abs(rng.standard_normal((restarts, n)))
    a0[0] = 1.0
    a0 /= np.linalg.norm(a0, axis=1, keepdims=True)

    results = {}
    for label, sign in (("min", 1.0), ("max", -1.0)):
        obj = _Objective(R, sign)
        u, a, f, done = _descend(obj, u0.copy(), a0.copy(), max_iter, grad_tol)
        best = int(np.argmin(f))
        results[label] = [sign * f[best], u[best], a[best], bool(done[best])]

    if n == 3 and grid_per_edge:
        grid = _simplex_grid(n, grid_per_edge)
        frames = [np.eye(n, dtype=complex), results["min"][1], results["max"][1]]
        for u in frames:
            q = bisectional_matrix(rotate(R, u))
            vals = np.einsum("gi,ij,gj->g", grid, q, grid)
            k = int(np.argmin(vals))
            if vals[k] < results["min"][0]:
                results["min"] = [float(vals[k]), u, grid[k], results["min"][3]]
            k = int(np.argmax(vals))
            if vals[k] > results["max"][0]:
                results["max"] = [float(vals[k]), u, grid[k], results["max"][3]]

    lo, hi = results["min"], results["max"]
    return BisectionalSpectrum(
        float(lo[0]),
        float(hi[0]),
        (lo[1], lo[2]),
        (hi[1], hi[2]),
        restarts,
        lo[3] and hi[3],
    )


def ricci(R, kind: int) -> np.ndarray:
    """First, second or third Chern Ricci tensor.

    rho1_{i jbar} = sum_r R_{i jbar r rbar}, rho2_{i jbar} = sum_r R_{r rbar i jbar},
    rho3_{i jbar} = sum_r R_{r jbar i rbar}. The first two are Hermitian;
    the third is in general not (its conjugate transpose is a fourth
    contraction).
    """
    R = _R(R)
    if kind == 1:
        rho = np.einsum("ijrr->ij", R)
    elif kind == 2:
        rho = np.einsum("rrij->ij", R)
    elif kind == 3:
        return np.einsum("rjir->ij", R)
    else:
        raise ValueError(f"Ricci kind must be 1, 2 or 3, got {kind!r}")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > REALNESS_TOL * max(1.0, np.max(np.abs(rho))):
        raise ArithmeticError(f"Ricci tensor of kind {kind} is not Hermitian")
    return rho


def gauduchon_eta(T) -> np.ndarray:
    """eta_i = sum_r T^r_{ri}."""
    return np.einsum("rri->i", _T(T))


def is_balanced(T, tol: float = 1e-8) -> bool:
    return bool(np.max(np.abs(gauduchon_eta(T))) <= tol)


def torsion_norm(T) -> float:
    """f = sum_{i,j,k} |T^j_{ik}|^2."""
    return float(np.sum(np.abs(_T(T)) ** 2))
