"""Metric specifications and their jets at a point."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import JetOrderError, MetricError
from ..taylor import algebra
from .expr import Expression, differentiate, evaluate_zw, to_source
from .parser import parse_expression

HERMITIAN_TOL = 1e-12


def multi_indices(n: int, order: int):
    """All ``(alpha, beta)`` pairs over ``n`` z- and ``n`` w-variables with total order <= ``order``."""
    out = []
    for total in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(2 * n), total):
            full = [0] * (2 * n)
            for v in combo:
                full[v] += 1
            out.append((tuple(full[:n]), tuple(full[n:])))
    return out


class MetricSpec:
    """An ``n x n`` matrix of expressions ``g_{i jbar}(z, w)``.

    Instances are immutable; derivative expressions are built lazily and
    cached per instance.
    """

    def __init__(self, name: str, entries):
        rows = tuple(tuple(row) for row in entries)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise MetricError(f"metric {name!r} must be a square matrix")
        if not all(isinstance(e, Expression) for row in rows for e in row):
            raise TypeError("entries must be Expression instances")
        self.name = name
        self.n = n
        self.entries = rows
        self._derivatives: dict = {}

    @classmethod
    def from_strings(cls, name: str, rows) -> "MetricSpec":
        n = len(rows)
        return cls(name, [[parse_expression(s, n) for s in row] for row in rows])

    def __repr__(self):
        return f"MetricSpec({self.name!r}, n={self.n})"

    def source(self) -> list[list[str]]:
        return [[to_source(e) for e in row] for row in self.entries]

    def derivative(self, alpha: tuple[int, ...], beta: tuple[int, ...]):
        """Matrix of expressions for ``d^alpha dbar^beta g`` (z-derivatives first)."""
        key = (tuple(alpha), tuple(beta))
        cached = self._derivatives.get(key)
        if cached is not None:
            return cached
        full = list(key[0]) + list(key[1])
        if sum(full) == 0:
            out = self.entries
        else:
            v = next(k for k, a in enumerate(full) if a)
            lower = list(full)
            lower[v] -= 1
            parent = self.derivative(tuple(lower[: self.n]), tuple(lower[self.n :]))
            var = ("z", v + 1) if v < self.n else ("w", v - self.n + 1)
            memo: dict = {}
            out = tuple(tuple(differentiate(e, var, memo) for e in row) for row in parent)
        self._derivatives[key] = out
        return out

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return _evaluate_matrix(self.entries, list(z), list(np.conj(z)))

    def validate(self, z) -> np.ndarray:
        """Evaluate at ``z`` and check Hermitian symmetry and positive definiteness."""
        g = self.evaluate(z)
        scale = max(1.0, float(np.max(np.abs(g))))
        if np.max(np.abs(g - g.conj().T)) > HERMITIAN_TOL * scale:
            i, j = np.unravel_index(np.argmax(np.abs(g - g.conj().T)), g.shape)
            raise MetricError(
                f"metric {self.name!r} is not Hermitian: g[{i + 1}{j + 1}] != conj(g[{j + 1}{i + 1}])", z
            )
        eig = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
        if eig.min() <= 0:
            raise MetricError(
                f"metric {self.name!r} is not positive definite (min eigenvalue {eig.min():.3g})", z
            )
        return g


def _evaluate_matrix(entries, z, w, backend="complex", memo=None):
    if memo is None:
        memo = {}
    n = len(entries)
    if backend == "complex":
        out = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                out[i, j] = evaluate_zw(entries[i][j], z, w, backend, memo)
        return out
    return [[evaluate_zw(entries[i][j], z, w, backend, memo) for j in range(n)] for i in range(n)]


@dataclass(frozen=True, eq=False)
class MetricJet:
    """Values of ``g`` and its Wirtinger derivatives at a point.

    ``derivatives[(alpha, beta)]`` holds ``d^alpha dbar^beta g`` as an
    ``n x n`` array, including the zeroth-order entry.
    """

    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    derivatives: dict
    order: int
    method: str = "symbolic"
    step: float | None = None
    _taylor: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def d(self, alpha, beta) -> np.ndarray:
        key = (tuple(alpha), tuple(beta))
        if key not in self.derivatives:
            raise JetOrderError(f"jet of order {self.order} has no derivative {key}")
        return self.derivatives[key]

    def taylor(self) -> np.ndarray:
        """Taylor-coefficient array of shape ``(n, n, M)`` over ``z1..zn, w1..wn``."""
        if "g" not in self._taylor:
            alg = algebra(2 * self.n, self.order)
            flat = {a + b: v for (a, b), v in self.derivatives.items()}
            self._taylor["g"] = alg.from_derivatives(flat, (self.n, self.n))
        return self._taylor["g"]


def metric_jet(spec: MetricSpec, z, order: int = 3) -> MetricJet:
    """Exact jet of ``spec`` at ``z`` from symbolic differentiation."""
    z = np.asarray(z, dtype=complex)
    if z.shape != (spec.n,):
        raise ValueError(f"point must have {spec.n} coordinates")
    g = spec.validate(z)
    zl, wl = list(z), list(np.conj(z))
    memo: dict = {}
    derivs = {}
    for alpha, beta in multi_indices(spec.n, order):
        derivs[(alpha, beta)] = _evaluate_matrix(spec.derivative(alpha, beta), zl, wl, memo=memo)
    return MetricJet(z, g, np.linalg.inv(g), derivs, order, "symbolic")


# Central stencils with O(h^2) truncation error, keyed by derivative order.
_STENCILS = {
    0: {0: 1.0},
    1: {1: 0.5, -1: -0.5},
    2: {1: 1.0, 0: -2.0, -1: 1.0},
    3: {2: 0.5, 1: -1.0, -1: 1.0, -2: -0.5},
}


def _stencil(full_alpha):
    """Weights over integer offset vectors for the product stencil of a multi-index."""
    per_var = [_STENCILS[a].items() for a in full_alpha]
    out = {}
    for combo in itertools.product(*per_var):
        offset = tuple(o for o, _ in combo)
        weight = 1.0
        for _, wgt in combo:
            weight *= wgt
        out[offset] = out.get(offset, 0.0) + weight
    return out


def finite_difference_jet(spec: MetricSpec, z, h: float = 1e-4, order: int = 3, dps: int = 40) -> MetricJet:
    """Jet of ``spec`` at ``z`` from central finite differences with step ``h``.

    ``z_k`` and ``w_k`` are perturbed independently, which is legitimate
    because each entry is analytic in all ``2n`` arguments. Entries are
    evaluated with mpmath at ``dps`` digits so that the truncation error,
    not cancellation, dominates even for third derivatives.
    """
    import mpmath

    z = np.asarray(z, dtype=complex)
    g = spec.validate(z)
    n = spec.n
    values: dict = {}
    derivs = {}
    with mpmath.workdps(dps):
        hm = mpmath.mpf(h)
        base = [mpmath.mpc(c.real, c.imag) for c in z] + [mpmath.mpc(c.real, -c.imag) for c in z]
        for alpha, beta in multi_indices(n, order):
            full = alpha + beta
            total = sum(full)
            acc = [[mpmath.mpc(0) for _ in range(n)] for _ in range(n)]
            for offset, weight in _stencil(full).items():
                vals = values.get(offset)
                if vals is None:
                    args = [b + o * hm for b, o in zip(base, offset)]
                    vals = _evaluate_matrix(spec.entries, args[:n], args[n:], backend="mp")
                    values[offset] = vals
                for i in range(n):
                    for j in range(n):
                        acc[i][j] += weight * vals[i][j]
            scale = hm ** total
            derivs[(alpha, beta)] = np.array(
                [[complex(acc[i][j] / scale) for j in range(n)] for i in range(n)]
            )
    return MetricJet(z, g, np.linalg.inv(g), derivs, order, "fd", h)


def finite_difference(expr: Expression, z, w, alpha, h: float, dps: int = 40) -> complex:
    """Central finite-difference estimate of one partial derivative of ``expr``.

    ``alpha`` is a multi-index over ``z1..zn, w1..wn`` (length ``2n``).
    """
    import mpmath

    n = len(z)
    with mpmath.workdps(dps):
        hm = mpmath.mpf(h)
        base = [mpmath.mpc(complex(c).real, complex(c).imag) for c in list(z) + list(w)]
        acc = mpmath.mpc(0)
        for offset, weight in _stencil(tuple(alpha)).items():
            args = [b + o * hm for b, o in zip(base, offset)]
            acc += weight * evaluate_zw(expr, args[:n], args[n:], backend="mp")
        return complex(acc / hm ** sum(alpha))
