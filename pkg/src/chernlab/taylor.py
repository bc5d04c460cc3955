"""Truncated multivariate Taylor arithmetic.

A jet of a tensor-valued function is an array whose last axis holds Taylor
coefficients (not derivatives) over the monomials of a fixed set of
variables, truncated at a fixed total order. Products truncate at the same
order, so a product of jets valid to orders ``p`` and ``q`` is valid to
``min(p, q)``; each derivative lowers validity by one. Callers track
validity themselves.

Variables are ordered ``z_1..z_n, w_1..w_n`` so that conjugation of the
underlying function (``f -> conj(f(conj w, conj z))``) is a fixed
permutation of monomials plus conjugation of coefficients.
"""

from __future__ import annotations

import itertools
import math
import string
from functools import lru_cache

import numpy as np


class TaylorAlgebra:
    """Monomial bookkeeping for ``nvars`` variables truncated at ``order``."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        monomials = []
        for total in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), total):
                alpha = [0] * nvars
                for v in combo:
                    alpha[v] += 1
                monomials.append(tuple(alpha))
        self.monomials = monomials
        self.index = {alpha: k for k, alpha in enumerate(monomials)}
        self.size = len(monomials)

        size = self.size
        product = np.zeros((size, size, size))
        for a, alpha in enumerate(monomials):
            for b, beta in enumerate(monomials):
                gamma = tuple(x + y for x, y in zip(alpha, beta))
                c = self.index.get(gamma)
                if c is not None:
                    product[a, b, c] = 1.0
        self._product = product

        # derivative[v] maps coefficients of f to coefficients of d f / d x_v
        derivative = np.zeros((nvars, size, size))
        for v in range(nvars):
            for a, alpha in enumerate(monomials):
                if alpha[v] == 0:
                    continue
                lower = list(alpha)
                lower[v] -= 1
                derivative[v, a, self.index[tuple(lower)]] = alpha[v]
        self._derivative = derivative

        if nvars % 2 == 0:
            n = nvars // 2
            swap = [self.index[alpha[n:] + alpha[:n]] for alpha in monomials]
            self._conj_perm = np.array(swap)
        else:
            self._conj_perm = None

    def zeros(self, shape: tuple[int, ...]) -> np.ndarray:
        return np.zeros(tuple(shape) + (self.size,), dtype=complex)

    def from_derivatives(self, derivatives: dict, shape: tuple[int, ...]) -> np.ndarray:
        """Build a jet from a map ``multi-index -> partial derivative value``."""
        jet = self.zeros(shape)
        for alpha, value in derivatives.items():
            k = self.index.get(tuple(alpha))
            if k is None:
                continue
            factorial = math.prod(math.factorial(a) for a in alpha)
            jet[..., k] = np.asarray(value) / factorial
        return jet

    def value(self, jet: np.ndarray) -> np.ndarray:
        return jet[..., 0]

    def derivative_value(self, jet: np.ndarray, alpha: tuple[int, ...]) -> np.ndarray:
        factorial = math.prod(math.factorial(a) for a in alpha)
        return jet[..., self.index[tuple(alpha)]] * factorial

    def diff(self, jet: np.ndarray, v: int) -> np.ndarray:
        return jet @ self._derivative[v]

    def grad(self, jet: np.ndarray, variables) -> np.ndarray:
        """Stack derivatives along a new axis placed just before the jet axis."""
        return np.stack([self.diff(jet, v) for v in variables], axis=-2)

    def mul(self, subscripts: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Contract two jets as ``np.einsum(subscripts)`` on their tensor axes.

        ``subscripts`` names tensor axes only, e.g. ``"kl,ijl->kij"``; the
        jet axes are appended internally.
        """
        lhs, out = subscripts.split("->")
        left, right = lhs.split(",")
        x, y, z = _free_letters(subscripts, 3)
        spec = f"{left}{x},{right}{y},{x}{y}{z}->{out}{z}"
        return np.einsum(spec, a, b, self._product, optimize=True)

    def conj(self, jet: np.ndarray) -> np.ndarray:
        """Jet of ``conj(f(conj w, conj z))``, the conjugate function."""
        if self._conj_perm is None:
            raise ValueError("conjugation needs paired z/w variables")
        return np.conj(jet[..., self._conj_perm])

    def inv(self, jet: np.ndarray) -> np.ndarray:
        """Jet of the matrix inverse of a square-matrix-valued jet."""
        g0 = self.value(jet)
        g0_inv = np.linalg.inv(g0)
        nilpotent = jet.copy()
        nilpotent[..., 0] = 0.0
        const = self.zeros(g0.shape)
        const[..., 0] = g0_inv
        step = -self.mul("ab,bc->ac", const, nilpotent)
        result = const.copy()
        term = const.copy()
        for _ in range(self.order):
            term = self.mul("ab,bc->ac", step, term)
            result = result + term
        return result


def _free_letters(used: str, count: int) -> list[str]:
    pool = [c for c in string.ascii_letters if c not in used]
    return pool[:count]


@lru_cache(maxsize=None)
def algebra(nvars: int, order: int) -> TaylorAlgebra:
    return TaylorAlgebra(nvars, order)
