"""Expression trees over holomorphic coordinates ``z_k`` and their conjugates ``w_k``.

``z_k`` and ``w_k`` are independent symbols; ``w_k`` is bound to
``conj(z_k)`` only when an expression is evaluated on a point. This makes
Wirtinger differentiation purely syntactic.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

from ..errors import SingularityError


class Expression:
    """Base class of all immutable expression nodes."""

    __slots__ = ()

    def children(self) -> tuple["Expression", ...]:
        return ()

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return to_source(self)


def _hashed(cls):
    """Cache the structural hash; deep trees are hashed often during memoization."""
    original = cls.__hash__

    def __hash__(self):
        h = self._hash
        if h is None:
            h = original(self)
            object.__setattr__(self, "_hash", h)
        return h

    cls.__hash__ = __hash__
    return cls


@_hashed
@dataclass(frozen=True)
class Const(Expression):
    value: complex
    _hash: int = field(default=None, init=False, repr=False, compare=False)


@_hashed
@dataclass(frozen=True)
class Var(Expression):
    kind: str  # "z" or "w"
    index: int  # 1-based
    _hash: int = field(default=None, init=False, repr=False, compare=False)


@_hashed
@dataclass(frozen=True)
class Binary(Expression):
    op: str  # one of + - * /
    left: Expression
    right: Expression
    _hash: int = field(default=None, init=False, repr=False, compare=False)

    def children(self):
        return (self.left, self.right)


@_hashed
@dataclass(frozen=True)
class Neg(Expression):
    arg: Expression
    _hash: int = field(default=None, init=False, repr=False, compare=False)

    def children(self):
        return (self.arg,)


@_hashed
@dataclass(frozen=True)
class Pow(Expression):
    base: Expression
    exponent: int
    _hash: int = field(default=None, init=False, repr=False, compare=False)

    def children(self):
        return (self.base,)


@_hashed
@dataclass(frozen=True)
class Func(Expression):
    name: str  # "exp" or "log"
    arg: Expression
    _hash: int = field(default=None, init=False, repr=False, compare=False)

    def children(self):
        return (self.arg,)


ZERO = Const(0j)
ONE = Const(1 + 0j)


def _lift(x) -> Expression:
    if isinstance(x, Expression):
        return x
    return Const(complex(x))


def _is_const(e: Expression, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# Smart constructors: constant folding only.

def add(a: Expression, b: Expression) -> Expression:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Binary("+", a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    return Binary("-", a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    return Binary("*", a, b)


def div(a: Expression, b: Expression) -> Expression:
    if _is_const(b, 1):
        return a
    if _is_const(a, 0) and not _is_const(b, 0):
        return ZERO
    if _is_const(a) and _is_const(b) and b.value != 0:
        return Const(a.value / b.value)
    return Binary("/", a, b)


def neg(a: Expression) -> Expression:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: Expression, n: int) -> Expression:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a) and (a.value != 0 or n > 0):
        return Const(a.value ** n)
    return Pow(a, n)


def variables(e: Expression) -> set[tuple[str, int]]:
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add((node.kind, node.index))
        stack.extend(node.children())
    return out


# Differentiation

def differentiate(e: Expression, var: Var | tuple[str, int] | str, _memo=None) -> Expression:
    """Exact partial derivative treating every ``z_k`` and ``w_k`` as independent.

    ``var`` may be a :class:`Var`, a ``(kind, index)`` pair or a name such
    as ``"w2"``.
    """
    key = _var_key(var)
    if _memo is None:
        _memo = {}
    return _diff(e, key, _memo)


def _var_key(var) -> tuple[str, int]:
    if isinstance(var, Var):
        return (var.kind, var.index)
    if isinstance(var, str):
        kind, index = var[0], int(var[1:])
        if kind not in "zw" or index < 1:
            raise ValueError(f"not a coordinate symbol: {var!r}")
        return (kind, index)
    kind, index = var
    return (kind, int(index))


def _diff(e: Expression, key, memo) -> Expression:
    cached = memo.get(e)
    if cached is not None:
        return cached
    if isinstance(e, Const):
        out = ZERO
    elif isinstance(e, Var):
        out = ONE if (e.kind, e.index) == key else ZERO
    elif isinstance(e, Neg):
        out = neg(_diff(e.arg, key, memo))
    elif isinstance(e, Binary):
        da = _diff(e.left, key, memo)
        db = _diff(e.right, key, memo)
        if e.op == "+":
            out = add(da, db)
        elif e.op == "-":
            out = sub(da, db)
        elif e.op == "*":
            out = add(mul(da, e.right), mul(e.left, db))
        else:
            # (a/b)' = a'/b - a b' / b^2
            out = sub(div(da, e.right), div(mul(e.left, db), power(e.right, 2)))
    elif isinstance(e, Pow):
        db = _diff(e.base, key, memo)
        out = mul(mul(Const(complex(e.exponent)), power(e.base, e.exponent - 1)), db)
    elif isinstance(e, Func):
        da = _diff(e.arg, key, memo)
        if e.name == "exp":
            out = mul(e, da)
        else:
            out = div(da, e.arg)
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[e] = out
    return out


# Evaluation

class _ComplexBackend:
    exp = staticmethod(cmath.exp)
    log = staticmethod(cmath.log)

    @staticmethod
    def const(c: complex):
        return c

    @staticmethod
    def is_zero(x) -> bool:
        return x == 0


class _MpBackend:
    def __init__(self):
        import mpmath

        self.mp = mpmath
        self.exp = mpmath.exp
        self.log = mpmath.log

    def const(self, c: complex):
        return self.mp.mpc(c.real, c.imag)

    @staticmethod
    def is_zero(x) -> bool:
        return x == 0


BACKENDS = {"complex": _ComplexBackend()}


def _backend(name: str):
    if name not in BACKENDS:
        if name == "mp":
            BACKENDS["mp"] = _MpBackend()
        else:
            raise ValueError(f"unknown backend {name!r}")
    return BACKENDS[name]


def evaluate(e: Expression, z) -> complex:
    """Evaluate ``e`` at the point ``z`` with ``w_k := conj(z_k)``."""
    z = [complex(v) for v in z]
    w = [v.conjugate() for v in z]
    return evaluate_zw(e, z, w)


def evaluate_zw(e: Expression, z, w, backend: str = "complex", memo: dict | None = None):
    """Evaluate with ``z`` and ``w`` bound independently.

    ``backend="mp"`` evaluates with mpmath at the current working precision;
    ``z`` and ``w`` are then expected to hold mpmath numbers. ``memo`` may be
    shared across several expressions evaluated at the same arguments.
    """
    lib = _backend(backend)
    if memo is None:
        memo = {}
    return _eval(e, z, w, lib, memo)


def _eval(e, z, w, lib, memo):
    cached = memo.get(e)
    if cached is not None:
        return cached
    if isinstance(e, Const):
        out = lib.const(e.value)
    elif isinstance(e, Var):
        seq = z if e.kind == "z" else w
        if e.index > len(seq):
            raise IndexError(f"{e.kind}{e.index} out of range for dimension {len(seq)}")
        out = seq[e.index - 1]
    elif isinstance(e, Neg):
        out = -_eval(e.arg, z, w, lib, memo)
    elif isinstance(e, Binary):
        a = _eval(e.left, z, w, lib, memo)
        b = _eval(e.right, z, w, lib, memo)
        if e.op == "+":
            out = a + b
        elif e.op == "-":
            out = a - b
        elif e.op == "*":
            out = a * b
        else:
            if lib.is_zero(b):
                raise SingularityError("division by zero", e)
            out = a / b
    elif isinstance(e, Pow):
        a = _eval(e.base, z, w, lib, memo)
        if e.exponent < 0:
            if lib.is_zero(a):
                raise SingularityError("division by zero", e)
            out = 1 / a ** (-e.exponent)
        else:
            out = a ** e.exponent
    elif isinstance(e, Func):
        a = _eval(e.arg, z, w, lib, memo)
        if e.name == "exp":
            out = lib.exp(a)
        else:
            if lib.is_zero(a):
                raise SingularityError("log of zero", e)
            out = lib.log(a)
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[e] = out
    return out


# Serialization

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_source(e: Expression) -> str:
    """Serialize to the input grammar.

    Trees produced by the parser round-trip exactly. Folded constants that
    are negative or non-real serialize to an equivalent sub-expression.
    """
    return _src(e, 0)


def _const_src(c: complex) -> str:
    re, im = c.real, c.imag
    if im == 0 and re >= 0 and not (re == 0 and str(re).startswith("-")):
        return _num(re)
    if re == 0 and im == 1:
        return "i"
    parts = []
    if re != 0:
        parts.append(_num(abs(re)) if re > 0 else f"-{_num(-re)}")
    if im != 0:
        mag = abs(im)
        term = "i" if mag == 1 else f"{_num(mag)}*i"
        if parts:
            parts.append(("+ " if im > 0 else "- ") + term)
        else:
            parts.append(term if im > 0 else f"-{term}")
    if not parts:
        return "0"
    return "(" + " ".join(parts) + ")"


def _num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _src(e: Expression, prec: int) -> str:
    if isinstance(e, Const):
        return _const_src(e.value)
    if isinstance(e, Var):
        return f"{e.kind}{e.index}"
    if isinstance(e, Neg):
        s = "-" + _src(e.arg, 3)
        return f"({s})" if prec > 0 else s
    if isinstance(e, Binary):
        p = _PREC[e.op]
        # left-associative: the right operand needs strictly higher precedence
        s = f"{_src(e.left, p)} {e.op} {_src(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(e, Pow):
        base = _src(e.base, 4)
        if isinstance(e.base, Pow):
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, Func):
        return f"{e.name}({_src(e.arg, 0)})"
    raise TypeError(f"unknown node {type(e).__name__}")
