"""Symbolic expressions in ``z_i`` and ``zbar_i`` with exact Wirtinger calculus.

Expressions are kept in a normal form: a sum of terms, each term a Gaussian
rational coefficient times a product of atoms raised to nonzero integer
powers.  Atoms are

* ``Var``   -- a coordinate ``z_i`` or its conjugate ``zbar_i``;
* ``ExpAtom`` -- ``exp(arg)``; a term carries at most one, with power 1;
* ``SumAtom`` -- a multi-term sum, only ever raised to a negative power
  (positive powers of sums are expanded).

Coefficients are exact, so algebraic identities such as ``dbar o dbar = 0``
hold as structural equalities rather than up to rounding.

Grammar accepted by :func:`parse` (EBNF)::

    expr    = ["+" | "-"] term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("+" | "-") unary | power ;
    power   = atom [ "^" ["+" | "-"] INT ] ;
    atom    = NUMBER ["i"] | "i" | VAR | FUNC "(" expr ")" | "(" expr ")" ;
    VAR     = "z" INT | "zb" INT ;          (1-based indices)
    FUNC    = "exp" | "conj" ;
    NUMBER  = digits ["." digits] [("e"|"E") ["+"|"-"] digits] ;
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Number

import numpy as np

__all__ = [
    "Coeff",
    "Expr",
    "Var",
    "ExpAtom",
    "SumAtom",
    "Point",
    "ExprSyntaxError",
    "SingularEvaluationError",
    "EvaluationOverflowError",
    "const",
    "var",
    "zvar",
    "zbvar",
    "ZERO",
    "ONE",
    "I",
    "exp",
    "recip",
    "conj_expr",
    "d_z",
    "d_zbar",
    "substitute",
    "parse",
    "to_string",
    "evaluate",
    "eval_expr",
    "max_index",
    "clear_denominators",
    "is_identically_zero",
    "is_holomorphic",
    "is_polynomial",
    "polynomial_coefficients",
    "fd_wirtinger",
]


class ExprSyntaxError(ValueError):
    """Parse failure; ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class SingularEvaluationError(ArithmeticError):
    """A reciprocal or negative power was evaluated at a zero of its base."""


class EvaluationOverflowError(ArithmeticError):
    """Evaluation produced a non-finite value."""


# ---------------------------------------------------------------------------
# Gaussian rational coefficients


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite coefficient {x!r}")
        # decimal reading: 0.3 means 3/10, not its binary neighbour
        return Fraction(repr(float(x)))
    raise TypeError(f"cannot convert {type(x).__name__} to a coefficient")


class Coeff:
    """Exact complex rational ``re + im*i``."""

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re=0, im=0):
        self.re = _to_fraction(re)
        self.im = _to_fraction(im)
        self._hash = hash((self.re, self.im))

    @classmethod
    def of(cls, x) -> "Coeff":
        if isinstance(x, Coeff):
            return x
        if isinstance(x, (complex, np.complexfloating)):
            return cls(float(x.real), float(x.imag))
        return cls(x, 0)

    def __add__(self, o: "Coeff") -> "Coeff":
        return Coeff(self.re + o.re, self.im + o.im)

    def __sub__(self, o: "Coeff") -> "Coeff":
        return Coeff(self.re - o.re, self.im - o.im)

    def __mul__(self, o: "Coeff") -> "Coeff":
        return Coeff(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def __neg__(self) -> "Coeff":
        return Coeff(-self.re, -self.im)

    def inverse(self) -> "Coeff":
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("symbolic division by zero")
        return Coeff(self.re / d, -self.im / d)

    def conjugate(self) -> "Coeff":
        return Coeff(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_one(self) -> bool:
        return self.re == 1 and self.im == 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __eq__(self, o) -> bool:
        return isinstance(o, Coeff) and self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Coeff({self.re}, {self.im})"


_C0 = Coeff(0)
_C1 = Coeff(1)


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


# ---------------------------------------------------------------------------
# atoms


class Var:
    __slots__ = ("index", "bar", "key")

    def __init__(self, index: int, bar: bool):
        self.index = index
        self.bar = bar
        self.key = (0, index, int(bar))

    def __eq__(self, o) -> bool:
        return self is o or (isinstance(o, Var) and o.index == self.index and o.bar == self.bar)

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        return f"{'zb' if self.bar else 'z'}{self.index + 1}"

    __repr__ = __str__


class ExpAtom:
    __slots__ = ("arg", "key")

    def __init__(self, arg: "Expr"):
        self.arg = arg
        self.key = (1, arg.key)

    def __eq__(self, o) -> bool:
        return self is o or (isinstance(o, ExpAtom) and o.arg == self.arg)

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        return f"exp({self.arg})"

    __repr__ = __str__


class SumAtom:
    __slots__ = ("base", "key")

    def __init__(self, base: "Expr"):
        self.base = base
        self.key = (2, base.key)

    def __eq__(self, o) -> bool:
        return self is o or (isinstance(o, SumAtom) and o.base == self.base)

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        return f"({self.base})"

    __repr__ = __str__


# hash-consing: structurally equal atoms share one object
_ATOMS: dict = {}


def _intern(atom):
    got = _ATOMS.get(atom)
    if got is None:
        _ATOMS[atom] = atom
        got = atom
    return got


def _var_atom(index: int, bar: bool) -> Var:
    return _intern(Var(index, bar))


# ---------------------------------------------------------------------------
# expressions

# A monomial is a tuple of (atom, exponent) pairs sorted by atom key.
_EMPTY: tuple = ()


def _mono_key(mono) -> tuple:
    return tuple((a.key, k) for a, k in mono)


class Expr:
    """Immutable normalized expression.

    ``terms`` is a tuple of ``(monomial, Coeff)`` pairs sorted by monomial key,
    with no zero coefficients.  Use the module constructors (:func:`const`,
    :func:`var`, :func:`parse`) and arithmetic operators to build instances.
    """

    __slots__ = ("terms", "_hash", "_key", "_str")

    def __init__(self, terms: tuple):
        self.terms = terms
        self._hash = None
        self._key = None
        self._str = None

    # structural identity -------------------------------------------------
    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = tuple((_mono_key(m), c.re, c.im) for m, c in self.terms)
        return self._key

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __eq__(self, o) -> bool:
        if self is o:
            return True
        if isinstance(o, Expr):
            return hash(self) == hash(o) and self.key == o.key
        if isinstance(o, (Number, Coeff)):
            return self == const(o)
        return NotImplemented

    def __ne__(self, o) -> bool:
        r = self.__eq__(o)
        return r if r is NotImplemented else not r

    # queries -------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not self.terms[0][0])

    def constant_value(self) -> Coeff:
        if not self.terms:
            return _C0
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms[0][1]

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    # arithmetic ----------------------------------------------------------
    def __add__(self, o) -> "Expr":
        o = _as_expr(o)
        if not o.terms:
            return self
        if not self.terms:
            return o
        acc = dict(self.terms)
        for m, c in o.terms:
            _accumulate(acc, m, c)
        return _from_dict(acc)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, o) -> "Expr":
        return self + (-_as_expr(o))

    def __rsub__(self, o) -> "Expr":
        return _as_expr(o) + (-self)

    def __mul__(self, o) -> "Expr":
        o = _as_expr(o)
        return _mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, o) -> "Expr":
        return self * recip(_as_expr(o))

    def __rtruediv__(self, o) -> "Expr":
        return _as_expr(o) * recip(self)

    def __pow__(self, k: int) -> "Expr":
        return _pow(self, k)

    def __str__(self) -> str:
        if self._str is None:
            self._str = to_string(self)
        return self._str

    def __repr__(self) -> str:
        return f"Expr({str(self)!r})"


def _from_dict(acc: dict) -> Expr:
    items = [(m, c) for m, c in acc.items() if not c.is_zero()]
    items.sort(key=lambda mc: _mono_key(mc[0]))
    return Expr(tuple(items))


def _accumulate(acc: dict, mono, c: Coeff) -> None:
    prev = acc.get(mono)
    acc[mono] = c if prev is None else prev + c


def const(c) -> Expr:
    c = Coeff.of(c)
    if c.is_zero():
        return ZERO
    return Expr(((_EMPTY, c),))


def var(index: int, bar: bool = False) -> Expr:
    """Coordinate ``z_index`` (0-based), or its conjugate when ``bar``."""
    if index < 0:
        raise ValueError("variable index must be non-negative")
    return Expr(((((_var_atom(index, bar), 1),), _C1),))


def zvar(index: int) -> Expr:
    return var(index, False)


def zbvar(index: int) -> Expr:
    return var(index, True)


def _as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (Number, Coeff, np.number)):
        return const(x)
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


ZERO = Expr(())
ONE = Expr(((_EMPTY, _C1),))
I = Expr(((_EMPTY, Coeff(0, 1)),))


# monomial multiplication ---------------------------------------------------


def _mono_mul(m1, m2):
    """Multiply monomials.

    Returns ``(mono, expr_factor)`` where ``expr_factor`` is ``None`` or an
    Expr that must still multiply the result (it arises when sum atoms end up
    with a positive power and have to be expanded).
    """
    if not m1:
        return m2, None
    if not m2:
        return m1, None
    powers: dict = {}
    exp_arg = None
    for mono in (m1, m2):
        for a, k in mono:
            if isinstance(a, ExpAtom):
                arg = a.arg if k == 1 else a.arg * const(k)
                exp_arg = arg if exp_arg is None else exp_arg + arg
            else:
                powers[a] = powers.get(a, 0) + k
    return _build_mono(powers, exp_arg)


def _build_mono(powers: dict, exp_arg):
    extra = None
    items = []
    for a, k in powers.items():
        if k == 0:
            continue
        if isinstance(a, SumAtom) and k > 0:
            f = _pow(a.base, k)
            extra = f if extra is None else _mul(extra, f)
            continue
        items.append((a, k))
    if exp_arg is not None and exp_arg.terms:
        items.append((_intern(ExpAtom(exp_arg)), 1))
    items.sort(key=lambda ak: ak[0].key)
    return tuple(items), extra


def _mul(a: Expr, b: Expr) -> Expr:
    if not a.terms or not b.terms:
        return ZERO
    if a is ONE:
        return b
    if b is ONE:
        return a
    acc: dict = {}
    deferred = []
    for m1, c1 in a.terms:
        for m2, c2 in b.terms:
            mono, extra = _mono_mul(m1, m2)
            c = c1 * c2
            if extra is None:
                _accumulate(acc, mono, c)
            else:
                deferred.append((mono, c, extra))
    out = _from_dict(acc)
    for mono, c, extra in deferred:
        out = out + _mul(Expr(((mono, c),)), extra)
    return out


def _pow(e: Expr, k: int) -> Expr:
    if not isinstance(k, (int, np.integer)):
        raise TypeError("only integer powers are supported")
    k = int(k)
    if k == 0:
        return ONE
    if k < 0:
        return _pow(recip(e), -k)
    if len(e.terms) == 1:
        m, c = e.terms[0]
        cc = _C1
        for _ in range(k):
            cc = cc * c
        powers: dict = {}
        exp_arg = None
        for a, j in m:
            if isinstance(a, ExpAtom):
                exp_arg = a.arg * const(j * k)
            else:
                powers[a] = j * k
        mono, extra = _build_mono(powers, exp_arg)
        out = Expr(((mono, cc),))
        return out if extra is None else _mul(out, extra)
    result = ONE
    base = e
    while k:
        if k & 1:
            result = _mul(result, base)
        k >>= 1
        if k:
            base = _mul(base, base)
    return result


def recip(e: Expr) -> Expr:
    """Reciprocal ``1/e``; multi-term sums become a ``SumAtom`` with power -1."""
    e = _as_expr(e)
    if not e.terms:
        raise ZeroDivisionError("reciprocal of the zero expression")
    if len(e.terms) == 1:
        m, c = e.terms[0]
        powers: dict = {}
        exp_arg = None
        for a, k in m:
            if isinstance(a, ExpAtom):
                exp_arg = -a.arg
            else:
                powers[a] = -k
        mono, extra = _build_mono(powers, exp_arg)
        out = Expr(((mono, c.inverse()),))
        return out if extra is None else _mul(out, extra)
    lead = e.terms[0][1]
    inv = lead.inverse()
    base = Expr(tuple((m, c * inv) for m, c in e.terms))
    atom = _intern(SumAtom(base))
    return Expr(((((atom, -1),), inv),))


def exp(e) -> Expr:
    e = _as_expr(e)
    if not e.terms:
        return ONE
    return Expr(((((_intern(ExpAtom(e)), 1),), _C1),))


# ---------------------------------------------------------------------------
# conjugation, derivatives, substitution


@lru_cache(maxsize=None)
def conj_expr(e: Expr) -> Expr:
    """Complex conjugate, pushed down to the variables."""
    out = ZERO
    for m, c in e.terms:
        t = const(c.conjugate())
        for a, k in m:
            t = t * _pow(_conj_atom(a), k)
        out = out + t
    return out


def _conj_atom(a) -> Expr:
    if isinstance(a, Var):
        return var(a.index, not a.bar)
    if isinstance(a, ExpAtom):
        return exp(conj_expr(a.arg))
    return conj_expr(a.base)


def _atom_expr(a) -> Expr:
    return Expr(((((a, 1),), _C1),))


@lru_cache(maxsize=None)
def _d(e: Expr, index: int, bar: bool) -> Expr:
    acc = ZERO
    for m, c in e.terms:
        for pos, (a, k) in enumerate(m):
            da = _d_atom(a, index, bar)
            if da.is_zero():
                continue
            rest = Expr(((m[:pos] + m[pos + 1:], c * Coeff(k)),))
            # a^(k-1) * da * rest
            acc = acc + rest * _pow(_atom_expr(a), k - 1) * da
    return acc


def _d_atom(a, index: int, bar: bool) -> Expr:
    if isinstance(a, Var):
        return ONE if (a.index == index and a.bar == bar) else ZERO
    if isinstance(a, ExpAtom):
        inner = _d(a.arg, index, bar)
        return ZERO if inner.is_zero() else _atom_expr(a) * inner
    return _d(a.base, index, bar)


def d_z(e: Expr, i: int) -> Expr:
    """Wirtinger derivative d/dz_i (0-based), treating z and zbar as independent."""
    if i < 0:
        raise ValueError("index must be non-negative")
    return _d(e, i, False)


def d_zbar(e: Expr, i: int) -> Expr:
    """Wirtinger derivative d/dzbar_i (0-based)."""
    if i < 0:
        raise ValueError("index must be non-negative")
    return _d(e, i, True)


def substitute(e: Expr, images: list) -> Expr:
    """Holomorphic substitution ``z_i -> images[i]`` (and ``zbar_i -> conj``)."""
    images = [_as_expr(x) for x in images]
    conj_images = [conj_expr(x) for x in images]
    memo: dict = {}

    def sub_atom(a) -> Expr:
        got = memo.get(a)
        if got is not None:
            return got
        if isinstance(a, Var):
            if a.index >= len(images):
                raise ValueError(f"no image for variable {a}")
            r = conj_images[a.index] if a.bar else images[a.index]
        elif isinstance(a, ExpAtom):
            r = exp(sub(a.arg))
        else:
            r = sub(a.base)
        memo[a] = r
        return r

    def sub(x: Expr) -> Expr:
        out = ZERO
        for m, c in x.terms:
            t = const(c)
            for a, k in m:
                t = t * _pow(sub_atom(a), k)
            out = out + t
        return out

    return sub(e)


def _atoms(e: Expr, seen=None):
    if seen is None:
        seen = set()
    for m, _ in e.terms:
        for a, _k in m:
            if a in seen:
                continue
            seen.add(a)
            if isinstance(a, ExpAtom):
                _atoms(a.arg, seen)
            elif isinstance(a, SumAtom):
                _atoms(a.base, seen)
    return seen


def clear_denominators(e: Expr) -> Expr:
    """Multiply ``e`` by the smallest product of sum-atom powers making it polynomial in them.

    ``e`` vanishes wherever it is defined iff the result is the zero Expr,
    which turns rational identities into exact polynomial ones.
    """
    worst: dict = {}
    for m, _ in e.terms:
        for a, k in m:
            if isinstance(a, SumAtom) and k < 0:
                worst[a] = max(worst.get(a, 0), -k)
            elif isinstance(a, Var) and k < 0:
                worst[a] = max(worst.get(a, 0), -k)
    if not worst:
        return e
    out = ZERO
    for m, c in e.terms:
        powers = dict(worst)
        exp_arg = None
        for a, k in m:
            if isinstance(a, ExpAtom):
                exp_arg = a.arg
            else:
                powers[a] = powers.get(a, 0) + k
        mono, extra = _build_mono(powers, exp_arg)
        t = Expr(((mono, c),))
        out = out + (t if extra is None else _mul(t, extra))
    return out


def is_identically_zero(e: Expr) -> bool:
    """Exact test of ``e == 0`` on the complement of its poles."""
    return clear_denominators(e).is_zero()


def max_index(e: Expr) -> int:
    """Largest variable index used (0-based), or -1 for constants."""
    return max((a.index for a in _atoms(e) if isinstance(a, Var)), default=-1)


def is_holomorphic(e: Expr) -> bool:
    """True when no conjugate variable occurs anywhere in ``e``."""
    return not any(isinstance(a, Var) and a.bar for a in _atoms(e))


def is_polynomial(e: Expr) -> bool:
    for m, _ in e.terms:
        for a, k in m:
            if not isinstance(a, Var) or k < 0:
                return False
    return True


def polynomial_coefficients(e: Expr, n: int) -> dict:
    """Map exponent tuples to complex coefficients for a holomorphic polynomial."""
    if not is_polynomial(e) or not is_holomorphic(e):
        raise ValueError(f"not a holomorphic polynomial: {e}")
    out = {}
    for m, c in e.terms:
        expo = [0] * n
        for a, k in m:
            if a.index >= n:
                raise ValueError(f"variable {a} outside dimension {n}")
            expo[a.index] = k
        out[tuple(expo)] = complex(c)
    return out


# ---------------------------------------------------------------------------
# printing and parsing


def _coeff_str(c: Coeff) -> str:
    if c.im == 0:
        return _frac_str(c.re)
    if c.re == 0:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{_frac_str(c.im)}*i"
    im = c.im
    sign = "+" if im > 0 else "-"
    mag = abs(im)
    im_s = "i" if mag == 1 else f"{_frac_str(mag)}*i"
    return f"({_frac_str(c.re)} {sign} {im_s})"


def _factor_str(a, k: int) -> str:
    if isinstance(a, Var):
        base = str(a)
    elif isinstance(a, ExpAtom):
        base = f"exp({to_string(a.arg)})"
    else:
        base = f"({to_string(a.base)})"
    return base if k == 1 else f"{base}^{k}"


def to_string(e: Expr) -> str:
    if not e.terms:
        return "0"
    parts = []
    for idx, (m, c) in enumerate(e.terms):
        negative = c.im == 0 and c.re < 0
        mag = -c if negative else c
        factors = [_factor_str(a, k) for a, k in m]
        if mag.is_one() and factors:
            body = "*".join(factors)
        else:
            body = "*".join([_coeff_str(mag)] + factors)
        if idx == 0:
            parts.append(("-" if negative else "") + body)
        else:
            parts.append((" - " if negative else " + ") + body)
    return "".join(parts)


_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text: str, n: int, names):
        self.text = text
        self.n = n
        self.names = names
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            mt = _TOKEN.match(text, pos)
            if mt is None or mt.end() == pos:
                col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise ExprSyntaxError(f"unexpected character {text[col - 1]!r}", col)
            start = mt.start(mt.lastgroup) if mt.lastgroup else pos
            if mt.group("num") is not None:
                start = mt.start("num")
                self.toks.append(("num", (mt.group("num"), mt.group("imag") is not None), start + 1))
            elif mt.group("name") is not None:
                self.toks.append(("name", mt.group("name"), start + 1))
            else:
                self.toks.append(("op", mt.group("op"), start + 1))
            pos = mt.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", None, len(self.text) + 1)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, op: str):
        kind, val, col = self.take()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", col)

    def parse(self) -> Expr:
        if not self.toks:
            raise ExprSyntaxError("empty expression", 1)
        e = self.expr()
        kind, val, col = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", col)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                e = e + rhs if val == "+" else e - rhs
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, val, col = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                if val == "*":
                    e = e * rhs
                else:
                    if rhs.is_zero():
                        raise ExprSyntaxError("division by zero", col)
                    e = e / rhs
            else:
                return e

    def unary(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            inner = self.unary()
            return -inner if val == "-" else inner
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, col = self.peek()
        if kind == "op" and val == "^":
            self.take()
            sign = 1
            kind, val, col = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                sign = -1 if val == "-" else 1
                kind, val, col = self.peek()
            if kind != "num" or val[1] or not val[0].isdigit():
                raise ExprSyntaxError("exponent must be an integer", col)
            self.take()
            k = sign * int(val[0])
            if k < 0 and base.is_zero():
                raise ExprSyntaxError("negative power of zero", col)
            return base ** k
        return base

    def atom(self) -> Expr:
        kind, val, col = self.take()
        if kind == "num":
            text, imag = val
            c = Coeff(0, Fraction(text)) if imag else Coeff(Fraction(text), 0)
            return const(c)
        if kind == "name":
            if val == "i":
                return I
            if val in ("exp", "conj"):
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return exp(inner) if val == "exp" else conj_expr(inner)
            return self.variable(val, col)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", col)
        raise ExprSyntaxError(f"unexpected token {val!r}", col)

    def variable(self, name: str, col: int) -> Expr:
        if self.names is not None:
            if name in self.names:
                return var(self.names.index(name))
            if name.startswith("conj_") and name[5:] in self.names:
                return var(self.names.index(name[5:]), True)
            raise ExprSyntaxError(f"unknown variable {name!r}", col)
        mt = re.fullmatch(r"(zb|z)(\d+)", name)
        if mt is None:
            raise ExprSyntaxError(f"unknown variable {name!r}", col)
        idx = int(mt.group(2))
        if idx < 1 or idx > self.n:
            raise ExprSyntaxError(f"variable {name!r} out of range 1..{self.n}", col)
        return var(idx - 1, mt.group(1) == "zb")


def parse(text: str, n: int, names=None) -> Expr:
    """Parse ``text`` into a normalized expression in ``n`` complex variables.

    ``names`` optionally replaces the ``z1..zn`` naming with a custom list of
    holomorphic variable names (``conj_<name>`` gives the conjugate).
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    return _Parser(text, n, list(names) if names is not None else None).parse()


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class Point:
    """Evaluation site: chart id plus complex coordinates."""

    chart: str
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(complex(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=complex)


class _Evaluator:
    """Vectorized evaluation with a memo shared across expressions."""

    def __init__(self, z: np.ndarray):
        self.z = z
        self.zb = np.conj(z)
        self.atom_cache: dict = {}
        self.pow_cache: dict = {}
        self.shape = z.shape[:-1]

    def atom(self, a):
        got = self.atom_cache.get(a)
        if got is not None:
            return got
        if isinstance(a, Var):
            if a.index >= self.z.shape[-1]:
                raise ValueError(f"point does not bind variable {a}")
            v = self.zb[..., a.index] if a.bar else self.z[..., a.index]
        elif isinstance(a, ExpAtom):
            with np.errstate(over="ignore", invalid="ignore"):
                v = np.exp(self.expr(a.arg))
        else:
            v = self.expr(a.base)
        self.atom_cache[a] = v
        return v

    def power(self, a, k: int):
        if k == 1:
            return self.atom(a)
        key = (a, k)
        got = self.pow_cache.get(key)
        if got is not None:
            return got
        base = self.atom(a)
        if k < 0:
            if np.any(base == 0):
                raise SingularEvaluationError(f"{a} vanishes at an evaluation point")
            with np.errstate(over="ignore", invalid="ignore"):
                v = 1.0 / base if k == -1 else (1.0 / base) ** (-k)
        else:
            with np.errstate(over="ignore", invalid="ignore"):
                v = base ** k
        self.pow_cache[key] = v
        return v

    def expr(self, e: Expr):
        out = np.zeros(self.shape, dtype=complex)
        for m, c in e.terms:
            t = complex(c)
            if not m:
                out = out + t
                continue
            prod = None
            for a, k in m:
                p = self.power(a, k)
                prod = p if prod is None else prod * p
            out = out + t * prod
        return out


def evaluate(exprs, z, check: bool = True):
    """Evaluate one expression or a list of expressions at points ``z``.

    ``z`` has shape ``(..., n)``; conjugate variables are bound to
    ``conj(z)`` automatically.  Returns arrays of shape ``z.shape[:-1]``.
    """
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        raise ValueError("z must have a trailing coordinate axis")
    ev = _Evaluator(z)
    single = isinstance(exprs, Expr)
    seq = [exprs] if single else list(exprs)
    vals = [ev.expr(e) for e in seq]
    if check:
        for v in vals:
            if not np.all(np.isfinite(v)):
                raise EvaluationOverflowError("evaluation produced a non-finite value")
    return vals[0] if single else vals


def eval_expr(e: Expr, p: Point) -> complex:
    """Evaluate at a single :class:`Point`."""
    return complex(evaluate(e, p.array()))


def fd_wirtinger(e: Expr, i: int, z, bar: bool = False, h: float = 1e-5) -> complex:
    """Central-difference Wirtinger derivative of ``e`` at the point ``z``."""
    z = np.asarray(z, dtype=complex)
    step = np.zeros_like(z)
    step[i] = h
    fx = (evaluate(e, z + step) - evaluate(e, z - step)) / (2 * h)
    fy = (evaluate(e, z + 1j * step) - evaluate(e, z - 1j * step)) / (2 * h)
    if bar:
        return complex(0.5 * (fx + 1j * fy))
    return complex(0.5 * (fx - 1j * fy))
