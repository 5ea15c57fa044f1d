"""Exact multilinear polynomial arithmetic over the rationals.

Every variable is Boolean, so ``x**2 == x`` holds implicitly and every value
is kept in multilinear normal form: a monomial is a strictly increasing tuple
of variable names and each coefficient is a nonzero ``int`` or ``Fraction``.

Canonical term order is graded (higher degree first), ties broken by the
lexicographic order of the variable tuple.  Two polynomials are congruent
modulo the Boolean axioms iff their term dictionaries are equal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

Coeff = Union[int, Fraction]
Monomial = tuple  # tuple[str, ...], strictly increasing

VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class UnmappedVariable(KeyError):
    """A variable has no image under a substitution or assignment."""

    def __init__(self, var: str):
        super().__init__(var)
        self.var = var

    def __str__(self) -> str:
        return f"variable {self.var!r} is not mapped"


def _canon(c: Coeff) -> Coeff:
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    if a == b:
        return a
    return tuple(sorted(set(a).union(b)))


def _term_key(mono: Monomial):
    return (-len(mono), mono)


class Polynomial:
    """Immutable polynomial in multilinear normal form."""

    __slots__ = ("_terms", "_hash", "_sorted")

    def __init__(self, terms: Mapping[Monomial, Coeff] | None = None):
        # Callers must pass a dict that is already reduced; use from_terms otherwise.
        self._terms: dict = dict(terms) if terms else {}
        self._hash = None
        self._sorted = None

    @classmethod
    def _wrap(cls, terms: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        p._sorted = None
        return p

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Coeff, Iterable[str]]]) -> "Polynomial":
        """Build from ``(coefficient, variables)`` pairs, reducing as needed."""
        acc: dict = {}
        for c, vs in terms:
            if c == 0:
                continue
            mono = tuple(sorted(set(vs)))
            v = acc.get(mono, 0) + c
            if v == 0:
                acc.pop(mono, None)
            else:
                acc[mono] = _canon(v)
        return cls._wrap(acc)

    @classmethod
    def const(cls, c: Coeff) -> "Polynomial":
        c = _canon(Fraction(c) if isinstance(c, Fraction) else c)
        return cls._wrap({(): c} if c != 0 else {})

    @classmethod
    def var(cls, name: str) -> "Polynomial":
        return cls._wrap({(name,): 1})

    # -- inspection -----------------------------------------------------------

    @property
    def terms(self) -> tuple:
        """``(coefficient, monomial)`` pairs in canonical order."""
        if self._sorted is None:
            self._sorted = tuple(
                (self._terms[m], m) for m in sorted(self._terms, key=_term_key)
            )
        return self._sorted

    def coefficient(self, mono: Iterable[str]) -> Coeff:
        return self._terms.get(tuple(sorted(set(mono))), 0)

    def variables(self) -> frozenset:
        out: set = set()
        for m in self._terms:
            out.update(m)
        return frozenset(out)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    def as_variable(self) -> str | None:
        """The variable name if this polynomial is exactly ``1*v``."""
        if len(self._terms) == 1:
            (m, c), = self._terms.items()
            if len(m) == 1 and c == 1:
                return m[0]
        return None

    def degree(self) -> int:
        return max((len(m) for m in self._terms), default=0)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({(): other} if other != 0 else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    # -- arithmetic -----------------------------------------------------------

    @staticmethod
    def _coerce(x) -> "Polynomial":
        if isinstance(x, Polynomial):
            return x
        if isinstance(x, (int, Fraction)):
            return Polynomial.const(x)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(_axpy(dict(self._terms), 1, other._terms))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(_axpy(dict(self._terms), -1, other._terms))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return self._wrap({m: -c for m, c in self._terms.items()})

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(_mul(self._terms, other._terms))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a natural number")
        result = Polynomial.const(1)
        for _ in range(e):
            result = result * self
        return result

    def scale(self, c: Coeff) -> "Polynomial":
        if c == 0:
            return Polynomial()
        return self._wrap({m: _canon(v * c) for m, v in self._terms.items()})

    # -- text -----------------------------------------------------------------

    def __str__(self) -> str:
        return format_polynomial(self)

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)!r})"


ZERO = Polynomial()
ONE = Polynomial.const(1)


def _axpy(acc: dict, c: Coeff, terms: Mapping) -> dict:
    """acc += c * terms, in place."""
    for m, v in terms.items():
        s = acc.get(m, 0) + c * v
        if s == 0:
            acc.pop(m, None)
        else:
            acc[m] = _canon(s)
    return acc


def _mul(a: Mapping, b: Mapping) -> dict:
    if len(a) > len(b):
        a, b = b, a
    acc: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _mono_mul(ma, mb)
            s = acc.get(m, 0) + ca * cb
            if s == 0:
                del acc[m]
            else:
                acc[m] = _canon(s)
    return acc


def _fmt_coeff(c: Coeff) -> str:
    if type(c) is Fraction:
        return f"{c.numerator}/{c.denominator}"
    return str(c)


def format_polynomial(p: Polynomial) -> str:
    """Canonical text: explicit ``*``, no ``^``, no spaces, ``0`` for zero."""
    if not p._terms:
        return "0"
    parts = []
    for i, (c, m) in enumerate(p.terms):
        neg = c < 0
        a = -c if neg else c
        if m:
            body = "*".join(m) if a == 1 else _fmt_coeff(a) + "*" + "*".join(m)
        else:
            body = _fmt_coeff(a)
        if i == 0:
            parts.append("-" + body if neg else body)
        else:
            parts.append(("-" if neg else "+") + body)
    return "".join(parts)


# -- raw expression trees -----------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Coeff


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Sum:
    items: tuple  # tuple[(sign: int, expr)]


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int


Expr = Union[Const, VarRef, Sum, Product, Power, Polynomial]


def normalize(expr: Expr) -> Polynomial:
    """Reduce an expression tree to its multilinear normal form."""
    if isinstance(expr, Polynomial):
        return expr
    if isinstance(expr, Const):
        return Polynomial.const(expr.value)
    if isinstance(expr, VarRef):
        return Polynomial.var(expr.name)
    if isinstance(expr, Sum):
        acc: dict = {}
        for sign, item in expr.items:
            _axpy(acc, sign, normalize(item)._terms)
        return Polynomial._wrap(acc)
    if isinstance(expr, Product):
        acc = {(): 1}
        for f in expr.factors:
            acc = _mul(acc, normalize(f)._terms)
            if not acc:
                break
        return Polynomial._wrap(acc)
    if isinstance(expr, Power):
        base = normalize(expr.base)
        if expr.exponent == 0:
            return ONE
        # x^e == x for Boolean x; general bases still need the product.
        if base.as_variable() is not None:
            return base
        return base ** expr.exponent
    raise TypeError(f"not an expression: {expr!r}")


def eval_expr(expr: Expr, assignment: Mapping[str, Coeff]) -> Fraction:
    """Evaluate an expression tree with true exponents (no Boolean reduction)."""
    if isinstance(expr, Polynomial):
        return evaluate(expr, assignment)
    if isinstance(expr, Const):
        return Fraction(expr.value)
    if isinstance(expr, VarRef):
        try:
            return Fraction(assignment[expr.name])
        except KeyError:
            raise UnmappedVariable(expr.name) from None
    if isinstance(expr, Sum):
        return sum((sign * eval_expr(e, assignment) for sign, e in expr.items), Fraction(0))
    if isinstance(expr, Product):
        r = Fraction(1)
        for f in expr.factors:
            r *= eval_expr(f, assignment)
        return r
    if isinstance(expr, Power):
        return eval_expr(expr.base, assignment) ** expr.exponent
    raise TypeError(f"not an expression: {expr!r}")


# -- operations on normal forms -----------------------------------------------


def linear_combination(parts: Iterable[tuple[Polynomial, Polynomial]]) -> Polynomial:
    """Normal form of ``sum(coeff * operand for coeff, operand in parts)``."""
    acc: dict = {}
    seen = False
    for coeff, operand in parts:
        seen = True
        ct, ot = coeff._terms, operand._terms
        if not ct or not ot:
            continue
        if len(ct) == 1 and () in ct:
            _axpy(acc, ct[()], ot)
        else:
            _axpy(acc, 1, _mul(ct, ot))
    if not seen:
        raise ValueError("linear combination needs at least one part")
    return Polynomial._wrap(acc)


def substitute(p: Polynomial, phi: Mapping[str, Polynomial]) -> Polynomial:
    """Replace each variable of ``p`` by its image under ``phi`` and reduce.

    Raises UnmappedVariable for a variable of ``p`` outside the domain.
    """
    acc: dict = {}
    for mono, c in p._terms.items():
        prod: dict = {(): c}
        for v in mono:
            try:
                img = phi[v]
            except KeyError:
                raise UnmappedVariable(v) from None
            prod = _mul(prod, img._terms)
            if not prod:
                break
        _axpy(acc, 1, prod)
    return Polynomial._wrap(acc)


def rename(p: Polynomial, mapping: Mapping[str, str]) -> Polynomial:
    """Apply an injective variable renaming; unmapped variables are kept."""
    return Polynomial._wrap(
        {tuple(sorted(mapping.get(v, v) for v in m)): c for m, c in p._terms.items()}
    )


def is_boolean_valued(q: Polynomial, ambient: Iterable[str] | None = None) -> bool:
    """True iff ``q*q - q`` vanishes modulo the Boolean axioms."""
    if ambient is not None and not q.variables() <= frozenset(ambient):
        raise ValueError("polynomial mentions variables outside the ambient set")
    t = q._terms
    if not t:
        return True
    if len(t) == 1:
        # c*m is Boolean iff c in {0, 1}
        (c,) = t.values()
        return c == 1
    if len(t) == 2 and t.get(()) == 1:
        # 1 - m is the negation of a 0/1 monomial
        (c,) = (c for m, c in t.items() if m)
        if c == -1:
            return True
    return (q * q - q).is_zero()


def equal_mod_boolean(p: Polynomial, q: Polynomial) -> bool:
    return p._terms == q._terms


def evaluate(p: Polynomial, assignment: Mapping[str, Coeff]) -> Fraction:
    """Exact value of ``p`` at a point."""
    total = Fraction(0)
    for mono, c in p._terms.items():
        t = Fraction(c)
        for v in mono:
            try:
                t *= assignment[v]
            except KeyError:
                raise UnmappedVariable(v) from None
        total += t
    return total
