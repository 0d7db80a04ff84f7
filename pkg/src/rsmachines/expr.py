"""Exact multivariate polynomials over named symbols.

Coefficients are :class:`fractions.Fraction`. A polynomial is kept in
canonical form: no zero coefficients, no zero exponents, and monomials sorted
in graded-lexicographic order (highest degree first). Structural equality is
therefore the same as polynomial equality.

Text syntax (used by model files)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)?
    atom   := NUMBER | NAME | '(' expr ')'

so ``-x^2`` is ``-(x^2)``.

``NUMBER`` is a decimal (``0.5``, ``1e-3``) or a rational literal (``3/4``);
``NAME`` starts with a letter or underscore and may contain letters, digits,
underscores and dots (``fg.e``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .finset import FinSet

Powers = tuple[tuple[str, int], ...]
Number = Union[int, float, Fraction]

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")


class ParseError(ValueError):
    def __init__(self, text: str, pos: int, message: str):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos} in {text!r}")


class UnboundName(KeyError):
    pass


def _order_key(powers: Powers):
    return (-sum(e for _, e in powers), tuple((n, -e) for n, e in powers))


def _mul_powers(a: Powers, b: Powers) -> Powers:
    out = dict(a)
    for n, e in b:
        out[n] = out.get(n, 0) + e
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class Monomial:
    coefficient: Fraction
    powers: Powers

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.powers)


class Polynomial:
    """An immutable polynomial in canonical form."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Powers, Number] | Iterable[tuple[Powers, Number]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Powers, Fraction] = {}
        for powers, c in items:
            key = tuple(sorted((n, int(e)) for n, e in powers if e != 0))
            if any(e < 0 for _, e in key):
                raise ValueError(f"negative exponent in {key}")
            acc[key] = acc.get(key, Fraction(0)) + Fraction(c)
        ordered = sorted((k for k, c in acc.items() if c != 0), key=_order_key)
        object.__setattr__(self, "_terms", tuple((k, acc[k]) for k in ordered))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def var(cls, name: str) -> Polynomial:
        return cls({((name, 1),): 1})

    @classmethod
    def const(cls, c: Number) -> Polynomial:
        return cls({(): c})

    @property
    def monomials(self) -> tuple[Monomial, ...]:
        return tuple(Monomial(c, p) for p, c in self._terms)

    def terms(self) -> tuple[tuple[Powers, Fraction], ...]:
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def names(self) -> set[str]:
        return {n for p, _ in self._terms for n, _ in p}

    def degree(self) -> int:
        return max((sum(e for _, e in p) for p, _ in self._terms), default=0)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self._terms))
        return self._hash

    def __add__(self, other) -> Polynomial:
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Polynomial(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial((p, -c) for p, c in self._terms)

    def __sub__(self, other) -> Polynomial:
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> Polynomial:
        return (-self) + other

    def __mul__(self, other) -> Polynomial:
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Polynomial(
            (_mul_powers(p, q), c * d) for p, c in self._terms for q, d in other._terms
        )

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Polynomial:
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        out = Polynomial.const(1)
        for _ in range(k):
            out = out * self
        return out

    def substitute(self, s: Mapping[str, Polynomial]) -> Polynomial:
        """Simultaneous substitution; names outside ``s`` pass through."""
        out: list[tuple[Powers, Fraction]] = []
        result = Polynomial()
        for powers, c in self._terms:
            if not any(n in s for n, _ in powers):
                out.append((powers, c))
                continue
            kept = tuple((n, e) for n, e in powers if n not in s)
            term = Polynomial({kept: c})
            for n, e in powers:
                if n in s:
                    term = term * (s[n] ** e)
            result = result + term
        return result + Polynomial(out)

    def rename(self, mapping: Mapping[str, str]) -> Polynomial:
        # two names may land on one, so exponents are merged
        def merged(powers):
            acc: dict[str, int] = {}
            for n, e in powers:
                m = mapping.get(n, n)
                acc[m] = acc.get(m, 0) + e
            return tuple(acc.items())

        return Polynomial((merged(p), c) for p, c in self._terms)

    def evaluate(self, point: Mapping[str, Number], params: Mapping[str, Number] | None = None) -> float:
        """Float value at ``point`` (parameters may be passed separately).

        Terms are summed in canonical order.
        """
        env = dict(params or {})
        env.update(point)
        total = 0.0
        for powers, c in self._terms:
            term = float(c)
            for n, e in powers:
                try:
                    v = env[n]
                except KeyError:
                    raise UnboundName(n) from None
                term *= float(v) ** e
            total += term
        return total

    def evaluate_exact(self, point: Mapping[str, Number]) -> Fraction:
        total = Fraction(0)
        for powers, c in self._terms:
            term = c
            for n, e in powers:
                if n not in point:
                    raise UnboundName(n)
                term *= Fraction(point[n]) ** e
            total += term
        return total

    def to_text(self, first: Iterable[str] = ()) -> str:
        """Canonical text. Names in ``first`` lead each monomial, in the
        given order; the rest follow sorted."""
        if not self._terms:
            return "0"
        rank = {n: k for k, n in enumerate(first)}

        def factor_key(item):
            n = item[0]
            return (0, rank[n], n) if n in rank else (1, 0, n)

        pieces = []
        for powers, c in self._terms:
            factors = [n if e == 1 else f"{n}^{e}" for n, e in sorted(powers, key=factor_key)]
            mag = abs(c)
            coeff = "" if mag == 1 and factors else _fmt_fraction(mag)
            body = "*".join(([coeff] if coeff else []) + factors)
            pieces.append(("-" if c < 0 else "+", body))
        sign, body = pieces[0]
        text = ("-" if sign == "-" else "") + body
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()!r})"


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _coerce(x):
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, Fraction)):
        return Polynomial.const(x)
    if isinstance(x, float):
        return Polynomial.const(Fraction(x))
    return NotImplemented


ZERO = Polynomial()
ONE = Polynomial.const(1)


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def substitute(p: Polynomial, s: Mapping[str, Polynomial]) -> Polynomial:
    return p.substitute(s)


def evaluate(p: Polynomial, point: Mapping[str, Number], params: Mapping[str, Number] | None = None) -> float:
    return p.evaluate(point, params)


def equals(p: Polynomial, q: Polynomial) -> bool:
    return p == q


@dataclass(frozen=True)
class PolyMap:
    """A polynomial map: one component over ``dom_vars`` (plus parameters)
    for each element of ``cod_vars``."""

    dom_vars: FinSet
    cod_vars: FinSet
    components: Mapping[str, Polynomial]
    params: frozenset = frozenset()

    def __post_init__(self):
        if set(self.components) != set(self.cod_vars):
            raise ValueError(
                f"components {sorted(self.components)} do not match {list(self.cod_vars)}"
            )
        allowed = set(self.dom_vars) | set(self.params)
        for k, poly in self.components.items():
            stray = poly.names() - allowed
            if stray:
                raise ValueError(f"component {k!r} uses unknown names {sorted(stray)}")

    def __getitem__(self, key: str) -> Polynomial:
        return self.components[key]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyMap):
            return NotImplemented
        return (
            self.dom_vars == other.dom_vars
            and self.cod_vars == other.cod_vars
            and dict(self.components) == dict(other.components)
        )

    def __hash__(self) -> int:
        return hash((self.dom_vars, self.cod_vars))


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+/\d+|\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_.]*)|(?P<op>[-+*^()]))"
)


_SPACE = re.compile(r"\s*")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        start = _SPACE.match(text, pos).end()
        if start == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(text, start, "unexpected character")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self, value=None):
        tok = self.tokens[self.k]
        if value is not None and tok[1] != value:
            raise ParseError(self.text, tok[2], f"expected {value!r}")
        self.k += 1
        return tok

    def expr(self) -> Polynomial:
        out = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> Polynomial:
        out = self.unary()
        while self.peek()[1] == "*":
            self.take()
            out = out * self.unary()
        return out

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, value, pos = self.take()
            if kind != "num" or not value.isdigit():
                raise ParseError(self.text, pos, "exponent must be a non-negative integer")
            base = base ** int(value)
        return base

    def unary(self) -> Polynomial:
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        return self.power()

    def atom(self) -> Polynomial:
        kind, value, pos = self.take()
        if kind == "num":
            return Polynomial.const(Fraction(value))
        if kind == "name":
            return Polynomial.var(value)
        if value == "(":
            inner = self.expr()
            self.take(")")
            return inner
        raise ParseError(self.text, pos, f"unexpected {value or 'end of input'!r}")


def parse(text: str) -> Polynomial:
    if not isinstance(text, str):
        raise ParseError(str(text), 0, "polynomial must be text")
    p = _Parser(text)
    out = p.expr()
    kind, value, pos = p.peek()
    if kind != "end":
        raise ParseError(text, pos, f"unexpected {value!r}")
    return out
