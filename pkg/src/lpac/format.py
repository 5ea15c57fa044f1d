"""Proof, axiom and target file syntax.

One statement per ``;``, ``#`` starts a comment::

    A <idx>, <poly> ;                                   axiom
    D <idx> ;                                           deletion
    L <idx>, <poly>, (<poly>)*<idx> {, (<poly>)*<idx>} ;  linear combination
    E <idx>, <var>, <poly> ;                            extension
    N <pid> { inputs [..] steps [..] outputs [..] } ;   pattern definition
    U <pid> { fresh [..] map [..] in [..] out [..] } ;  pattern application

Parsing is lazy: ``iter_steps`` yields steps as soon as their terminating
``;`` is read, so a checker can consume a file while it is being parsed.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Union

from .errors import (
    DuplicateKeywordError,
    ParseError,
    ProofSyntaxError,
    Span,
    UnterminatedBlockError,
)
from .polyalg import (
    Const,
    Polynomial,
    Power,
    Product,
    Sum,
    VarRef,
    format_polynomial,
    normalize,
)

# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Axiom:
    index: str
    poly: Polynomial
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Deletion:
    index: str
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class LinComb:
    index: str
    operands: tuple
    coeffs: tuple
    conclusion: Polynomial
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ext:
    index: str
    var: str
    poly: Polynomial
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PatternNew:
    pid: str
    inputs: tuple  # ((local index, Polynomial), ...)
    body: tuple  # LinComb / Ext / Deletion over local indices
    outputs: tuple  # (local index, ...)
    span: Span | None = field(default=None, compare=False, repr=False)

    @property
    def index(self) -> str:
        return self.pid


@dataclass(frozen=True)
class PatternApply:
    pid: str
    fresh: tuple  # (var, ...)
    phi: tuple  # ((var, Polynomial), ...)
    inputs: tuple  # (index, ...)
    outputs: tuple  # ((index, Polynomial), ...)
    span: Span | None = field(default=None, compare=False, repr=False)

    @property
    def index(self) -> str:
        return self.pid

    @property
    def phi_map(self) -> dict:
        return dict(self.phi)


Step = Union[Axiom, Deletion, LinComb, Ext, PatternNew, PatternApply]
BODY_STEPS = (LinComb, Ext, Deletion)


@dataclass(frozen=True)
class FragmentMarker:
    begin: bool
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ProofDocument:
    steps: tuple = ()
    # (start, stop) step positions enclosed by frag-begin/frag-end comments
    fragments: tuple = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


# -- lexer --------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    \s*
    (?:
      (?P<marker>\#\s*frag-(?P<which>begin|end)\s*$)
    | (?P<comment>\#.*)
    | (?P<num>\d+)
    | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>->|[,;:()\[\]{}*+\-/^])
    )
    """,
    re.VERBOSE,
)

EOF = "eof"


def _lex(lines: Iterable[str], source: str | None) -> Iterator[tuple]:
    match = _TOKEN_RE.match
    lineno, line = 1, ""
    for lineno, line in enumerate(lines, 1):
        pos = 0
        while True:
            m = match(line, pos)
            if m is None:
                rest = line[pos:]
                if rest.strip():
                    col = pos + len(rest) - len(rest.lstrip()) + 1
                    raise ProofSyntaxError(
                        f"unexpected character {line[col - 1]!r}", Span(lineno, col, source=source)
                    )
                break
            kind = m.lastgroup
            if kind == "marker":
                yield (kind, m.group("which"), lineno, m.start(kind) + 1)
            elif kind != "comment":
                yield (kind, m.group(kind), lineno, m.start(kind) + 1)
            pos = m.end()
    # end of input is reported at the end of the last line
    yield (EOF, "", lineno, len(line.rstrip("\n")) + 1)


def _lines(source: Union[str, Iterable[str]]) -> Iterable[str]:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


# -- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, source: Union[str, Iterable[str]], name: str | None = None):
        self.name = name
        self._tokens = _lex(_lines(source), name)
        self.tok = next(self._tokens)
        self._blocks: list = []  # open brackets, for unterminated-block reports

    # token helpers

    def span(self, tok=None) -> Span:
        tok = tok or self.tok
        return Span(tok[2], tok[3], source=self.name)

    def advance(self) -> tuple:
        tok = self.tok
        self.tok = next(self._tokens)
        return tok

    def error(self, what: str) -> ParseError:
        if self.tok[0] == EOF:
            if self._blocks:
                opener = self._blocks[-1]
                return UnterminatedBlockError(
                    f"unterminated {opener[1]!r} block (expected {what})", self.span(opener)
                )
            return ProofSyntaxError(f"unexpected end of input, expected {what}", self.span())
        return ProofSyntaxError(f"expected {what}, found {self.tok[1]!r}", self.span())

    def accept(self, text: str) -> bool:
        if self.tok[0] == "op" and self.tok[1] == text:
            self.advance()
            return True
        return False

    def expect(self, text: str) -> tuple:
        if self.tok[0] == "op" and self.tok[1] == text:
            return self.advance()
        raise self.error(repr(text))

    def open(self, text: str):
        tok = self.expect(text)
        self._blocks.append(tok)

    def close(self, text: str):
        self.expect(text)
        self._blocks.pop()

    def index(self) -> str:
        if self.tok[0] in ("num", "id"):
            return self.advance()[1]
        raise self.error("an index")

    def ident(self, what: str = "a variable") -> str:
        if self.tok[0] == "id":
            return self.advance()[1]
        raise self.error(what)

    def keyword(self) -> str:
        if self.tok[0] == "id":
            return self.tok[1]
        raise self.error("a keyword")

    # polynomials

    def poly(self) -> Polynomial:
        return normalize(self.expr())

    def expr(self):
        items = []
        sign = 1
        if self.tok[0] == "op" and self.tok[1] in ("+", "-"):
            sign = -1 if self.advance()[1] == "-" else 1
        items.append((sign, self.term()))
        while self.tok[0] == "op" and self.tok[1] in ("+", "-"):
            sign = -1 if self.advance()[1] == "-" else 1
            items.append((sign, self.term()))
        if len(items) == 1 and items[0][0] == 1:
            return items[0][1]
        return Sum(tuple(items))

    def term(self):
        factors = [self.factor()]
        while self.accept("*"):
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self):
        base = self.atom()
        if self.accept("^"):
            if self.tok[0] != "num":
                raise self.error("a natural-number exponent")
            return Power(base, int(self.advance()[1]))
        return base

    def atom(self):
        kind, text = self.tok[0], self.tok[1]
        if kind == "num":
            self.advance()
            if self.accept("/"):
                if self.tok[0] != "num":
                    raise self.error("a denominator")
                den = int(self.advance()[1])
                if den == 0:
                    raise ProofSyntaxError("zero denominator", self.span())
                return Const(Fraction(int(text), den))
            return Const(int(text))
        if kind == "id":
            self.advance()
            return VarRef(text)
        if kind == "op" and text == "(":
            self.open("(")
            e = self.expr()
            self.close(")")
            return e
        raise self.error("a polynomial term")

    # statements

    def statement(self, inner: bool = False) -> Step:
        start = self.tok
        kw = self.ident("a step keyword")
        if inner and kw not in ("L", "E", "D"):
            raise ProofSyntaxError(
                f"only L, E and D steps are allowed in a pattern body, found {kw!r}",
                self.span(start),
            )
        handler = _HANDLERS.get(kw)
        if handler is None:
            raise ProofSyntaxError(f"unknown step keyword {kw!r}", self.span(start))
        fields = handler(self)
        end = self.expect(";")
        span = Span(start[2], start[3], end[2], end[3], self.name)
        return fields(span)

    def _axiom(self):
        i = self.index()
        self.expect(",")
        p = self.poly()
        return lambda span: Axiom(i, p, span)

    def _deletion(self):
        i = self.index()
        return lambda span: Deletion(i, span)

    def _lincomb(self):
        i = self.index()
        self.expect(",")
        concl = self.poly()
        operands, coeffs = [], []
        self.expect(",")
        while True:
            self.open("(")
            coeffs.append(self.poly())
            self.close(")")
            self.expect("*")
            operands.append(self.index())
            if not self.accept(","):
                break
        return lambda span: LinComb(i, tuple(operands), tuple(coeffs), concl, span)

    def _ext(self):
        i = self.index()
        self.expect(",")
        v = self.ident()
        self.expect(",")
        q = self.poly()
        return lambda span: Ext(i, v, q, span)

    def _sections(self, parsers: dict, required: tuple) -> dict:
        self.open("{")
        seen: dict = {}
        while not (self.tok[0] == "op" and self.tok[1] == "}"):
            kw = self.keyword()
            if kw not in parsers:
                raise ProofSyntaxError(
                    f"unknown section {kw!r}, expected one of {', '.join(parsers)}",
                    self.span(),
                )
            if kw in seen:
                raise DuplicateKeywordError(f"section {kw!r} given twice", self.span())
            self.advance()
            self.open("[")
            seen[kw] = parsers[kw]()
            self.close("]")
            if self.tok[0] == EOF:
                raise self.error("'}'")
        for kw in required:
            if kw not in seen:
                raise ProofSyntaxError(f"missing section {kw!r}", self.span())
        self.close("}")
        return seen

    def _list(self, item) -> list:
        out = []
        if self.tok[0] == "op" and self.tok[1] == "]":
            return out
        out.append(item())
        while self.accept(","):
            out.append(item())
        return out

    def _pair(self, sep: str, left, right):
        def go():
            a = left()
            self.expect(sep)
            return (a, right())

        return go

    def _steps(self) -> list:
        body = []
        while not (self.tok[0] == "op" and self.tok[1] == "]"):
            if self.tok[0] == EOF:
                raise self.error("']'")
            body.append(self.statement(inner=True))
        return body

    def _pattern_new(self):
        pid = self.index()
        s = self._sections(
            {
                "inputs": lambda: self._list(self._pair(":", self.index, self.poly)),
                "steps": self._steps,
                "outputs": lambda: self._list(self.index),
            },
            ("inputs", "steps", "outputs"),
        )
        return lambda span: PatternNew(
            pid, tuple(s["inputs"]), tuple(s["steps"]),
            tuple(s["outputs"]), span,
        )

    def _fresh(self) -> list:
        out = []
        while self.tok[0] == "id":
            out.append(self.advance()[1])
            self.accept(",")
        return out

    def _pattern_apply(self):
        pid = self.index()
        start = self.tok
        s = self._sections(
            {
                "fresh": self._fresh,
                "map": lambda: self._list(self._pair("->", self.ident, self.poly)),
                "in": lambda: self._list(self.index),
                "out": lambda: self._list(self._pair(":", self.index, self.poly)),
            },
            ("map", "in", "out"),
        )
        seen: set = set()
        for v, _ in s["map"]:
            if v in seen:
                raise ProofSyntaxError(f"variable {v!r} mapped twice", self.span(start))
            seen.add(v)
        return lambda span: PatternApply(
            pid, tuple(s.get("fresh", ())), tuple(s["map"]), tuple(s["in"]),
            tuple(s["out"]), span,
        )


_HANDLERS = {
    "A": _Parser._axiom,
    "D": _Parser._deletion,
    "L": _Parser._lincomb,
    "E": _Parser._ext,
    "N": _Parser._pattern_new,
    "U": _Parser._pattern_apply,
}


# -- public parsing API ---------------------------------------------------------


def iter_items(source: Union[str, Iterable[str]], name: str | None = None):
    """Yield steps and FragmentMarker objects in file order."""
    p = _Parser(source, name)
    while p.tok[0] != EOF:
        if p.tok[0] == "marker":
            tok = p.advance()
            yield FragmentMarker(tok[1] == "begin", p.span(tok))
            continue
        yield p.statement()


def iter_steps(source: Union[str, Iterable[str]], name: str | None = None) -> Iterator[Step]:
    for item in iter_items(source, name):
        if not isinstance(item, FragmentMarker):
            yield item


def parse_proof(source: Union[str, Iterable[str]], name: str | None = None) -> ProofDocument:
    steps: list = []
    fragments: list = []
    open_at: int | None = None
    open_span = None
    for item in iter_items(source, name):
        if isinstance(item, FragmentMarker):
            if item.begin:
                if open_at is not None:
                    raise ProofSyntaxError("nested frag-begin", item.span)
                open_at, open_span = len(steps), item.span
            else:
                if open_at is None:
                    raise ProofSyntaxError("frag-end without frag-begin", item.span)
                if len(steps) > open_at:
                    fragments.append((open_at, len(steps)))
                open_at = None
        else:
            steps.append(item)
    if open_at is not None:
        raise UnterminatedBlockError("frag-begin without frag-end", open_span)
    return ProofDocument(tuple(steps), tuple(fragments))


def parse_axioms(source: Union[str, Iterable[str]], name: str | None = None) -> ProofDocument:
    doc = parse_proof(source, name)
    for s in doc.steps:
        if not isinstance(s, Axiom):
            raise ProofSyntaxError("axiom files may only contain A steps", s.span)
    return doc


def parse_polynomial(text: str) -> Polynomial:
    p = _Parser(text)
    poly = p.poly()
    if p.tok[0] != EOF:
        raise p.error("end of polynomial")
    return poly


def parse_expression(text: str):
    """Parse without reducing; returns the raw expression tree."""
    p = _Parser(text)
    e = p.expr()
    if p.tok[0] != EOF:
        raise p.error("end of expression")
    return e


def parse_target(source: Union[str, Iterable[str]], name: str | None = None) -> Polynomial:
    p = _Parser(source, name)
    poly = p.poly()
    p.expect(";")
    if p.tok[0] != EOF:
        raise p.error("end of target file")
    return poly


# -- serialization ---------------------------------------------------------------


def format_step(step: Step) -> str:
    fp = format_polynomial
    if isinstance(step, Axiom):
        return f"A {step.index}, {fp(step.poly)} ;"
    if isinstance(step, Deletion):
        return f"D {step.index} ;"
    if isinstance(step, LinComb):
        combo = ", ".join(f"({fp(q)})*{j}" for q, j in zip(step.coeffs, step.operands))
        return f"L {step.index}, {fp(step.conclusion)}, {combo} ;"
    if isinstance(step, Ext):
        return f"E {step.index}, {step.var}, {fp(step.poly)} ;"
    if isinstance(step, PatternNew):
        inputs = ", ".join(f"{i} : {fp(p)}" for i, p in step.inputs)
        body = " ".join(format_step(s) for s in step.body)
        outputs = ", ".join(step.outputs)
        return (
            f"N {step.pid} {{ inputs [ {inputs} ] steps [ {body} ] "
            f"outputs [ {outputs} ] }} ;"
        ).replace("[  ]", "[ ]")
    if isinstance(step, PatternApply):
        fresh = " ".join(step.fresh)
        phi = ", ".join(f"{v} -> {fp(p)}" for v, p in step.phi)
        ins = ", ".join(step.inputs)
        outs = ", ".join(f"{k} : {fp(p)}" for k, p in step.outputs)
        return (
            f"U {step.pid} {{ fresh [ {fresh} ] map [ {phi} ] in [ {ins} ] "
            f"out [ {outs} ] }} ;"
        ).replace("[  ]", "[ ]")
    raise TypeError(f"not a step: {step!r}")


def serialize(doc: ProofDocument | Iterable[Step]) -> str:
    """Canonical text, one step per line."""
    if not isinstance(doc, ProofDocument):
        doc = ProofDocument(tuple(doc))
    begins = {a for a, _ in doc.fragments}
    ends: dict = {}
    for _, b in doc.fragments:
        ends[b] = ends.get(b, 0) + 1
    lines = []
    for pos, step in enumerate(doc.steps):
        lines.extend(["# frag-end"] * ends.get(pos, 0))
        if pos in begins:
            lines.append("# frag-begin")
        lines.append(format_step(step))
    lines.extend(["# frag-end"] * ends.get(len(doc.steps), 0))
    return "".join(line + "\n" for line in lines)


def format_target(p: Polynomial) -> str:
    return f"{format_polynomial(p)} ;\n"
