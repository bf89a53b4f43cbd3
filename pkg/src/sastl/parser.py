"""Recursive-descent parser for the textual SaSTL grammar.

Grammar (lowest to highest precedence)::

    formula   := or_expr ('->' formula)?
    or_expr   := and_expr ('or' and_expr)*
    and_expr  := until_expr ('and' until_expr)*
    until_expr:= prefix ('until' interval until_expr)?
    prefix    := 'not' prefix
               | ('always' | 'eventually') interval prefix
               | ('everywhere' | 'somewhere') '(' band ',' label ')' prefix
               | atom
    atom      := 'true' | 'false' | '(' formula ')'
               | IDENT cmp NUMBER
               | 'agg' '(' op ',' band ',' label ')' '(' IDENT ')' cmp NUMBER
               | 'count' '(' op ',' band ',' label ')' '(' formula ')' cmp NUMBER
    interval  := '[' NUMBER ',' NUMBER ']'
    band      := '[' NUMBER ',' (NUMBER | 'inf') ']'
    label     := label_and ('or' label_and)*
    label_and := label_not ('and' label_not)*
    label_not := 'not' label_not | 'true' | IDENT | '(' label ')'
    cmp       := '<' | '<=' | '>' | '>=' | '==' | '=' | '!='
    op        := 'max' | 'min' | 'sum' | 'avg'

Derived forms are lowered while parsing, so the result only contains the
core node types of :mod:`sastl.formula`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import formula as F
from .errors import ParseError
from .spatial import INF, AnyLabel, LabelNot, LabelOr, Prop, SpatialDomain, label_and

KEYWORDS = {
    "and", "or", "not", "true", "false", "until", "always", "eventually",
    "everywhere", "somewhere", "agg", "count", "inf",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<cmp><=|>=|==|!=|<|>|=)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\],])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # 'ident', 'kw', 'number', 'cmp', 'punct', 'arrow', 'eof'
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            word = m.group()
            if kind == "ident" and word in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, word, pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, line_offset: int = 0):
        self.text = text
        self.line_offset = line_offset
        self.tokens = tokenize_at(text, line_offset)
        self.i = 0

    # -- token helpers --

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message, expected=(), tok=None):
        tok = tok or self.tok
        return ParseError(message, self.text, tok.pos, expected, self.line_offset)

    def at(self, text) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("kw", "punct", "arrow")

    def accept(self, text) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"unexpected {found!r}", (repr(text),))
        tok = self.tok
        self.i += 1
        return tok

    def number(self, allow_inf=False) -> float:
        t = self.tok
        if t.kind == "number":
            self.i += 1
            return float(t.text)
        if allow_inf and t.kind == "kw" and t.text == "inf":
            self.i += 1
            return INF
        expected = ("number", "'inf'") if allow_inf else ("number",)
        raise self.error(f"unexpected {t.text or 'end of input'!r}", expected)

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"unexpected {t.text or 'end of input'!r}", ("identifier",))
        self.i += 1
        return t.text

    def comparator(self) -> str:
        t = self.tok
        if t.kind != "cmp":
            raise self.error(f"unexpected {t.text or 'end of input'!r}", ("comparator",))
        self.i += 1
        return "==" if t.text == "=" else t.text

    # -- grammar --

    def parse(self):
        phi = self.formula()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}", ("'and'", "'or'", "'->'", "'until'", "end of input"))
        return phi

    def formula(self):
        left = self.or_expr()
        if self.accept("->"):
            return F.implies(left, self.formula())
        return left

    def or_expr(self):
        left = self.and_expr()
        while self.accept("or"):
            left = F.lor(left, self.and_expr())
        return left

    def and_expr(self):
        left = self.until_expr()
        while self.accept("and"):
            left = F.And(left, self.until_expr())
        return left

    def until_expr(self):
        left = self.prefix()
        if self.at("until"):
            self.i += 1
            lo, hi = self.interval()
            return F.Until(left, self.until_expr(), lo, hi)
        return left

    def prefix(self):
        if self.accept("not"):
            return F.Not(self.prefix())
        if self.at("always") or self.at("eventually"):
            which = self.tok.text
            self.i += 1
            lo, hi = self.interval()
            arg = self.prefix()
            return F.always(lo, hi, arg) if which == "always" else F.eventually(lo, hi, arg)
        if self.at("everywhere") or self.at("somewhere"):
            which = self.tok.text
            self.i += 1
            self.expect("(")
            domain = self.domain_tail()
            arg = self.prefix()
            return F.everywhere(domain, arg) if which == "everywhere" else F.somewhere(domain, arg)
        return self.atom()

    def atom(self):
        t = self.tok
        if self.accept("true"):
            return F.TRUE
        if self.accept("false"):
            return F.FALSE
        if self.accept("("):
            phi = self.formula()
            self.expect(")")
            return phi
        if self.accept("agg"):
            self.expect("(")
            op = self.agg_op()
            self.expect(",")
            domain = self.domain_tail()
            self.expect("(")
            var = self.ident()
            self.expect(")")
            cmp = self.comparator()
            return F.Aggregate(op, domain, var, cmp, self.number())
        if self.accept("count"):
            self.expect("(")
            op = self.agg_op()
            self.expect(",")
            domain = self.domain_tail()
            self.expect("(")
            arg = self.formula()
            self.expect(")")
            cmp = self.comparator()
            return F.Count(op, domain, arg, cmp, self.number())
        if t.kind == "ident":
            self.i += 1
            cmp = self.comparator()
            return F.Atomic(t.text, cmp, self.number())
        raise self.error(
            f"unexpected {t.text or 'end of input'!r}",
            ("identifier", "'true'", "'false'", "'('", "'not'", "'always'", "'eventually'",
             "'everywhere'", "'somewhere'", "'agg'", "'count'"),
        )

    def agg_op(self) -> str:
        t = self.tok
        if t.kind == "ident" and t.text in F.AGG_OPS:
            self.i += 1
            return t.text
        if t.kind in ("ident", "kw"):
            raise self.error(f"unknown aggregation op {t.text!r}", tuple(repr(o) for o in F.AGG_OPS))
        raise self.error(f"unexpected {t.text or 'end of input'!r}", tuple(repr(o) for o in F.AGG_OPS))

    def interval(self) -> tuple[float, float]:
        start = self.expect("[")
        lo = self.number()
        self.expect(",")
        hi = self.number()
        self.expect("]")
        if lo < 0 or lo > hi:
            raise self.error(f"bad time interval [{lo:g}, {hi:g}]", tok=start)
        return lo, hi

    def domain_tail(self) -> SpatialDomain:
        """``band ',' label ')'`` after the opening parenthesis."""
        start = self.expect("[")
        d1 = self.number()
        self.expect(",")
        d2 = self.number(allow_inf=True)
        self.expect("]")
        if d1 < 0 or d1 > d2:
            raise self.error(f"bad distance band [{d1:g}, {d2:g}]", tok=start)
        self.expect(",")
        psi = self.label()
        self.expect(")")
        return SpatialDomain(d1, d2, psi)

    def label(self):
        left = self.label_and()
        while self.accept("or"):
            left = LabelOr(left, self.label_and())
        return left

    def label_and(self):
        left = self.label_not()
        while self.accept("and"):
            left = label_and(left, self.label_not())
        return left

    def label_not(self):
        if self.accept("not"):
            return LabelNot(self.label_not())
        if self.accept("true"):
            return AnyLabel()
        if self.accept("("):
            psi = self.label()
            self.expect(")")
            return psi
        return Prop(self.ident())


def tokenize_at(text: str, line_offset: int) -> list[Token]:
    try:
        return tokenize(text)
    except ParseError as exc:
        raise ParseError(exc.message, text, exc.pos, (), line_offset) from None


def parse(text: str) -> F.Formula:
    """Parse one formula; raises :class:`ParseError` with position info."""
    return _Parser(text).parse()


@dataclass(frozen=True)
class Requirement:
    name: str
    text: str
    formula: F.Formula
    line: int


_REQ_RE = re.compile(r"^\s*([A-Za-z0-9_.\-]+)\s*:(.*)$")


def parse_requirements(source: str, filename: str = "<requirements>") -> list[Requirement]:
    """Parse ``name: formula`` lines; ``#`` starts a comment."""
    out: list[Requirement] = []
    names: set[str] = set()
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _REQ_RE.match(line)
        if m is None:
            raise ParseError(f"{filename}: expected 'name: formula'", line, 0, (), lineno - 1)
        name, body = m.group(1), m.group(2)
        if name in names:
            raise ParseError(f"{filename}: duplicate requirement name {name!r}", line, 0, (), lineno - 1)
        names.add(name)
        try:
            phi = _Parser(body, lineno - 1).parse()
        except ParseError as exc:
            # report the column relative to the full line
            col_shift = m.start(2)
            raise ParseError(f"{filename}: {exc.message}", line, exc.pos + col_shift, exc.expected,
                             lineno - 1) from None
        out.append(Requirement(name, body.strip(), phi, lineno))
    return out


def load_requirements(path) -> list[Requirement]:
    with open(path, encoding="utf-8") as fh:
        return parse_requirements(fh.read(), str(path))
