"""Parser and printer for ``.n2`` problem files.

A file is a sequence of ``section: value`` lines; indented lines continue the
previous value and ``#`` starts a comment.  Sections::

    name: wave
    kind: continuous | discrete
    vars: x t                     # independent variables, in axis order
    fields: u  psi~psic           # dependent variables; ~ pairs conjugates
    params: c  z:complex
    arbitrary: g1 g2
    let nu1: u_x - u_t            # named abbreviation, expanded on use
    lagrangian: 1/2*(u_x^2 - u_t^2)
    characteristic u: g1 + g2
    constraint: g1_x + g1_t = 0
    multiplier 1: nu1
    specialize k: g1 = 1, g2 = 0
    eliminate: -g1_a2 + g2_a1
    expect euler u: ... | expect relation g1: ... | expect residual g1: ...
    expect flux x: ... | expect special k flux x: ... | expect potential_link: ...

Expressions use ``+ - * / ^`` (explicit ``*`` only), ``I``, ``exp ln sin cos
conj``, jets ``u_x`` or ``u_{xt}`` (continuous) and ``u[1,-1]`` (discrete).
A subscript on a ``let`` name applies the total derivative or the shift.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Sequence

from .atoms import ArbJet, Independent, Jet, MultiIndex, Param
from .errors import ConstraintNotLinear, ParseError, UndeclaredIdentifier
from .expr import I, ZERO, Expr, conj, cos, exp, linear_coefficients, ln, power, sin
from .operators import DIFFERENCE, DIFFERENTIAL, LinearOperator, calculus
from .printing import to_text

KINDS = {"continuous": DIFFERENTIAL, "discrete": DIFFERENCE}
KIND_NAMES = {v: k for k, v in KINDS.items()}
FUNCS = {"exp": exp, "ln": ln, "sin": sin, "cos": cos}
RESERVED = {"I", "conj", *FUNCS}
NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")
EXPECT_KINDS = ("euler", "relation", "residual", "flux", "special", "potential_link", "eliminated")


@dataclass
class Expectation:
    what: str  # euler | relation | residual | flux | special | potential_link | eliminated
    key: tuple
    expr: Expr
    line: int = field(default=0, compare=False)

    def label(self) -> str:
        return " ".join([self.what, *[str(k) for k in self.key]])


@dataclass
class ProblemFile:
    """One variational problem with its optional multipliers and golden values."""

    name: str = ""
    kind: str = DIFFERENTIAL
    axes: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    partners: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    arbitrary: list = field(default_factory=list)
    lagrangian: Expr | None = None
    characteristic: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    multipliers: dict = field(default_factory=dict)
    specializations: dict = field(default_factory=dict)
    eliminate: Expr | None = None
    expects: list = field(default_factory=list)
    lets: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def naxes(self) -> int:
        return len(self.axes)

    @property
    def shift(self) -> bool:
        return self.kind == DIFFERENCE

    @property
    def calc(self):
        return calculus(self.kind)

    def constraint_operator(self) -> LinearOperator:
        op = LinearOperator.from_linear_rows(self.constraints, self.arbitrary, self.kind, self.naxes)
        if op is None:
            raise ConstraintNotLinear("constraints are not linear homogeneous in the arbitrary functions")
        return op

    def eliminate_operator(self) -> LinearOperator | None:
        if self.eliminate is None:
            return None
        return LinearOperator.from_linear_rows([self.eliminate], self.arbitrary, self.kind, self.naxes)

    def multiplier_list(self) -> list:
        return [self.multipliers.get(s + 1, ZERO) for s in range(len(self.constraints))]

    def text(self, e) -> str:
        return to_text(e, None if self.shift else self.axes)

    def gamma(self, name: str) -> Expr:
        return Expr(ArbJet(name, MultiIndex.zero(self.naxes, self.shift)))


# ----------------------------------------------------------------- lexer
_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9]*)
  | (?P<op>[-+*/^()\[\],=_{}~:])
  """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # num | name | op | end
    text: str
    line: int
    col: int


class Source:
    """Text of one section value with a position map back into the file."""

    def __init__(self, pieces: Sequence[tuple]):
        chars = []
        pos = []
        for k, (line, col, text) in enumerate(pieces):
            if k:
                chars.append(" ")
                pos.append((line, col))
            for j, ch in enumerate(text):
                chars.append(ch)
                pos.append((line, col + j))
        self.text = "".join(chars)
        self.pos = pos
        self.end = (pieces[-1][0], pieces[-1][1] + len(pieces[-1][2])) if pieces else (0, 0)

    def where(self, i: int) -> tuple:
        return self.pos[i] if i < len(self.pos) else self.end

    def tokens(self) -> list:
        out = []
        i = 0
        s = self.text
        while i < len(s):
            m = _TOKEN.match(s, i)
            if not m:
                line, col = self.where(i)
                raise ParseError(f"unexpected character {s[i]!r}", line, col)
            kind = m.lastgroup
            if kind != "ws":
                line, col = self.where(i)
                out.append(Token(kind, m.group(), line, col))
            i = m.end()
        line, col = self.end
        out.append(Token("end", "", line, col))
        return out


# ---------------------------------------------------------------- parser
class ExprParser:
    def __init__(self, problem: ProblemFile, src: Source):
        self.p = problem
        self.src = src
        self.toks = src.tokens()
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, expected=(), tok=None, cls=ParseError):
        tok = tok or self.peek()
        return cls(msg, tok.line, tok.col, expected)

    def expect(self, text):
        t = self.peek()
        if t.text != text or t.kind == "end":
            raise self.error(f"unexpected {t.text or 'end of input'!r}", (repr(text),))
        return self.next()

    def parse(self) -> Expr:
        e = self.expr()
        self.finish()
        return e

    def finish(self):
        t = self.peek()
        if t.kind != "end":
            raise self.error(f"unexpected {t.text!r}", ("'+'", "'-'", "'*'", "'/'", "'^'", "end of expression"))

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.next().text
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().text in ("*", "/") and self.peek().kind == "op":
            tok = self.next()
            rhs = self.unary()
            if tok.text == "*":
                e = e * rhs
            else:
                if rhs.is_zero:
                    raise self.error("division by zero", tok=tok)
                e = e / rhs
        t = self.peek()
        if t.kind in ("name", "num") or t.text == "(":
            raise self.error("implicit multiplication is not allowed", ("'*'", "'/'", "'+'", "'-'", "'^'"))
        return e

    def unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.next()
            return -self.unary()
        if t.kind == "op" and t.text == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().text == "^" and self.peek().kind == "op":
            tok = self.next()
            ex = self.unary()
            if not ex.is_rational_number():
                raise self.error("exponent must be a rational constant", tok=tok)
            return power(base, ex.as_rational())
        return base

    def atom(self) -> Expr:
        t = self.peek()
        if t.kind == "num":
            self.next()
            return Expr(Fraction(t.text))
        if t.kind == "op" and t.text == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            self.next()
            return self.named(t)
        raise self.error(
            f"unexpected {t.text or 'end of input'!r}", ("number", "identifier", "'('", "'-'")
        )

    def named(self, t: Token) -> Expr:
        name = t.text
        if name in FUNCS or name == "conj":
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            if name == "conj":
                return conj(arg, self.p.partners)
            return FUNCS[name](arg)
        if name == "I":
            return I
        index = self.index_suffix(t)
        p = self.p
        if name in p.lets:
            e = p.lets[name]
            return p.calc.apply_index(e, index) if index is not None else e
        if name in p.fields or name in p.arbitrary:
            offs = index if index is not None else (0,) * p.naxes
            cls = Jet if name in p.fields else ArbJet
            return Expr(cls(name, MultiIndex(tuple(offs), p.shift)))
        if index is not None:
            raise self.error(f"{name!r} cannot carry an index", tok=t)
        if name in p.params:
            return Expr(Param(name, p.params[name]))
        if name in p.axes:
            return Expr(Independent(name, p.axes.index(name)))
        raise self.error(f"undeclared identifier {name!r}", tok=t, cls=UndeclaredIdentifier)

    def index_suffix(self, name_tok: Token):
        p = self.p
        t = self.peek()
        if t.kind == "op" and t.text == "[":
            if not p.shift:
                raise self.error("lattice offsets need kind: discrete", tok=t)
            self.next()
            offs = []
            while True:
                sign = 1
                if self.peek().text == "-":
                    self.next()
                    sign = -1
                n = self.peek()
                if n.kind != "num" or not n.text.isdigit():
                    raise self.error("expected an integer offset", ("integer",))
                self.next()
                offs.append(sign * int(n.text))
                if self.peek().text == ",":
                    self.next()
                    continue
                self.expect("]")
                break
            if len(offs) != p.naxes:
                raise self.error(f"expected {p.naxes} offsets, got {len(offs)}", tok=t)
            return tuple(offs)
        if t.kind == "op" and t.text == "_":
            if p.shift:
                raise self.error("use u[..] offsets in a discrete problem", ("'['",), tok=t)
            self.next()
            s = self.peek()
            if s.kind == "op" and s.text == "{":
                self.next()
                parts = []
                while self.peek().kind in ("name", "num"):
                    parts.append(self.next())
                if not parts:
                    raise self.error("empty subscript", ("axis name",))
                self.expect("}")
                text = "".join(x.text for x in parts)
                return self.split_axes(text, parts[0])
            if s.kind in ("name", "num"):
                self.next()
                return self.split_axes(s.text, s)
            raise self.error("expected a subscript", ("axis name", "'{'"))
        return None

    def split_axes(self, text: str, tok: Token) -> tuple:
        axes = self.p.axes
        counts = [0] * len(axes)
        i = 0
        order = sorted(range(len(axes)), key=lambda k: -len(axes[k]))
        while i < len(text):
            for k in order:
                if text.startswith(axes[k], i):
                    counts[k] += 1
                    i += len(axes[k])
                    break
            else:
                raise ParseError(f"{text[i:]!r} is not a sequence of axis names", tok.line, tok.col, tuple(axes))
        return tuple(counts)


# ----------------------------------------------------------- file level
_HEAD = re.compile(r"(?P<key>[A-Za-z_]+)(?P<args>(?:[ \t]+[A-Za-z0-9_]+)*)[ \t]*:")


def _strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def _sections(text: str) -> list:
    """Split into ``(key, args, Source, line)`` records, folding continuation lines."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        if line[0] in " \t":
            if not out:
                raise ParseError("continuation line before any section", lineno, 1, ("section header",))
            stripped = line.lstrip()
            out[-1][2].append((lineno, len(line) - len(stripped) + 1, stripped))
            continue
        m = _HEAD.match(line)
        if not m:
            raise ParseError("expected a section header", lineno, 1, ("name:", "kind:", "vars:", "fields:", "lagrangian:"))
        value = line[m.end():]
        lead = len(value) - len(value.lstrip())
        pieces = [(lineno, m.end() + lead + 1, value.strip())] if value.strip() else []
        out.append((m.group("key"), m.group("args").split(), pieces, lineno))
    return out


def _names(pieces) -> list:
    out = []
    for line, col, text in pieces:
        for m in re.finditer(r"[^\s,]+", text):
            out.append((m.group(), line, col + m.start()))
    return out


def _check_name(name, line, col, seen):
    if not NAME_RE.match(name) or name in RESERVED:
        raise ParseError(f"invalid name {name!r}", line, col, ("identifier",))
    if name in seen:
        raise ParseError(f"duplicate name {name!r}", line, col)
    seen.add(name)


def parse(text: str) -> ProblemFile:
    """Parse ``.n2`` text into a :class:`ProblemFile`."""
    p = ProblemFile()
    seen: set = set()
    declared = False
    for key, args, pieces, lineno in _sections(text):
        if key in ("name", "kind", "vars", "fields", "params", "arbitrary"):
            if declared:
                raise ParseError(f"'{key}:' must come before expressions", lineno, 1)
            if key == "name":
                p.name = " ".join(t for _, _, t in pieces)
            elif key == "kind":
                k = " ".join(t for _, _, t in pieces)
                if k not in KINDS:
                    raise ParseError(f"unknown kind {k!r}", lineno, 1, tuple(KINDS))
                p.kind = KINDS[k]
            elif key == "vars":
                for n, line, col in _names(pieces):
                    _check_name(n, line, col, seen)
                    p.axes.append(n)
            elif key == "fields":
                for n, line, col in _names(pieces):
                    names = n.split("~")
                    if len(names) > 2:
                        raise ParseError(f"bad conjugate pair {n!r}", line, col)
                    for x in names:
                        _check_name(x, line, col, seen)
                        p.fields.append(x)
                    if len(names) == 2:
                        p.partners[names[0]] = names[1]
            elif key == "params":
                for n, line, col in _names(pieces):
                    name, _, flag = n.partition(":")
                    if flag not in ("", "real", "complex"):
                        raise ParseError(f"unknown parameter flag {flag!r}", line, col, ("real", "complex"))
                    _check_name(name, line, col, seen)
                    p.params[name] = flag != "complex"
            else:
                for n, line, col in _names(pieces):
                    _check_name(n, line, col, seen)
                    p.arbitrary.append(n)
            continue
        declared = True
        if not p.axes:
            raise ParseError("'vars:' must be declared first", lineno, 1, ("vars:",))
        if not pieces and key not in ("constraint",):
            raise ParseError(f"empty '{key}:' section", lineno, 1, ("expression",))
        _apply(p, key, args, pieces, lineno, seen)
    return p


def _expr(p, pieces) -> Expr:
    return ExprParser(p, Source(pieces)).parse()


def _equation(p, pieces) -> Expr:
    src = Source(pieces)
    parser = ExprParser(p, src)
    lhs = parser.expr()
    if parser.peek().text == "=":
        parser.next()
        rhs = parser.expr()
        lhs = lhs - rhs
    parser.finish()
    return lhs


def _apply(p: ProblemFile, key, args, pieces, lineno, seen):
    def arity(n):
        if len(args) != n:
            raise ParseError(f"'{key}' takes {n} argument(s)", lineno, 1)

    if key == "let":
        arity(1)
        name = args[0]
        _check_name(name, lineno, 1, seen)
        p.lets[name] = _expr(p, pieces)
    elif key == "lagrangian":
        arity(0)
        p.lagrangian = _expr(p, pieces)
    elif key == "characteristic":
        arity(1)
        if args[0] not in p.fields:
            raise UndeclaredIdentifier(f"unknown field {args[0]!r}", lineno, 1, tuple(p.fields))
        p.characteristic[args[0]] = _expr(p, pieces)
    elif key == "constraint":
        arity(0)
        if not pieces:
            return
        e = _equation(p, pieces)
        if not e.is_zero and linear_coefficients(e, p.arbitrary) is None:
            line, col, _ = pieces[0]
            raise ConstraintNotLinear("constraint is not linear homogeneous in the arbitrary functions", line, col)
        p.constraints.append(e)
    elif key == "multiplier":
        arity(1)
        if not args[0].isdigit() or int(args[0]) < 1:
            raise ParseError("multiplier index must be a positive integer", lineno, 1, ("integer",))
        p.multipliers[int(args[0])] = _expr(p, pieces)
    elif key == "specialize":
        arity(1)
        p.specializations[args[0]] = _bindings(p, pieces, lineno)
    elif key == "eliminate":
        arity(0)
        e = _expr(p, pieces)
        if linear_coefficients(e, p.arbitrary) is None:
            line, col, _ = pieces[0]
            raise ConstraintNotLinear("elimination recipe must be linear in the arbitrary functions", line, col)
        p.eliminate = e
    elif key == "expect":
        _expect(p, args, pieces, lineno)
    else:
        raise ParseError(
            f"unknown section {key!r}",
            lineno,
            1,
            ("let", "lagrangian:", "characteristic", "constraint:", "multiplier", "specialize", "eliminate:", "expect"),
        )


def _bindings(p, pieces, lineno) -> dict:
    src = Source(pieces)
    parser = ExprParser(p, src)
    out = {}
    while True:
        t = parser.next()
        if t.kind != "name" or t.text not in p.arbitrary:
            raise parser.error("expected an arbitrary function name", tuple(p.arbitrary), tok=t)
        parser.expect("=")
        out[t.text] = parser.expr()
        if parser.peek().text == ",":
            parser.next()
            continue
        parser.finish()
        return out


def _expect(p, args, pieces, lineno):
    if not args or args[0] not in EXPECT_KINDS:
        raise ParseError("unknown expectation", lineno, 1, EXPECT_KINDS)
    what, rest = args[0], tuple(args[1:])
    need = {"euler": 1, "relation": 1, "residual": 1, "flux": 1, "special": 3, "potential_link": 0, "eliminated": 0}
    if len(rest) != need[what] or (what == "special" and rest[1] != "flux"):
        raise ParseError(f"malformed 'expect {what}' header", lineno, 1)
    if what == "special":
        rest = (rest[0], rest[2])
    e = _expr(p, pieces)
    p.expects.append(Expectation(what, rest, e, lineno))


# ---------------------------------------------------------------- printer
def _wrap(head: str, body: str) -> str:
    return f"{head}: {body}"


def print_problem(p: ProblemFile) -> str:
    """Canonical text form; ``parse(print_problem(p)) == p`` (``let`` abbreviations are inlined)."""
    out = []
    if p.name:
        out.append(_wrap("name", p.name))
    out.append(_wrap("kind", KIND_NAMES[p.kind]))
    out.append(_wrap("vars", " ".join(p.axes)))
    if p.fields:
        fs = []
        done = set()
        for f in p.fields:
            if f in done:
                continue
            if f in p.partners:
                fs.append(f"{f}~{p.partners[f]}")
                done.add(p.partners[f])
            else:
                fs.append(f)
            done.add(f)
        out.append(_wrap("fields", " ".join(fs)))
    if p.params:
        out.append(_wrap("params", " ".join(n if real else f"{n}:complex" for n, real in p.params.items())))
    if p.arbitrary:
        out.append(_wrap("arbitrary", " ".join(p.arbitrary)))
    if p.lagrangian is not None:
        out.append(_wrap("lagrangian", p.text(p.lagrangian)))
    for f, q in p.characteristic.items():
        out.append(_wrap(f"characteristic {f}", p.text(q)))
    for c in p.constraints:
        out.append(_wrap("constraint", f"{p.text(c)} = 0"))
    for s in sorted(p.multipliers):
        out.append(_wrap(f"multiplier {s}", p.text(p.multipliers[s])))
    for k, b in p.specializations.items():
        out.append(_wrap(f"specialize {k}", ", ".join(f"{g} = {p.text(v)}" for g, v in b.items())))
    if p.eliminate is not None:
        out.append(_wrap("eliminate", p.text(p.eliminate)))
    for x in p.expects:
        key = x.key if x.what != "special" else (x.key[0], "flux", x.key[1])
        out.append(_wrap(" ".join(["expect", x.what, *key]), p.text(x.expr)))
    return "\n".join(out) + "\n"


def load(path) -> ProblemFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def corpus_names() -> list:
    """Names of the problem files shipped with the package."""
    root = resources.files("noether2") / "corpus"
    return sorted(f.name[:-3] for f in root.iterdir() if f.name.endswith(".n2"))


def load_corpus(name: str) -> ProblemFile:
    return parse((resources.files("noether2") / "corpus" / f"{name}.n2").read_text(encoding="utf-8"))


def parse_expr(text: str, problem: ProblemFile) -> Expr:
    """Parse a single expression in the context of a problem's declarations."""
    return _expr(problem, [(1, 1, text)])
