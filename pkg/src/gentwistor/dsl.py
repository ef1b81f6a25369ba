"""Expression language and config format for user-supplied metrics.

Expression grammar (operator precedence from loosest to tightest):

    expr    :=  term  (('+' | '-') term)*
    term    :=  factor (('*' | '/') factor)*
    factor  :=  '-' factor  |  power
    power   :=  atom ['^' factor]               (right associative)
    atom    :=  NUMBER | 'pi' | 'x1'..'x4'
             |  ('sin'|'cos'|'exp'|'sqrt'|'log') '(' expr ')'
             |  '(' expr ')'

Unary minus binds looser than '^', so -2^2 evaluates to -4, while
2^-3 parses (the exponent position accepts a signed factor).

Evaluation is plain IEEE double arithmetic, but division by zero, log of
a non-positive value, sqrt of a negative value, and any non-finite
intermediate raise EvalError carrying the source span of the offending
subexpression instead of propagating NaN.

Config files are plain text, one [metric] table per file:

    [metric]
    name = my-sphere
    domain = [-1, 1]
    g11 = 4/(1+x1^2+x2^2+x3^2+x4^2)^2
    g12 = 0
    ...
    g44 = 4/(1+x1^2+x2^2+x3^2+x4^2)^2

All ten upper-triangular components g11..g44 are required; the symmetric
completion is probed for positive definiteness at 16 interior points of
the box before a MetricSpec is returned.  '#' starts a comment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .errors import ConfigError, EvalError, ParseError
from .metrics import MetricSpec

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "log")
VARIABLES = ("x1", "x2", "x3", "x4")

_UPPER_KEYS = ("g11", "g12", "g13", "g14", "g22", "g23", "g24", "g33", "g34", "g44")


# ---------------------------------------------------------------- tokens

@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, NAME, OP, END
    text: str
    offset: int


def _tokenize(src: str) -> Iterator[Token]:
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c in " \t":
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (src[j].isdigit() or (src[j] == "." and not seen_dot)):
                seen_dot = seen_dot or src[j] == "."
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            yield Token("NUMBER", src[i:j], i)
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            yield Token("NAME", src[i:j], i)
            i = j
            continue
        if c in "+-*/^()":
            yield Token("OP", c, i)
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r} at offset {i}", i, ("expression",))
    yield Token("END", "", n)


# ------------------------------------------------------------------ AST

@dataclass(frozen=True)
class Expr:
    span: tuple[int, int] = field(compare=False, repr=False)


@dataclass(frozen=True)
class Num(Expr):
    value: float = 0.0


@dataclass(frozen=True)
class Var(Expr):
    index: int = 0  # 0-based coordinate index


@dataclass(frozen=True)
class Const(Expr):
    name: str = "pi"


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr = None


@dataclass(frozen=True)
class BinOp(Expr):
    op: str = "+"
    left: Expr = None
    right: Expr = None


@dataclass(frozen=True)
class Call(Expr):
    func: str = "sin"
    arg: Expr = None


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = list(_tokenize(src))
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def fail(self, expected: tuple[str, ...]) -> ParseError:
        t = self.peek()
        what = "end of input" if t.kind == "END" else repr(t.text)
        exp = ", ".join(expected)
        return ParseError(f"unexpected {what} at offset {t.offset}; expected {exp}", t.offset, expected)

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.kind != "END":
            raise self.fail(("operator", "end of input"))
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind == "OP" and self.peek().text in "+-":
            op = self.advance().text
            r = self.term()
            e = BinOp(span=(e.span[0], r.span[1]), op=op, left=e, right=r)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().kind == "OP" and self.peek().text in "*/":
            op = self.advance().text
            r = self.factor()
            e = BinOp(span=(e.span[0], r.span[1]), op=op, left=e, right=r)
        return e

    def factor(self) -> Expr:
        t = self.peek()
        if t.kind == "OP" and t.text == "-":
            self.advance()
            arg = self.factor()
            return Neg(span=(t.offset, arg.span[1]), arg=arg)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        t = self.peek()
        if t.kind == "OP" and t.text == "^":
            self.advance()
            exp = self.factor()  # right associative, signed exponents allowed
            return BinOp(span=(base.span[0], exp.span[1]), op="^", left=base, right=exp)
        return base

    def atom(self) -> Expr:
        t = self.peek()
        if t.kind == "NUMBER":
            self.advance()
            return Num(span=(t.offset, t.offset + len(t.text)), value=float(t.text))
        if t.kind == "NAME":
            self.advance()
            end = t.offset + len(t.text)
            if t.text in VARIABLES:
                return Var(span=(t.offset, end), index=int(t.text[1]) - 1)
            if t.text == "pi":
                return Const(span=(t.offset, end), name="pi")
            if t.text in FUNCTIONS:
                o = self.peek()
                if not (o.kind == "OP" and o.text == "("):
                    raise self.fail(("'('",))
                self.advance()
                arg = self.expr()
                c = self.peek()
                if not (c.kind == "OP" and c.text == ")"):
                    raise self.fail(("')'",))
                close = self.advance()
                return Call(span=(t.offset, close.offset + 1), func=t.text, arg=arg)
            known = ", ".join(VARIABLES + ("pi",) + FUNCTIONS)
            raise ParseError(
                f"unknown identifier {t.text!r} at offset {t.offset}; known names: {known}",
                t.offset,
                ("x1..x4", "pi", "function"),
            )
        if t.kind == "OP" and t.text == "(":
            self.advance()
            e = self.expr()
            c = self.peek()
            if not (c.kind == "OP" and c.text == ")"):
                raise self.fail(("')'",))
            self.advance()
            return e
        raise self.fail(("number", "name", "'('", "'-'"))


def parse(src: str) -> Expr:
    """Parse an expression; ParseError carries byte offset and expected set."""
    return _Parser(src).parse()


def evaluate(expr: Expr, p: np.ndarray) -> float:
    """Evaluate at a coordinate point, raising EvalError on bad domains."""
    x = np.asarray(p, dtype=float)

    def ev(e: Expr) -> float:
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Var):
            return float(x[e.index])
        if isinstance(e, Const):
            return float(np.pi)
        if isinstance(e, Neg):
            return -ev(e.arg)
        if isinstance(e, Call):
            v = ev(e.arg)
            if e.func == "sin":
                return float(np.sin(v))
            if e.func == "cos":
                return float(np.cos(v))
            if e.func == "exp":
                out = float(np.exp(v))
                if not np.isfinite(out):
                    raise EvalError(f"exp overflow for argument {v!r}", e.span)
                return out
            if e.func == "sqrt":
                if v < 0.0:
                    raise EvalError(f"sqrt of negative value {v!r}", e.span)
                return float(np.sqrt(v))
            if e.func == "log":
                if v <= 0.0:
                    raise EvalError(f"log of non-positive value {v!r}", e.span)
                return float(np.log(v))
        if isinstance(e, BinOp):
            a, b = ev(e.left), ev(e.right)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            if e.op == "/":
                if b == 0.0:
                    raise EvalError("division by zero", e.span)
                return a / b
            if e.op == "^":
                with np.errstate(all="ignore"):
                    out = float(np.power(a, b))
                if not np.isfinite(out):
                    raise EvalError(f"power {a!r} ^ {b!r} is not finite", e.span)
                return out
        raise EvalError(f"malformed expression node {e!r}", getattr(e, "span", None))

    out = ev(expr)
    if not np.isfinite(out):
        raise EvalError("expression evaluated to a non-finite value", expr.span)
    return out


def to_source(expr: Expr) -> str:
    """Fully parenthesized source for the expression; parses back to an
    equal tree (spans excluded from equality) for any parser-producible
    tree.  Negative literals never come out of the parser (unary minus
    becomes Neg), but are still printed unambiguously."""
    if isinstance(expr, Num):
        return repr(expr.value) if expr.value >= 0 else f"(-{abs(expr.value)!r})"
    if isinstance(expr, Var):
        return f"x{expr.index + 1}"
    if isinstance(expr, Const):
        return expr.name
    if isinstance(expr, Neg):
        return f"(-{to_source(expr.arg)})"
    if isinstance(expr, Call):
        return f"{expr.func}({to_source(expr.arg)})"
    if isinstance(expr, BinOp):
        return f"({to_source(expr.left)}{expr.op}{to_source(expr.right)})"
    raise EvalError(f"malformed expression node {expr!r}", None)


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class MetricConfig:
    """Parsed metric definition: name, box, ten upper-triangular entries."""

    name: str
    lo: float
    hi: float
    exprs: dict[str, Expr] = field(repr=False)
    sources: dict[str, str] = field(repr=False)


def _line_col(text: str, line_no: int, col: int) -> str:
    return f"{line_no}:{col}"


def parse_config(text: str) -> MetricConfig:
    """Parse the key-value table; diagnostics carry line:col positions."""
    name = None
    lo = hi = None
    exprs: dict[str, Expr] = {}
    sources: dict[str, str] = {}
    in_table = False
    seen_table = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            if stripped != "[metric]":
                raise ConfigError(f"{line_no}:1: unknown section {stripped!r}, expected [metric]")
            if seen_table:
                raise ConfigError(f"{line_no}:1: duplicate [metric] section")
            seen_table = in_table = True
            continue
        if not in_table:
            raise ConfigError(f"{line_no}:1: key outside a [metric] section")
        if "=" not in line:
            raise ConfigError(f"{line_no}:1: expected 'key = value', got {stripped!r}")
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        value = value_part.strip()
        value_col = 1 + len(key_part) + 1 + (len(value_part) - len(value_part.lstrip()))
        if key == "name":
            name = value
        elif key == "domain":
            if not (value.startswith("[") and value.endswith("]")):
                raise ConfigError(f"{line_no}:{value_col}: domain must look like [lo, hi]")
            try:
                parts = [float(v) for v in value[1:-1].split(",")]
            except ValueError:
                raise ConfigError(f"{line_no}:{value_col}: domain bounds must be numbers") from None
            if len(parts) != 2 or not parts[0] < parts[1]:
                raise ConfigError(f"{line_no}:{value_col}: domain needs two increasing bounds")
            lo, hi = parts
        elif key in _UPPER_KEYS:
            try:
                exprs[key] = parse(value)
            except ParseError as e:
                col = value_col + e.offset
                raise ConfigError(f"{line_no}:{col}: {e}") from e
            sources[key] = value
        else:
            raise ConfigError(
                f"{line_no}:1: unknown key {key!r}; expected name, domain, or g11..g44"
            )
    if not seen_table:
        raise ConfigError("no [metric] section found")
    if name is None:
        raise ConfigError("missing 'name' key")
    if lo is None:
        raise ConfigError("missing 'domain' key")
    missing = [k for k in _UPPER_KEYS if k not in exprs]
    if missing:
        raise ConfigError(f"missing metric components: {', '.join(missing)}")
    return MetricConfig(name=name, lo=lo, hi=hi, exprs=exprs, sources=sources)


def _metric_callable(cfg: MetricConfig) -> Callable[[np.ndarray], np.ndarray]:
    index = {}
    for key, e in cfg.exprs.items():
        i, j = int(key[1]) - 1, int(key[2]) - 1
        index[(i, j)] = e

    def g(p: np.ndarray) -> np.ndarray:
        out = np.empty((4, 4))
        for (i, j), e in index.items():
            v = evaluate(e, p)
            out[i, j] = v
            out[j, i] = v
        return out

    return g


def probe_points(lo: float, hi: float) -> np.ndarray:
    """16 interior probe points: the 2^4 grid at 1/4 and 3/4 per axis."""
    q = [lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)]
    return np.array(list(itertools.product(q, q, q, q)))


def load_metric(text: str) -> MetricSpec:
    """Parse a config and return a MetricSpec, verifying positive
    definiteness of the symmetric completion at 16 probe points."""
    cfg = parse_config(text)
    g = _metric_callable(cfg)
    for p in probe_points(cfg.lo, cfg.hi):
        try:
            mat = g(p)
        except EvalError as e:
            raise ConfigError(f"metric evaluation failed at probe point {p.tolist()}: {e}") from e
        try:
            np.linalg.cholesky(mat)
        except np.linalg.LinAlgError:
            raise ConfigError(
                f"metric is not positive definite at probe point {p.tolist()}"
            ) from None
    return MetricSpec(
        name=cfg.name,
        lo=cfg.lo,
        hi=cfg.hi,
        g=g,
        provenance="user-supplied metric definition",
    )


def load_metric_file(path: str) -> MetricSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return load_metric(fh.read())
