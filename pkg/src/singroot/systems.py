"""Reading and writing polynomial-system files.

Format, one directive per line::

    # comment
    name: Ojika1
    vars: x, y
    poly: x^2 + y - 3
    poly: x + 1/8*y^2 - 3/2
    root: 1, 2
    guess: 1.01, 1.98
    mu: 3

Expressions use ``+ - * / ^`` and parentheses. Powers take nonnegative
integer literals, division is only allowed by constants, ``i`` is the
imaginary unit and a number may carry an ``i`` suffix (``2.5i``).
Coefficients are accumulated exactly as Gaussian rationals and rounded to
double precision once at the end.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .errors import SingrootError
from .poly import Poly, PolySystem, graded_key


class ParseError(SingrootError, ValueError):
    def __init__(self, message, line=None, col=None):
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.col = col


class QC:
    """Exact complex rational ``re + im*i``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, o):
        return QC(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return QC(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        return QC(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def __neg__(self):
        return QC(-self.re, -self.im)

    def __truediv__(self, o):
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError
        return QC((self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den)

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^()])
    )""",
    re.VERBOSE,
)


def _tokenize(text, line):
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[col - 1]!r}", line, col)
        kind = m.lastgroup
        col = m.start(kind) + 1
        toks.append((kind, m.group(kind), col))
        pos = m.end()
    toks.append(("end", "", len(text) + 1))
    return toks


def _parse_number(tok):
    imag = tok.endswith("i")
    body = tok[:-1] if imag else tok
    val = Fraction(body)
    return QC(0, val) if imag else QC(val, 0)


class _ExprParser:
    """Recursive descent over ``expr := term (('+'|'-') term)*``."""

    def __init__(self, text, varnames, line, col_offset=0):
        self.toks = _tokenize(text, line)
        self.i = 0
        self.vars = {v: k for k, v in enumerate(varnames)}
        self.n = len(varnames)
        self.line = line
        self.off = col_offset

    def err(self, msg, tok=None):
        tok = tok or self.toks[self.i]
        raise ParseError(msg, self.line, tok[2] + self.off)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def parse(self):
        if self.peek()[0] == "end":
            self.err("empty expression")
        p = self.expr()
        if self.peek()[0] != "end":
            self.err(f"unexpected {self.peek()[1]!r}")
        return p

    # polynomials are {exponent tuple: QC}
    def _add(self, a, b, sign=1):
        out = dict(a)
        for k, v in b.items():
            v = v if sign > 0 else -v
            s = out.get(k, QC()) + v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return out

    def _mul(self, a, b):
        out = {}
        for ka, va in a.items():
            for kb, vb in b.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                s = out.get(k, QC()) + va * vb
                if s.is_zero():
                    out.pop(k, None)
                else:
                    out[k] = s
        return out

    def _const(self, c):
        return {} if c.is_zero() else {(0,) * self.n: c}

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            p = self._add(p, self.term(), 1 if op == "+" else -1)
        return p

    def term(self):
        p = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op[1] == "*":
                p = self._mul(p, rhs)
            else:
                if any(sum(k) for k in rhs) or not rhs:
                    self.err("division is only allowed by a nonzero constant", op)
                c = rhs[(0,) * self.n]
                p = {k: v / c for k, v in p.items()}
        return p

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            p = self.unary()
            return p if op == "+" else {k: -v for k, v in p.items()}
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            caret = self.take()
            tok = self.peek()
            if tok[0] != "num" or not re.fullmatch(r"\d+", tok[1]):
                self.err("exponent must be a nonnegative integer literal", tok if tok[0] != "end" else caret)
            self.take()
            e = int(tok[1])
            out = self._const(QC(1))
            for _ in range(e):
                out = self._mul(out, base)
            return out
        return base

    def atom(self):
        tok = self.take()
        kind, val = tok[0], tok[1]
        if kind == "num":
            return self._const(_parse_number(val))
        if kind == "ident":
            if val == "i":
                return self._const(QC(0, 1))
            if val not in self.vars:
                self.err(f"unknown variable {val!r}", tok)
            e = [0] * self.n
            e[self.vars[val]] = 1
            return {tuple(e): QC(1)}
        if kind == "op" and val == "(":
            p = self.expr()
            if self.peek()[1] != ")":
                self.err("expected ')'")
            self.take()
            return p
        self.i -= 1
        self.err("expected a number, variable or '('" if kind != "end" else "unexpected end of expression", tok)


def parse_poly(text, varnames, line=1, col_offset=0):
    """Parse one polynomial expression over ``varnames``."""
    terms = _ExprParser(text, varnames, line, col_offset).parse()
    return Poly({k: complex(v) for k, v in terms.items()}, len(varnames))


def _parse_numbers(text, line, col_offset):
    vals = []
    for part in text.split(","):
        p = _ExprParser(part, [], line, col_offset).parse()
        if any(sum(k) for k in p):
            raise ParseError("expected a numeric constant", line, col_offset + 1)
        vals.append(complex(p.get((), QC())))
    return np.array(vals, dtype=complex)


@dataclass
class SystemFile:
    variables: list
    polynomials: list
    system: PolySystem
    known_root: np.ndarray | None = None
    initial_guess: np.ndarray | None = None
    expected_mu: int | None = None
    name: str | None = None
    comments: list = field(default_factory=list)


_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")


def parse_system(text):
    """Parse the text of a system file into a :class:`SystemFile`."""
    variables = None
    exprs = []
    polys = []
    root = guess = mu = name = None
    comments = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            comments.append(stripped[1:].strip())
            continue
        line = raw.split("#", 1)[0]
        if ":" not in line:
            raise ParseError("expected 'key: value'", lineno, len(raw) - len(raw.lstrip()) + 1)
        key, value = line.split(":", 1)
        key = key.strip()
        off = len(key) + 1 + (len(line) - len(line.lstrip()))
        if key == "vars":
            names = [v.strip() for v in value.split(",")]
            for v in names:
                if not _IDENT.match(v) or v == "i":
                    raise ParseError(f"bad variable name {v!r}", lineno, off + 1)
            if len(set(names)) != len(names):
                raise ParseError("duplicate variable name", lineno, off + 1)
            variables = names
        elif key == "poly":
            if variables is None:
                raise ParseError("'poly' before 'vars'", lineno, 1)
            exprs.append(value.strip())
            polys.append(parse_poly(value, variables, lineno, off))
        elif key == "root":
            root = _parse_numbers(value, lineno, off)
        elif key == "guess":
            guess = _parse_numbers(value, lineno, off)
        elif key == "mu":
            try:
                mu = int(value.strip())
            except ValueError:
                raise ParseError("mu must be an integer", lineno, off + 1) from None
        elif key == "name":
            name = value.strip()
        else:
            raise ParseError(f"unknown directive {key!r}", lineno, 1)
    if variables is None:
        raise ParseError("missing 'vars' line")
    if not polys:
        raise ParseError("no 'poly' lines")
    for label, vec in (("root", root), ("guess", guess)):
        if vec is not None and vec.size != len(variables):
            raise ParseError(f"{label} has {vec.size} entries for {len(variables)} variables")
    try:
        system = PolySystem(polys, len(variables))
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return SystemFile(variables, exprs, system, root, guess, mu, name, comments)


def load_system(path):
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


def format_number(z, digits=None):
    """``a+bi`` form; exact round-trip repr unless ``digits`` is given."""
    z = complex(z)

    def fmt(v):
        return repr(float(v)) if digits is None else f"{v:.{digits}g}"

    if z.imag == 0:
        return fmt(z.real)
    if z.real == 0:
        return fmt(z.imag) + "i"
    sign = "+" if z.imag >= 0 or np.isnan(z.imag) else "-"
    return f"{fmt(z.real)}{sign}{fmt(abs(z.imag))}i"


def format_poly(p, varnames):
    """Expression text for ``p`` that parses back to identical coefficients."""
    if p.is_zero():
        return "0"
    parts = []
    for alpha, c in sorted(p.terms.items(), key=lambda kv: graded_key(kv[0]), reverse=True):
        mono = "*".join(
            (v if e == 1 else f"{v}^{e}") for v, e in zip(varnames, alpha) if e
        )
        coef = f"({format_number(c)})"
        parts.append(coef if not mono else f"{coef}*{mono}")
    return " + ".join(parts)


def format_system(sf):
    lines = [f"# {c}" for c in sf.comments]
    if sf.name:
        lines.append(f"name: {sf.name}")
    lines.append("vars: " + ", ".join(sf.variables))
    for p in sf.system.polys:
        lines.append("poly: " + format_poly(p, sf.variables))
    if sf.known_root is not None:
        lines.append("root: " + ", ".join(format_number(v) for v in sf.known_root))
    if sf.initial_guess is not None:
        lines.append("guess: " + ", ".join(format_number(v) for v in sf.initial_guess))
    if sf.expected_mu is not None:
        lines.append(f"mu: {sf.expected_mu}")
    return "\n".join(lines) + "\n"


def corpus_names():
    """Names of the bundled benchmark systems."""
    files = resources.files("singroot.data")
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".sys"))


def load_corpus(name):
    text = resources.files("singroot.data").joinpath(f"{name}.sys").read_text(encoding="utf-8")
    return parse_system(text)
