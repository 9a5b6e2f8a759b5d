"""Series literals and the on-disk document formats.

Series literal grammar (used in connection files, formal-type files and on
the command line)::

    series   :=  expr
    expr     :=  ["-"] product (("+"|"-") product)*
    product  :=  power (("*"|"/") power)*
    power    :=  atom ["^" exponent]
    atom     :=  integer | "z" | "zeta_<m>" | "(" expr ")"
    exponent :=  ["-"] integer | "(" ["-"] integer ["/" integer] ")"

All arithmetic in a literal is exact; ``z`` may carry a fractional exponent
written in parentheses, e.g. ``z^(-1/2)``.  Examples::

    z^-1 + 1/2
    (1 + 2*zeta_4)*z^(3/2) - 7
    2*z^2 + 3*z^3

A connection document is line-oriented::

    connection
    n: 2
    ramification: 2
    precision: 6
    entry: 1 1 z^-1 + 1/2
    entry: 2 1 (1+zeta_4)*z^(1/2)

Rows and columns are 1-based; omitted entries are zero; ``precision: exact``
marks a Laurent-polynomial matrix.  A formal-type document::

    formal-type
    partition: 2,1
    depth: 1/2
    coeff: 1 -1/2 1
    coeff: 1 0 3/4
    coeff: 2 0 -1/3

where each ``coeff`` line is ``<block> <grade> <coefficient literal>`` and the
grade lies in (1/e_block)Z ∩ [-depth, 0].
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError
from .scalars import Cyclotomic, PuiseuxSeries, ratio

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+)|(?P<zeta>zeta_\d+)|(?P<z>z)|(?P<op>[()+\-*/^]))")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ParseError(f"unexpected character at {text[pos:]!r}")
            break
        pos = m.end()
        if m.group("num"):
            out.append(("num", int(m.group("num"))))
        elif m.group("zeta"):
            out.append(("zeta", int(m.group("zeta")[5:])))
        elif m.group("z"):
            out.append(("z", None))
        else:
            out.append(("op", m.group("op")))
    return out


class _SeriesParser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}")

    def parse(self) -> PuiseuxSeries:
        s = self.expr()
        if self.i != len(self.tokens):
            raise ParseError("trailing input in series literal")
        return s

    def expr(self) -> PuiseuxSeries:
        kind, val = self.peek()
        negate = False
        if kind == "op" and val in "+-":
            self.take()
            negate = val == "-"
        s = self.product()
        if negate:
            s = -s
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.product()
                s = s - rhs if val == "-" else s + rhs
            else:
                return s

    def product(self) -> PuiseuxSeries:
        s = self.power()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.power()
                if val == "*":
                    s = s * rhs
                else:
                    if rhs.is_zero():
                        raise ParseError("division by zero in literal")
                    if len(rhs.terms) != 1:
                        raise ParseError("literal division only by a single term")
                    s = s * rhs.invert()
            else:
                return s

    def power(self) -> PuiseuxSeries:
        kind, val = self.peek()
        is_z = kind == "z"
        base = self.atom()
        k2, v2 = self.peek()
        if k2 == "op" and v2 == "^":
            self.take()
            q = self.exponent()
            if is_z:
                return PuiseuxSeries.z_pow(q)
            if q.denominator != 1:
                raise ParseError("fractional exponent only allowed on z")
            k = int(q)
            if k >= 0:
                return base ** k
            if len(base.terms) != 1:
                raise ParseError("negative power only of a single term")
            return base.invert() ** (-k)
        return base

    def atom(self) -> PuiseuxSeries:
        kind, val = self.take()
        if kind == "num":
            return PuiseuxSeries.constant(val)
        if kind == "zeta":
            return PuiseuxSeries.constant(Cyclotomic.zeta(val))
        if kind == "z":
            return PuiseuxSeries.z_pow(1)
        if kind == "op" and val == "(":
            s = self.expr()
            self.expect_op(")")
            return s
        if kind == "op" and val == "-":
            return -self.atom()
        raise ParseError(f"unexpected token {val!r} in series literal")

    def exponent(self) -> Fraction:
        kind, val = self.peek()
        if kind == "op" and val == "(":
            self.take()
            sign = 1
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                sign = -1 if val == "-" else 1
            kind, val = self.take()
            if kind != "num":
                raise ParseError("malformed exponent")
            num = val
            den = 1
            kind, val = self.peek()
            if kind == "op" and val == "/":
                self.take()
                kind, val = self.take()
                if kind != "num":
                    raise ParseError("malformed exponent denominator")
                den = val
            self.expect_op(")")
            return Fraction(sign * num, den)
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
            kind, val = self.peek()
        kind, val = self.take()
        if kind != "num":
            raise ParseError("malformed exponent")
        return Fraction(sign * val)


def parse_series(text: str, ram: int | None = None, prec=None) -> PuiseuxSeries:
    """Parse a series literal; optionally force ramification and truncation."""
    s = _SeriesParser(text).parse()
    if ram is not None:
        import math

        need = 1
        for q in s.terms:
            need = math.lcm(need, q.denominator)
        if ram % need != 0:
            raise ParseError(f"literal needs ramification {need}, document says {ram}")
        s = s.with_ram(ram)
    if prec is not None:
        s = s.truncated(prec)
    return s


def format_rational(x: Fraction) -> str:
    return str(x)


def format_coeff(c: Cyclotomic) -> str:
    if c.is_rational():
        return format_rational(c.as_rational())
    return "(" + str(c) + ")"


def format_series(s: PuiseuxSeries) -> str:
    if not s.terms:
        return "0"
    parts = []
    for q, c in s.items():
        if q == 0:
            zp = ""
        elif q == 1:
            zp = "z"
        elif q.denominator == 1 and q > 0:
            zp = f"z^{q}"
        else:
            zp = f"z^({q})"
        if not zp:
            body = format_coeff(c)
        elif c == Cyclotomic.coerce(1):
            body = zp
        elif c == Cyclotomic.coerce(-1):
            body = "-" + zp
        else:
            body = f"{format_coeff(c)}*{zp}"
        parts.append(body)
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


# ---------------------------------------------------------------------------
# documents


def _split_document(text):
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            lines.append(line.strip())
    if not lines:
        raise ParseError("empty document")
    return lines[0], lines[1:]


def parse_connection_document(text: str):
    """Parse a connection document.

    Returns ``(n, ram, prec, entries)`` with entries a dict
    ``(row, col) -> PuiseuxSeries`` (0-based indices).
    """
    header, lines = _split_document(text)
    if header != "connection":
        raise ParseError(f"expected 'connection' header, got {header!r}")
    n = ram = None
    prec = "unset"
    entries = {}
    for line in lines:
        if ":" not in line:
            raise ParseError(f"malformed line: {line!r}")
        key, rest = line.split(":", 1)
        key = key.strip()
        rest = rest.strip()
        if key == "n":
            n = int(rest)
        elif key == "ramification":
            ram = int(rest)
        elif key == "precision":
            prec = None if rest == "exact" else ratio(rest)
        elif key == "entry":
            m = re.match(r"(\d+)\s+(\d+)\s+(.*)", rest)
            if not m:
                raise ParseError(f"malformed entry line: {line!r}")
            i, j = int(m.group(1)), int(m.group(2))
            entries[(i - 1, j - 1)] = m.group(3)
        else:
            raise ParseError(f"unknown key {key!r}")
    if n is None or n < 1:
        raise ParseError("missing or invalid field 'n'")
    if ram is None:
        ram = 1
    if prec == "unset":
        prec = None
    parsed = {}
    for (i, j), lit in entries.items():
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"entry ({i + 1},{j + 1}) outside an {n}x{n} matrix")
        parsed[(i, j)] = parse_series(lit, ram=ram, prec=prec)
    return n, ram, prec, parsed


def format_connection_document(matrix) -> str:
    lines = ["connection", f"n: {matrix.n}", f"ramification: {matrix.ram}"]
    lines.append("precision: exact" if matrix.prec is None else f"precision: {matrix.prec}")
    for i in range(matrix.n):
        for j in range(matrix.n):
            s = matrix.entry(i, j)
            if not s.is_zero():
                lines.append(f"entry: {i + 1} {j + 1} {format_series(s)}")
    return "\n".join(lines) + "\n"


def parse_formal_type_document(text: str):
    """Parse a formal-type document.

    Returns ``(partition, depth, coeffs)`` with coeffs a dict
    ``(block_index, grade) -> Cyclotomic`` (0-based block index).
    """
    header, lines = _split_document(text)
    if header != "formal-type":
        raise ParseError(f"expected 'formal-type' header, got {header!r}")
    partition = None
    depth = None
    coeffs = {}
    for line in lines:
        if ":" not in line:
            raise ParseError(f"malformed line: {line!r}")
        key, rest = line.split(":", 1)
        key = key.strip()
        rest = rest.strip()
        if key == "partition":
            partition = tuple(int(p) for p in rest.split(","))
        elif key == "depth":
            depth = ratio(rest)
        elif key == "coeff":
            m = re.match(r"(\d+)\s+(-?\d+(?:/\d+)?)\s+(.*)", rest)
            if not m:
                raise ParseError(f"malformed coeff line: {line!r}")
            block = int(m.group(1)) - 1
            grade = ratio(m.group(2))
            lit = parse_series(m.group(3))
            if lit.terms and (len(lit.terms) > 1 or 0 not in lit.terms):
                raise ParseError("formal-type coefficients must be constants")
            coeffs[(block, grade)] = lit.coeff(0)
        else:
            raise ParseError(f"unknown key {key!r}")
    if partition is None or depth is None:
        raise ParseError("formal-type document needs 'partition' and 'depth'")
    return partition, depth, coeffs


def format_formal_type_document(ft) -> str:
    lines = ["formal-type"]
    lines.append("partition: " + ",".join(str(e) for e in ft.torus.cls.cycle_type))
    lines.append(f"depth: {ft.depth}")
    for (j, m), c in ft.ordered_coeffs():
        grade = Fraction(m, ft.torus.block_sizes[j])
        lines.append(f"coeff: {j + 1} {grade} {format_coeff(c)}")
    return "\n".join(lines) + "\n"


def format_point(coords) -> str:
    return "(" + ",".join(str(c) for c in coords) + ")"


def parse_point(text: str):
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    try:
        return tuple(ratio(p.strip()) for p in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"malformed point {text!r}") from exc


def parse_partition(text: str):
    try:
        parts = tuple(int(p.strip()) for p in text.strip().split(","))
    except ValueError as exc:
        raise ParseError(f"malformed partition {text!r}") from exc
    if any(p < 1 for p in parts):
        raise ParseError("partition parts must be positive")
    return parts
