"""Square matrices over truncated Puiseux series.

A LoopMatrix holds elements of gl_n over k((z^(1/e))) with one common
ramification and truncation order across all entries.  It represents loop
algebra elements, gauge group elements and (through the residue-trace
pairing) functionals.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import InsufficientPrecision
from .scalars import Cyclotomic, PuiseuxSeries, _min_prec, ratio


class LoopMatrix:
    __slots__ = ("n", "ram", "prec", "rows")
    __hash__ = None

    def __init__(self, rows):
        rows = [list(r) for r in rows]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        ram = 1
        prec = None
        for r in rows:
            for s in r:
                if not isinstance(s, PuiseuxSeries):
                    raise TypeError("entries must be PuiseuxSeries")
                ram = math.lcm(ram, s.ram)
                prec = _min_prec(prec, s.prec)
        self.n = n
        self.ram = ram
        self.prec = prec
        self.rows = tuple(
            tuple(s.with_ram(ram).truncated(prec) for s in r) for r in rows
        )

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, n, ram=1, prec=None):
        return cls([[PuiseuxSeries.zero(ram, prec)] * n for _ in range(n)])

    @classmethod
    def identity(cls, n, ram=1, prec=None):
        return cls.diagonal([1] * n, ram=ram, prec=prec)

    @classmethod
    def diagonal(cls, values, ram=1, prec=None):
        n = len(values)
        rows = [[PuiseuxSeries.zero(ram, prec) for _ in range(n)] for _ in range(n)]
        for i, v in enumerate(values):
            if isinstance(v, PuiseuxSeries):
                rows[i][i] = v.truncated(prec)
            else:
                rows[i][i] = PuiseuxSeries.constant(v, ram, prec)
        return cls(rows)

    @classmethod
    def from_entries(cls, n, entries, ram=1, prec=None):
        """entries: dict (i, j) -> PuiseuxSeries | scalar."""
        rows = [[PuiseuxSeries.zero(ram, prec) for _ in range(n)] for _ in range(n)]
        for (i, j), v in entries.items():
            if not isinstance(v, PuiseuxSeries):
                v = PuiseuxSeries.constant(v, ram, prec)
            rows[i][j] = v
        return cls(rows)

    @classmethod
    def elementary(cls, n, i, j, exponent=0, coeff=1, prec=None):
        """coeff * z^exponent * E_ij."""
        s = PuiseuxSeries.z_pow(ratio(exponent), prec=prec, coeff=coeff)
        return cls.from_entries(n, {(i, j): s}, ram=s.ram, prec=prec)

    @classmethod
    def from_constant(cls, rows, ram=1, prec=None):
        """Matrix of constants (rationals / Cyclotomic)."""
        return cls(
            [[PuiseuxSeries.constant(x, ram, prec) for x in r] for r in rows]
        )

    # -- access ---------------------------------------------------------------

    def entry(self, i, j) -> PuiseuxSeries:
        return self.rows[i][j]

    def entries(self):
        for i in range(self.n):
            for j in range(self.n):
                yield i, j, self.rows[i][j]

    def constant_part(self):
        """The z^0 coefficients as a k-matrix (list of lists of Cyclotomic)."""
        return [[self.rows[i][j].coeff(0) for j in range(self.n)] for i in range(self.n)]

    # -- structure -----------------------------------------------------------

    def with_ram(self, e):
        if e == self.ram:
            return self
        return LoopMatrix([[s.with_ram(math.lcm(e, self.ram)) for s in r] for r in self.rows])

    def truncated(self, prec):
        if prec is None or (self.prec is not None and self.prec <= ratio(prec)):
            return self
        return LoopMatrix([[s.truncated(prec) for s in r] for r in self.rows])

    def map(self, f):
        return LoopMatrix([[f(s) for s in r] for r in self.rows])

    def is_zero(self) -> bool:
        return all(s.is_zero() for _, _, s in self.entries())

    def is_exact(self) -> bool:
        return self.prec is None

    def valuation(self):
        vals = [s.valuation() for _, _, s in self.entries() if s.valuation() is not None]
        return min(vals) if vals else None

    def max_exponent(self):
        tops = [max(s.terms) for _, _, s in self.entries() if s.terms]
        return max(tops) if tops else None

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return LoopMatrix(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)]
        )

    def __sub__(self, other):
        other = self._coerce(other)
        return LoopMatrix(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)]
        )

    def __neg__(self):
        return self.map(lambda s: -s)

    def _coerce(self, other):
        if isinstance(other, LoopMatrix):
            if other.n != self.n:
                raise ValueError("size mismatch")
            return other
        raise TypeError("expected LoopMatrix")

    def __mul__(self, other):
        if isinstance(other, LoopMatrix):
            if other.n != self.n:
                raise ValueError("size mismatch")
            n = self.n
            return LoopMatrix(
                [
                    [
                        sum(
                            (self.rows[i][k] * other.rows[k][j] for k in range(n)),
                            PuiseuxSeries.zero(),
                        )
                        for j in range(n)
                    ]
                    for i in range(n)
                ]
            )
        if isinstance(other, PuiseuxSeries):
            return self.map(lambda s: s * other)
        return self.map(lambda s: s.scale(other))

    def __rmul__(self, other):
        if isinstance(other, LoopMatrix):
            return other.__mul__(self)
        return self.__mul__(other)

    def scale(self, c):
        return self.map(lambda s: s.scale(c))

    def shift(self, q):
        """Multiply every entry by z^q."""
        return self.map(lambda s: s.shift(q))

    def tau(self):
        return self.map(lambda s: s.tau())

    def galois(self):
        e = self.ram
        return self.map(lambda s: s.with_ram(e).galois())

    def trace(self) -> PuiseuxSeries:
        return sum(
            (self.rows[i][i] for i in range(self.n)), PuiseuxSeries.zero(self.ram, self.prec)
        )

    def transpose(self):
        return LoopMatrix(list(map(list, zip(*self.rows))))

    def commutator(self, other):
        return self * other - other * self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = LoopMatrix.identity(self.n, self.ram)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    # -- inversion -------------------------------------------------------------

    def inverse(self, prec=None) -> "LoopMatrix":
        """Gauss-Jordan inverse.

        Works exactly whenever the eliminations only divide by single-term
        series (permutations, shears, constants, triangular combinations);
        otherwise the matrix must carry (or be given) a finite truncation.
        """
        work = self if prec is None else self.truncated(prec)
        n = self.n
        a = [[work.rows[i][j] for j in range(n)] for i in range(n)]
        inv = [
            [
                PuiseuxSeries.one(work.ram, work.prec)
                if i == j
                else PuiseuxSeries.zero(work.ram, work.prec)
                for j in range(n)
            ]
            for i in range(n)
        ]
        for col in range(n):
            piv = None
            best = None
            for i in range(col, n):
                s = a[i][col]
                v = s.valuation()
                if v is None:
                    continue
                key = (v, len(s.terms) > 1)
                if best is None or key < best:
                    best, piv = key, i
            if piv is None:
                raise ZeroDivisionError("matrix not invertible to working precision")
            a[col], a[piv] = a[piv], a[col]
            inv[col], inv[piv] = inv[piv], inv[col]
            pivot = a[col][col]
            pinv = pivot.invert()
            a[col] = [s * pinv for s in a[col]]
            inv[col] = [s * pinv for s in inv[col]]
            for i in range(n):
                if i != col and not a[i][col].is_zero():
                    f = a[i][col]
                    a[i] = [x - f * y for x, y in zip(a[i], a[col])]
                    inv[i] = [x - f * y for x, y in zip(inv[i], inv[col])]
        return LoopMatrix(inv)

    # -- pairings ---------------------------------------------------------------

    def residue_pairing(self, other) -> Cyclotomic:
        """<A, B> = Res tr(A B) dz/z, i.e. the z^0 coefficient of tr(AB)."""
        tr = (self * other).trace()
        return tr.coeff(0)

    # -- comparison ---------------------------------------------------------------

    def agrees_with(self, other) -> bool:
        return (self - other).is_zero()

    def __eq__(self, other):
        if not isinstance(other, LoopMatrix):
            return NotImplemented
        return self.n == other.n and all(
            a == b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb)
        )

    def __repr__(self):
        body = "; ".join(
            ", ".join(str(s) for s in row) for row in self.rows
        )
        return f"LoopMatrix[{body}]"


def matrix_exp(x: LoopMatrix) -> LoopMatrix:
    """exp of a matrix whose powers eventually vanish below the truncation.

    Valid for positive-valuation input (finitely many terms reach any given
    truncation) and for nilpotent input.  Exact nilpotent arguments give an
    exact result; otherwise the input must carry a finite truncation.
    """
    v = x.valuation()
    if v is None:
        return LoopMatrix.identity(x.n, x.ram, x.prec)
    if v <= 0 and x.prec is None:
        # only terminates if nilpotent; cap by dimension
        acc = LoopMatrix.identity(x.n, x.ram)
        term = LoopMatrix.identity(x.n, x.ram)
        for k in range(1, x.n + 1):
            term = term * x * Fraction(1, k)
            if term.is_zero():
                return acc
            acc = acc + term
        if not (term * x).is_zero():
            raise InsufficientPrecision(
                "exp of an exact non-nilpotent matrix needs a truncation"
            )
        return acc
    # finite truncation: summands are cut at the target truncation and die
    # once their exponents pass it (positive valuation, or homogeneous
    # positive grade with bounded exponent spread)
    acc = LoopMatrix.identity(x.n, x.ram, x.prec)
    term = LoopMatrix.identity(x.n, x.ram, x.prec)
    k = 0
    while True:
        k += 1
        term = (term * x * Fraction(1, k)).truncated(x.prec)
        if term.is_zero():
            break
        acc = acc + term
        if k > 10000:
            raise InsufficientPrecision("exp argument does not vanish under powers")
    return acc


def char_poly_series(m: LoopMatrix):
    """det(tI - M) over the series ring, ascending coefficient list."""
    n = m.n
    coeffs = [PuiseuxSeries.zero(m.ram, m.prec) for _ in range(n)] + [
        PuiseuxSeries.one(m.ram)
    ]
    acc = LoopMatrix.identity(n, m.ram)
    for k in range(1, n + 1):
        am = m * acc
        tr = am.trace()
        c = tr * Fraction(-1, k)
        coeffs[n - k] = c
        acc = am + LoopMatrix.diagonal([c] * n, ram=am.ram)
    return coeffs
