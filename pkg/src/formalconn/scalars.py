"""Exact scalars: rationals, cyclotomic numbers and truncated Puiseux series.

The coefficient field is Q(zeta_m), stored in the power basis of
Q[x]/Phi_m(x) with Phi_m the m-th cyclotomic polynomial.  Mixed orders are
combined by embedding into Q(zeta_lcm).

A Puiseux series is a finite map exponent -> coefficient together with a
ramification index e (all exponent denominators divide e) and a truncation
order ``prec``: the series stands for itself plus O(z^prec).  ``prec=None``
means the series is exact (a Laurent polynomial in z^(1/e)).  Every operation
propagates the truncation pessimistically; reads at or beyond the truncation
raise InsufficientPrecision instead of silently returning zero.

The Euler operator tau acts by tau(c z^q) = q c z^q; on a degree-e extension
it is (1/e) u d/du for u = z^(1/e).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import InsufficientPrecision, ZeroSeries

Rat = Fraction


def ratio(x) -> Fraction:
    """Coerce an int, string or Fraction to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


# ---------------------------------------------------------------------------
# dense polynomial helpers over Fraction (ascending coefficients)


def _poly_trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1) if a and b else []
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                if cb:
                    out[i + j] += ca * cb
    return _poly_trim(out)


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    for i, cb in enumerate(b):
        a[i] -= cb
    return _poly_trim(a)


def _poly_divmod(a, b):
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv_lead = 1 / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv_lead
        if c:
            q[i] = c
            for j, cb in enumerate(b):
                a[i + j] -= c * cb
    return _poly_trim(q), _poly_trim(a)


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> tuple[Fraction, ...]:
    """Coefficients of Phi_m, ascending, exact."""
    if m < 1:
        raise ValueError("order must be positive")
    p = [Fraction(-1)] + [Fraction(0)] * (m - 1) + [Fraction(1)]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            p, rem = _poly_divmod(p, list(cyclotomic_polynomial(d)))
            assert not rem
    return tuple(p)


@lru_cache(maxsize=None)
def _phi_degree(m: int) -> int:
    return len(cyclotomic_polynomial(m)) - 1


def _reduce_mod_phi(coeffs, m):
    """Reduce an ascending coefficient list modulo Phi_m; fixed length phi(m)."""
    phi = cyclotomic_polynomial(m)
    deg = len(phi) - 1
    coeffs = list(coeffs)
    for i in range(len(coeffs) - 1, deg - 1, -1):
        c = coeffs[i]
        if c:
            for j in range(deg + 1):
                coeffs[i - deg + j] -= c * phi[j]
        coeffs.pop()
    while len(coeffs) < deg:
        coeffs.append(Fraction(0))
    return coeffs


class Cyclotomic:
    """An element of Q(zeta_m) in the power basis of Q[x]/Phi_m(x).

    Arithmetic between different orders embeds both into Q(zeta_lcm).
    Elements whose tail coefficients vanish are stored at order 1, so plain
    rationals always compare and print as rationals.
    """

    __slots__ = ("order", "coeffs")
    __hash__ = None  # cross-order equality makes a consistent hash impractical

    def __init__(self, order: int, coeffs):
        if order == 1 and len(coeffs) == 1 and isinstance(coeffs[0], Fraction):
            self.order = 1
            self.coeffs = (coeffs[0],)
            return
        coeffs = [ratio(c) for c in coeffs]
        deg = _phi_degree(order)
        if len(coeffs) != deg:
            coeffs = _reduce_mod_phi(coeffs, order)
        if order > 1 and not any(coeffs[1:]):
            order, coeffs = 1, [coeffs[0]]
        self.order = order
        self.coeffs = tuple(coeffs)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rational(cls, x) -> "Cyclotomic":
        return cls(1, [ratio(x)])

    @classmethod
    def zeta(cls, m: int, power: int = 1) -> "Cyclotomic":
        power %= m
        raw = [Fraction(0)] * (power + 1)
        raw[power] = Fraction(1)
        return cls(m, raw)

    # -- coercion ----------------------------------------------------------

    @staticmethod
    def coerce(x) -> "Cyclotomic":
        if isinstance(x, Cyclotomic):
            return x
        return Cyclotomic.from_rational(ratio(x))

    def _coeffs_at(self, m: int):
        """Reduced coefficient list (length phi(m)) of this element in Q(zeta_m)."""
        if m == self.order:
            return list(self.coeffs)
        if m % self.order != 0:
            raise ValueError("can only promote to a multiple of the order")
        step = m // self.order
        raw = [Fraction(0)] * ((len(self.coeffs) - 1) * step + 1)
        for i, c in enumerate(self.coeffs):
            raw[i * step] += c
        return _reduce_mod_phi(raw, m)

    def _pair(self, other):
        other = Cyclotomic.coerce(other)
        m = math.lcm(self.order, other.order)
        return m, self._coeffs_at(m), other._coeffs_at(m)

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return self.order == 1

    def as_rational(self) -> Fraction:
        if self.order != 1:
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = Cyclotomic.coerce(other)
        if self.order == 1 and other.order == 1:
            return Cyclotomic(1, [self.coeffs[0] + other.coeffs[0]])
        m, a, b = self._pair(other)
        return Cyclotomic(m, [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.order, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-Cyclotomic.coerce(other))

    def __rsub__(self, other):
        return Cyclotomic.coerce(other) - self

    def __mul__(self, other):
        other = Cyclotomic.coerce(other)
        if self.order == 1 and other.order == 1:
            return Cyclotomic(1, [self.coeffs[0] * other.coeffs[0]])
        m, a, b = self._pair(other)
        return Cyclotomic(m, _poly_mul(a, b))

    __rmul__ = __mul__

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero cyclotomic")
        if self.order == 1:
            return Cyclotomic(1, [1 / self.coeffs[0]])
        # extended Euclid in Q[x] against Phi_m
        m = self.order
        r0, r1 = list(cyclotomic_polynomial(m)), _poly_trim(list(self.coeffs))
        s0, s1 = [], [Fraction(1)]
        while len(r1) > 1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
        if not r1:
            raise ZeroDivisionError("element not invertible (not coprime to Phi_m)")
        c = r1[0]
        return Cyclotomic(m, [x / c for x in s1])

    def __truediv__(self, other):
        return self * Cyclotomic.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Cyclotomic.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclotomic.from_rational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            _, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return a == b

    def __repr__(self):
        return f"Cyclotomic({self!s})"

    def __str__(self):
        if self.order == 1:
            return str(self.coeffs[0])
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                parts.append(str(c))
            else:
                z = f"zeta_{self.order}" + (f"^{i}" if i > 1 else "")
                if c == 1:
                    parts.append(z)
                elif c == -1:
                    parts.append(f"-{z}")
                else:
                    parts.append(f"{c}*{z}")
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


CYC_ZERO = Cyclotomic(1, [Fraction(0)])
CYC_ONE = Cyclotomic(1, [Fraction(1)])


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class PuiseuxSeries:
    """Truncated formal series in z^(1/ram) with Cyclotomic coefficients."""

    __slots__ = ("ram", "prec", "terms")
    __hash__ = None

    def __init__(self, terms=None, ram: int = 1, prec=None):
        if prec is not None:
            prec = ratio(prec)
        clean: dict[Fraction, Cyclotomic] = {}
        for q, c in (terms or {}).items():
            q = ratio(q)
            c = Cyclotomic.coerce(c)
            if c.is_zero():
                continue
            if prec is not None and q >= prec:
                continue
            if ram % q.denominator != 0:
                raise ValueError(f"exponent {q} not supported by ramification {ram}")
            clean[q] = clean[q] + c if q in clean else c
        if prec is not None and (prec * ram).denominator != 1:
            raise ValueError(f"precision {prec} not in (1/{ram})Z")
        self.ram = ram
        self.prec = prec
        self.terms = clean

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, ram: int = 1, prec=None) -> "PuiseuxSeries":
        return cls({}, ram, prec)

    @classmethod
    def constant(cls, c, ram: int = 1, prec=None) -> "PuiseuxSeries":
        return cls({Fraction(0): Cyclotomic.coerce(c)}, ram, prec)

    @classmethod
    def one(cls, ram: int = 1, prec=None) -> "PuiseuxSeries":
        return cls.constant(1, ram, prec)

    @classmethod
    def z_pow(cls, q, ram=None, prec=None, coeff=1) -> "PuiseuxSeries":
        q = ratio(q)
        if ram is None:
            ram = q.denominator
        return cls({q: Cyclotomic.coerce(coeff)}, ram, prec)

    # -- structure -----------------------------------------------------------

    def with_ram(self, e: int) -> "PuiseuxSeries":
        if e == self.ram:
            return self
        if e % self.ram != 0:
            raise ValueError("ramification can only increase to a multiple")
        return PuiseuxSeries(self.terms, e, self.prec)

    def truncated(self, prec) -> "PuiseuxSeries":
        """Weaken the truncation to prec (snapped down to the (1/ram)-grid)."""
        if prec is not None:
            prec = ratio(prec)
            if (prec * self.ram).denominator != 1:
                prec = Fraction(math.floor(prec * self.ram), self.ram)
        return PuiseuxSeries(self.terms, self.ram, _min_prec(self.prec, prec))

    def items(self):
        return sorted(self.terms.items())

    def valuation(self):
        """Least exponent with a nonzero coefficient, or None ("bottom"):
        the series vanishes to its truncation order."""
        if not self.terms:
            return None
        return min(self.terms)

    def leading(self):
        v = self.valuation()
        if v is None:
            raise ZeroSeries("zero series has no leading term")
        return v, self.terms[v]

    def coeff(self, q) -> Cyclotomic:
        q = ratio(q)
        if self.prec is not None and q >= self.prec:
            raise InsufficientPrecision(
                f"coefficient at z^{q} is beyond truncation O(z^{self.prec})",
                needed=q,
            )
        return self.terms.get(q, CYC_ZERO)

    def is_zero(self) -> bool:
        """True when no terms are stored (zero up to the truncation order)."""
        return not self.terms

    def is_exact(self) -> bool:
        return self.prec is None

    # -- arithmetic -----------------------------------------------------------

    def _common(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries.constant(other, self.ram)
        ram = math.lcm(self.ram, other.ram)
        return self.with_ram(ram), other.with_ram(ram)

    def __add__(self, other):
        a, b = self._common(other)
        prec = _min_prec(a.prec, b.prec)
        terms = dict(a.terms)
        for q, c in b.terms.items():
            terms[q] = terms[q] + c if q in terms else c
        return PuiseuxSeries(terms, a.ram, prec)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries({q: -c for q, c in self.terms.items()}, self.ram, self.prec)

    def __sub__(self, other):
        return self + (-(self._common(other)[1]))

    def __rsub__(self, other):
        return (-self) + other

    def _effective_val(self):
        # for precision propagation: a zero-to-truncation factor acts like O(z^prec)
        v = self.valuation()
        if v is not None:
            return v
        return self.prec

    def __mul__(self, other):
        a, b = self._common(other)
        if (a.is_zero() and a.prec is None) or (b.is_zero() and b.prec is None):
            return PuiseuxSeries.zero(a.ram)
        bounds = []
        if a.prec is not None:
            vb = b._effective_val()
            bounds.append(a.prec + vb)
        if b.prec is not None:
            va = a._effective_val()
            bounds.append(b.prec + va)
        prec = min(bounds) if bounds else None
        terms: dict[Fraction, Cyclotomic] = {}
        for q1, c1 in a.terms.items():
            for q2, c2 in b.terms.items():
                q = q1 + q2
                if prec is not None and q >= prec:
                    continue
                c = c1 * c2
                terms[q] = terms[q] + c if q in terms else c
        return PuiseuxSeries(terms, a.ram, prec)

    __rmul__ = __mul__

    def scale(self, c) -> "PuiseuxSeries":
        c = Cyclotomic.coerce(c)
        if c.is_zero():
            return PuiseuxSeries.zero(self.ram, self.prec)
        return PuiseuxSeries({q: t * c for q, t in self.terms.items()}, self.ram, self.prec)

    def shift(self, q) -> "PuiseuxSeries":
        """Multiply by z^q."""
        q = ratio(q)
        ram = math.lcm(self.ram, q.denominator)
        prec = None if self.prec is None else self.prec + q
        return PuiseuxSeries({p + q: c for p, c in self.terms.items()}, ram, prec)

    def tau(self) -> "PuiseuxSeries":
        """Euler operator: c z^q -> q c z^q.  Truncation unchanged."""
        return PuiseuxSeries(
            {q: c * q for q, c in self.terms.items() if q != 0}, self.ram, self.prec
        )

    def invert(self, prec=None) -> "PuiseuxSeries":
        """Multiplicative inverse to the propagated truncation.

        An exact multi-term series has an infinite inverse; pass ``prec`` to
        choose the truncation in that case.
        """
        v = self.valuation()
        if v is None:
            raise ZeroSeries("no nonzero term below the truncation order")
        lead = self.terms[v]
        if self.prec is None and len(self.terms) == 1:
            out = PuiseuxSeries({-v: lead.inverse()}, self.ram)
            return out if prec is None else out.truncated(prec)
        target = self.prec - 2 * v if self.prec is not None else None
        target = _min_prec(target, ratio(prec) if prec is not None else None)
        if target is None:
            raise InsufficientPrecision(
                "inverse of an exact multi-term series needs an explicit truncation"
            )
        inv0 = PuiseuxSeries({-v: lead.inverse()}, self.ram)
        # relative error r = 1 - self*inv0 has positive valuation
        rel = target + v
        r = (PuiseuxSeries.one(self.ram) - self.truncated(target + 2 * v) * inv0).truncated(rel)
        acc = PuiseuxSeries.one(self.ram, rel)
        term = PuiseuxSeries.one(self.ram, rel)
        while True:
            term = (term * r).truncated(rel)
            if term.is_zero():
                break
            acc = acc + term
        return (acc * inv0).truncated(target)

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        out = PuiseuxSeries.one(self.ram)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def galois(self) -> "PuiseuxSeries":
        """The fixed Galois generator: u -> zeta_e u for u = z^(1/e), e = ram."""
        e = self.ram
        return PuiseuxSeries(
            {q: c * Cyclotomic.zeta(e, int(q * e) % e) for q, c in self.terms.items()},
            e,
            self.prec,
        )

    # -- comparison -----------------------------------------------------------

    def agrees_with(self, other) -> bool:
        """Equal up to the common truncation order."""
        return (self - other).is_zero()

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            if not isinstance(other, (int, Fraction, Cyclotomic)):
                return NotImplemented
            other = PuiseuxSeries.constant(other, self.ram)
        return self.terms == other.terms and self.prec == other.prec

    def __repr__(self):
        return f"PuiseuxSeries({self!s})"

    def __str__(self):
        from .textio import format_series

        return format_series(self)


def series_div(a: PuiseuxSeries, b: PuiseuxSeries, prec=None) -> PuiseuxSeries:
    return a * b.invert(prec=prec)
