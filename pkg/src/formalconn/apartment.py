"""The standard apartment: point gradings of gl_n(F), H_x, affine Weyl group.

A rational point x of the standard apartment grades the loop algebra by
grade(E_ij z^m) = m + x_i - x_j; the pieces are exactly the eigenspaces of
tau + ad(x) and assemble into the depth filtration.  The affine Weyl group
acts on points by (mu, w).x = w(x) + mu, intertwining the gradings through
the representative z^(-mu) P_w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InsufficientPrecision, NotInHx, ZeroInput
from .matrices import LoopMatrix
from .scalars import Cyclotomic, PuiseuxSeries, ratio


class ApartmentPoint:
    """A rational point of the standard apartment, as coordinates in Q^n.

    The full coordinate vector is kept (enlarged building); adding a constant
    to every coordinate changes no root value and hence no grading.
    """

    __slots__ = ("coords",)

    def __init__(self, coords):
        self.coords = tuple(ratio(c) for c in coords)

    @property
    def n(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __eq__(self, other):
        if isinstance(other, ApartmentPoint):
            return self.coords == other.coords
        return NotImplemented

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return "ApartmentPoint(" + ", ".join(str(c) for c in self.coords) + ")"

    def shifted_center(self, c) -> "ApartmentPoint":
        c = ratio(c)
        return ApartmentPoint([x + c for x in self.coords])

    def normalized(self) -> "ApartmentPoint":
        """Translate so the first coordinate is 0."""
        return self.shifted_center(-self.coords[0])

    def spread(self) -> Fraction:
        return max(self.coords) - min(self.coords)

    def diag_matrix(self, ram=1, prec=None) -> LoopMatrix:
        return LoopMatrix.diagonal(list(self.coords), ram=ram, prec=prec)

    def denominator(self) -> int:
        d = 1
        for c in self.coords:
            d = math.lcm(d, c.denominator)
        return d


def grade_of_elementary(i: int, j: int, m, x: ApartmentPoint) -> Fraction:
    """Grade of E_ij z^m at x."""
    return ratio(m) + x[i] - x[j]


@dataclass
class GradedDecomposition:
    """Splitting of a matrix into homogeneous pieces for a point grading.

    Components are exact (they collect finitely many stored terms); grades at
    or beyond ``grade_prec`` are unreadable at the matrix's truncation.
    """

    x: ApartmentPoint
    n: int
    ram: int
    components: dict
    grade_prec: Fraction | None

    def grades(self):
        return sorted(self.components)

    def component(self, r) -> LoopMatrix:
        r = ratio(r)
        if self.grade_prec is not None and r >= self.grade_prec:
            raise InsufficientPrecision(
                f"grade {r} component unreadable beyond grade O({self.grade_prec})",
                needed=r,
            )
        if r in self.components:
            return self.components[r]
        return LoopMatrix.zero(self.n, self.ram)

    def min_grade(self):
        return min(self.components) if self.components else None

    def total(self) -> LoopMatrix:
        out = LoopMatrix.zero(self.n, self.ram)
        for c in self.components.values():
            out = out + c
        return out


def grade_precision(m: LoopMatrix, x: ApartmentPoint):
    if m.prec is None:
        return None
    return m.prec - x.spread()


def mp_decompose(m: LoopMatrix, x: ApartmentPoint) -> GradedDecomposition:
    """Split m by grade at x.  Each component is an eigenvector of
    tau + ad(x) with its grade as eigenvalue."""
    if x.n != m.n:
        raise ValueError("point size does not match matrix size")
    buckets: dict[Fraction, dict] = {}
    for i, j, s in m.entries():
        for q, c in s.terms.items():
            r = q + x[i] - x[j]
            buckets.setdefault(r, {})[(i, j)] = PuiseuxSeries({q: c}, m.ram)
    components = {
        r: LoopMatrix.from_entries(m.n, entries, ram=m.ram)
        for r, entries in buckets.items()
    }
    return GradedDecomposition(x, m.n, m.ram, components, grade_precision(m, x))


def graded_component(m: LoopMatrix, x: ApartmentPoint, r) -> LoopMatrix:
    """The grade-r part of m at x, without building the full decomposition."""
    r = ratio(r)
    gp = grade_precision(m, x)
    if gp is not None and r >= gp:
        raise InsufficientPrecision(f"grade {r} unreadable", needed=r)
    entries = {}
    for i, j, s in m.entries():
        q = r - x[i] + x[j]
        if q in s.terms:
            entries[(i, j)] = PuiseuxSeries({q: s.terms[q]}, m.ram)
    return LoopMatrix.from_entries(m.n, entries, ram=m.ram)


def min_grade(m: LoopMatrix, x: ApartmentPoint):
    """Least grade with a nonzero component, or None for a zero matrix."""
    best = None
    for i, j, s in m.entries():
        v = s.valuation()
        if v is None:
            continue
        r = v + x[i] - x[j]
        if best is None or r < best:
            best = r
    return best


def mp_depth(m: LoopMatrix, x: ApartmentPoint) -> Fraction:
    g = min_grade(m, x)
    if g is None:
        raise ZeroInput("depth of a matrix with no terms below its truncation")
    return g


def critical_numbers(x: ApartmentPoint):
    """Fractional parts of all root and weight values m + x_i - x_j, one period."""
    out = {Fraction(0)}
    for i in range(x.n):
        for j in range(x.n):
            out.add((x[i] - x[j]) % 1)
    return sorted(out)


def critical_grades(x: ApartmentPoint, lo, hi):
    """All grades in (lo, hi] congruent mod 1 to a critical number, ascending."""
    lo, hi = ratio(lo), ratio(hi)
    crits = critical_numbers(x)
    out = []
    base = math.floor(lo)
    k = base
    while k <= hi:
        for c in crits:
            g = k + c
            if lo < g <= hi:
                out.append(g)
        k += 1
    return sorted(out)


def graded_basis(x: ApartmentPoint, r, ram: int = 1):
    """Triples (i, j, m) with grade(E_ij z^m) = r and m in (1/ram)Z."""
    r = ratio(r)
    out = []
    for i in range(x.n):
        for j in range(x.n):
            m = r - x[i] + x[j]
            if (m * ram).denominator == 1:
                out.append((i, j, m))
    return out


def graded_dim(x: ApartmentPoint, r, ram: int = 1) -> int:
    return len(graded_basis(x, r, ram))


def h_x_roots(x: ApartmentPoint):
    """Roots (i, j), i != j, with x_i - x_j integral; H_x is generated by the
    diagonal torus and these root groups."""
    return {
        (i, j)
        for i in range(x.n)
        for j in range(x.n)
        if i != j and (x[i] - x[j]).denominator == 1
    }


def theta_lift_torus(diag_values, x: ApartmentPoint, prec=None) -> LoopMatrix:
    """Lift of a constant diagonal torus element: unchanged."""
    return LoopMatrix.diagonal(list(diag_values), prec=prec)


def theta_lift_root(i: int, j: int, c, x: ApartmentPoint, prec=None) -> LoopMatrix:
    """Lift of the root-group element U_(i,j)(c): I + c z^(-(x_i - x_j)) E_ij."""
    alpha = x[i] - x[j]
    if alpha.denominator != 1:
        raise NotInHx(f"root ({i},{j}) has non-integral value {alpha} at x")
    return LoopMatrix.identity(x.n, prec=prec) + LoopMatrix.elementary(
        x.n, i, j, exponent=-alpha, coeff=c, prec=prec
    )


def lift_constant(rows, x: ApartmentPoint, prec=None) -> LoopMatrix:
    """Lift of a constant H_x matrix h: z^(-x) h z^x.

    Every nonzero off-diagonal entry must sit on an H_x root.
    """
    n = x.n
    entries = {}
    for i in range(n):
        for j in range(n):
            c = Cyclotomic.coerce(rows[i][j])
            if c.is_zero():
                continue
            alpha = x[i] - x[j]
            if alpha.denominator != 1:
                raise NotInHx(f"entry ({i},{j}) off H_x: root value {alpha}")
            entries[(i, j)] = PuiseuxSeries.z_pow(-alpha, prec=prec, coeff=c)
    return LoopMatrix.from_entries(n, entries, prec=prec)


class AffineWeylElt:
    """(mu, w) with the group law (mu1, w1)(mu2, w2) = (mu1 + w1 mu2, w1 w2).

    ``perm`` is one-line notation: w sends i to perm[i].  The point action is
    x -> w(x) + mu and is realized on matrices by Ad(z^(-mu) P_w).
    """

    __slots__ = ("perm", "transl")

    def __init__(self, perm, transl):
        self.perm = tuple(perm)
        self.transl = tuple(int(t) for t in transl)
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError("not a permutation")
        if len(self.transl) != len(self.perm):
            raise ValueError("length mismatch")

    @classmethod
    def identity(cls, n):
        return cls(range(n), [0] * n)

    @property
    def n(self):
        return len(self.perm)

    def permute(self, vec):
        """w acting on coordinate vectors: (w v)_{w(i)} = v_i."""
        out = [None] * self.n
        for i, wi in enumerate(self.perm):
            out[wi] = vec[i]
        return tuple(out)

    def __mul__(self, other):
        if self.n != other.n:
            raise ValueError("size mismatch")
        perm = tuple(self.perm[other.perm[i]] for i in range(self.n))
        transl = tuple(a + b for a, b in zip(self.transl, self.permute(other.transl)))
        return AffineWeylElt(perm, transl)

    def inverse(self):
        inv_perm = [0] * self.n
        for i, wi in enumerate(self.perm):
            inv_perm[wi] = i
        inv_transl = [-self.transl[self.perm[i]] for i in range(self.n)]
        return AffineWeylElt(inv_perm, inv_transl)

    def act(self, x: ApartmentPoint) -> ApartmentPoint:
        moved = self.permute(x.coords)
        return ApartmentPoint([c + t for c, t in zip(moved, self.transl)])

    def matrix(self, ram=1, prec=None) -> LoopMatrix:
        """The representative z^(-mu) P_w; Ad of it maps grade-r pieces at x
        to grade-r pieces at self.act(x)."""
        entries = {}
        for i, wi in enumerate(self.perm):
            entries[(wi, i)] = PuiseuxSeries.z_pow(-self.transl[wi], prec=prec)
        return LoopMatrix.from_entries(self.n, entries, ram=ram, prec=prec)

    def __eq__(self, other):
        if not isinstance(other, AffineWeylElt):
            return NotImplemented
        return self.perm == other.perm and self.transl == other.transl

    def __repr__(self):
        return f"AffineWeylElt(perm={self.perm}, transl={self.transl})"


def affine_act(w: AffineWeylElt, x: ApartmentPoint) -> ApartmentPoint:
    return w.act(x)


def pairing(a: LoopMatrix, b: LoopMatrix) -> Cyclotomic:
    """Res tr(ab) dz/z."""
    return a.residue_pairing(b)
