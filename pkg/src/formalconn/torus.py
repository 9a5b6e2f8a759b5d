"""Block-Coxeter maximal tori: gradings, corestriction, compatible points.

A conjugacy class of maximal tori in GL_n(F) is a cycle type; its canonical
representative here is the block-diagonal product of Coxeter tori with block
uniformizers w_j = z E_(last,first) + sum E_(i,i+1).  The block base point
(0, -1/e_j, ..., -(e_j-1)/e_j) is graded compatible with that embedding, and
the tame corestriction pi_s is the trace-orthogonal projection onto the
Cartan s = (+)_j F[w_j].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .apartment import (
    AffineWeylElt,
    ApartmentPoint,
    critical_grades,
    graded_component,
    grade_precision,
    min_grade,
    mp_decompose,
)
from .errors import (
    BaseFieldError,
    InsufficientPrecision,
    NotCompatible,
    NotRegularClass,
)
from .klinear import kmat, mat_rank, nth_root_in_cyclotomics
from .matrices import LoopMatrix, matrix_exp
from .scalars import CYC_ZERO, Cyclotomic, PuiseuxSeries, ratio


class WeylClass:
    """A conjugacy class in S_n, as a cycle type (weakly decreasing)."""

    __slots__ = ("n", "cycle_type")

    def __init__(self, n: int, cycle_type):
        cycle_type = tuple(sorted((int(e) for e in cycle_type), reverse=True))
        if sum(cycle_type) != n or any(e < 1 for e in cycle_type):
            raise ValueError(f"{cycle_type} is not a partition of {n}")
        self.n = n
        self.cycle_type = cycle_type

    def __eq__(self, other):
        return (
            isinstance(other, WeylClass)
            and (self.n, self.cycle_type) == (other.n, other.cycle_type)
        )

    def __hash__(self):
        return hash((self.n, self.cycle_type))

    def __repr__(self):
        return f"WeylClass({list(self.cycle_type)})"

    def representative_permutation(self):
        """One-line permutation built from consecutive cycles."""
        perm = []
        start = 0
        for e in self.cycle_type:
            perm.extend([start + (i + 1) % e for i in range(e)])
            start += e
        return tuple(perm)

    def is_regular(self) -> bool:
        """Cycle types of the two regular shapes: all k-cycles, or all
        k-cycles plus one fixed point."""
        ct = self.cycle_type
        if all(e == ct[0] for e in ct):
            return True
        return ct[-1] == 1 and all(e == ct[0] for e in ct[:-1]) and ct[0] > 1

    def order(self) -> int:
        return math.lcm(*self.cycle_type)


def regular_classes(n: int):
    """The regular cycle types in S_n: n/k k-cycles, or (n-1)/k k-cycles
    plus a 1-cycle."""
    if n < 1:
        raise ValueError("n must be positive")
    out = set()
    for k in range(1, n + 1):
        if n % k == 0:
            out.add(WeylClass(n, [k] * (n // k)))
        if (n - 1) % k == 0 and k > 1:
            out.add(WeylClass(n, [k] * ((n - 1) // k) + [1]))
    if n > 1:
        out.add(WeylClass(n, [1] * n))
    return sorted(out, key=lambda c: c.cycle_type, reverse=True)


@dataclass(frozen=True)
class DepthFamily:
    """Admissible depths of regular strata for a regular class: positive
    r = m/e with gcd(m, e) = 1, plus r = 0 for the identity class only."""

    modulus: int
    zero_allowed: bool

    def contains(self, r) -> bool:
        r = ratio(r)
        if r < 0:
            return False
        if r == 0:
            return self.zero_allowed
        return r.denominator == self.modulus and math.gcd(r.numerator, self.modulus) == 1

    def first(self, count: int):
        if self.modulus == 1:
            start = [Fraction(0)] if self.zero_allowed else []
            k = 1
            while len(start) < count:
                start.append(Fraction(k))
                k += 1
            return start[:count]
        out = []
        m = 1
        while len(out) < count:
            if math.gcd(m, self.modulus) == 1:
                out.append(Fraction(m, self.modulus))
            m += 1
        return out


def regular_depths(cls: WeylClass) -> DepthFamily:
    if not cls.is_regular():
        raise NotRegularClass(f"{cls} is not regular")
    k = cls.cycle_type[0]
    return DepthFamily(modulus=k, zero_allowed=(k == 1))


class TorusData:
    """The block-Coxeter torus of a cycle type.

    blocks: consecutive index ranges; uniformizers: the per-block matrices
    w_j with w_j^{e_j} = z * (block identity); base_point: the graded
    compatible point with block coordinates (0, -1/e_j, ..., -(e_j-1)/e_j).
    """

    def __init__(self, cls_or_partition):
        if isinstance(cls_or_partition, WeylClass):
            cls = cls_or_partition
        else:
            part = tuple(cls_or_partition)
            cls = WeylClass(sum(part), part)
        self.cls = cls
        self.n = cls.n
        self.block_sizes = cls.cycle_type
        self.e = math.lcm(*self.block_sizes)
        starts = []
        pos = 0
        for e in self.block_sizes:
            starts.append(pos)
            pos += e
        self.block_starts = tuple(starts)
        coords = []
        for e in self.block_sizes:
            coords.extend([Fraction(-i, e) for i in range(e)])
        self.base_point = ApartmentPoint(coords)

    def __repr__(self):
        return f"TorusData({list(self.block_sizes)})"

    @property
    def num_blocks(self):
        return len(self.block_sizes)

    def block_range(self, j):
        s = self.block_starts[j]
        return range(s, s + self.block_sizes[j])

    def uniformizer(self, j) -> LoopMatrix:
        """w_j embedded in gl_n (identity nowhere: zero outside the block)."""
        e = self.block_sizes[j]
        s = self.block_starts[j]
        entries = {}
        for i in range(e - 1):
            entries[(s + i, s + i + 1)] = PuiseuxSeries.one()
        entries[(s + e - 1, s)] = PuiseuxSeries.z_pow(1)
        return LoopMatrix.from_entries(self.n, entries)

    def uniformizer_power(self, j, m: int) -> LoopMatrix:
        """w_j^m as an n x n matrix (zero outside block j); m may be negative."""
        e = self.block_sizes[j]
        s = self.block_starts[j]
        entries = {}
        for a in range(e):
            b = a + m
            exp, col = divmod(b, e)
            entries[(s + a, s + col)] = PuiseuxSeries.z_pow(exp)
        return LoopMatrix.from_entries(self.n, entries)

    def block_identity(self, j) -> LoopMatrix:
        return self.uniformizer_power(j, 0)

    def unit_element(self) -> LoopMatrix:
        """The invertible embedding of w: block-diag of all uniformizers."""
        out = LoopMatrix.zero(self.n)
        for j in range(self.num_blocks):
            out = out + self.uniformizer(j)
        return out

    def grades_in_block(self, j):
        return self.block_sizes[j]

    def s_grades(self, lo, hi):
        """Grades of s in (lo, hi]: all m/e_j, per block, deduplicated."""
        out = set()
        lo, hi = ratio(lo), ratio(hi)
        for e in self.block_sizes:
            m = math.floor(lo * e) + 1
            while Fraction(m, e) <= hi:
                out.add(Fraction(m, e))
                m += 1
        return sorted(out)

    def element(self, coeffs, gprec=None) -> "SElement":
        return SElement(self, coeffs, gprec)

    # -- normalizer generators ----------------------------------------------

    def twist_matrix(self, j) -> LoopMatrix:
        """d_j = diag(1, zeta_e, ..., zeta_e^{e-1}) in block j, identity
        elsewhere; satisfies d_j w_j d_j^{-1} = zeta_e^{-1} w_j."""
        e = self.block_sizes[j]
        vals = []
        for b, eb in enumerate(self.block_sizes):
            for i in range(eb):
                vals.append(Cyclotomic.zeta(e, i) if b == j else Cyclotomic.coerce(1))
        return LoopMatrix.diagonal(vals)

    def swap_matrix(self, j1, j2) -> LoopMatrix:
        """Permutation swapping two equal-size blocks."""
        if self.block_sizes[j1] != self.block_sizes[j2]:
            raise ValueError("can only swap equal-size blocks")
        perm = list(range(self.n))
        for a, b in zip(self.block_range(j1), self.block_range(j2)):
            perm[a], perm[b] = perm[b], perm[a]
        entries = {(perm[i], i): PuiseuxSeries.one() for i in range(self.n)}
        return LoopMatrix.from_entries(self.n, entries)


class SElement:
    """An element of the Cartan s as per-block integer-exponent coefficients.

    coeffs maps (block, m) to the coefficient of w_block^m; gprec bounds the
    known grades: coefficients with m/e_block >= gprec are unknown.
    """

    __slots__ = ("torus", "coeffs", "gprec")
    __hash__ = None

    def __init__(self, torus: TorusData, coeffs, gprec=None):
        clean = {}
        for (j, m), c in coeffs.items():
            c = Cyclotomic.coerce(c)
            if c.is_zero():
                continue
            if gprec is not None and Fraction(m, torus.block_sizes[j]) >= gprec:
                continue
            clean[(j, int(m))] = c
        self.torus = torus
        self.coeffs = clean
        self.gprec = ratio(gprec) if gprec is not None else None

    def is_zero(self):
        return not self.coeffs

    def coeff(self, j, m) -> Cyclotomic:
        g = Fraction(m, self.torus.block_sizes[j])
        if self.gprec is not None and g >= self.gprec:
            raise InsufficientPrecision(f"s-coefficient at grade {g} unreadable", needed=g)
        return self.coeffs.get((j, m), CYC_ZERO)

    def grade_part(self, r) -> "SElement":
        r = ratio(r)
        if self.gprec is not None and r >= self.gprec:
            raise InsufficientPrecision(f"s grade {r} unreadable", needed=r)
        kept = {
            (j, m): c
            for (j, m), c in self.coeffs.items()
            if Fraction(m, self.torus.block_sizes[j]) == r
        }
        return SElement(self.torus, kept)

    def grades(self):
        return sorted(
            {Fraction(m, self.torus.block_sizes[j]) for (j, m) in self.coeffs}
        )

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out[key] + c if key in out else c
        gp = self.gprec if other.gprec is None else (
            other.gprec if self.gprec is None else min(self.gprec, other.gprec)
        )
        return SElement(self.torus, out, gp)

    def __neg__(self):
        return SElement(self.torus, {k: -c for k, c in self.coeffs.items()}, self.gprec)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return SElement(
            self.torus, {k: v * c for k, v in self.coeffs.items()}, self.gprec
        )

    def _check(self, other):
        if self.torus is not other.torus and self.torus.block_sizes != other.torus.block_sizes:
            raise ValueError("mismatched tori")

    def as_matrix(self, prec=None) -> LoopMatrix:
        out = LoopMatrix.zero(self.torus.n)
        for (j, m), c in self.coeffs.items():
            out = out + self.torus.uniformizer_power(j, m).scale(c)
        if self.gprec is not None:
            # entries of a grade-g monomial have exponents within (e-1)/e of g
            slack = max(
                Fraction(e - 1, e) for e in self.torus.block_sizes
            )
            mat_prec = self.gprec - slack
            out = out.truncated(mat_prec)
        if prec is not None:
            out = out.truncated(prec)
        return out

    def __eq__(self, other):
        if not isinstance(other, SElement):
            return NotImplemented
        return self.coeffs == other.coeffs and self.gprec == other.gprec

    def __repr__(self):
        items = ", ".join(
            f"w{j}^{m}:{c}" for (j, m), c in sorted(self.coeffs.items())
        )
        return f"SElement({items or '0'}; gprec={self.gprec})"


def pi_s(torus: TorusData, m: LoopMatrix) -> SElement:
    """Tame corestriction: the trace-orthogonal projection of gl_n onto s.

    Per block j (with diagonal block M_j):
      pi_s(M)_j = sum_k (1/e_j) tr(M_j w_j^{-k}) w_j^k, coefficients read off
    from the trace series.
    """
    coeffs = {}
    gprec = None
    for j in range(torus.num_blocks):
        e = torus.block_sizes[j]
        for k in range(e):
            wk = torus.uniformizer_power(j, -k)
            prod = m * wk
            tr = PuiseuxSeries.zero(m.ram, None)
            for a in torus.block_range(j):
                tr = tr + prod.entry(a, a)
            for q, c in tr.terms.items():
                if q.denominator != 1:
                    continue  # fractional trace exponents never pair into s
                mm = int(q) * e + k
                coeffs[(j, mm)] = coeffs.get((j, mm), CYC_ZERO) + c * Fraction(1, e)
            if tr.prec is not None:
                bound = tr.prec + Fraction(k, e)
                gprec = bound if gprec is None else min(gprec, bound)
    return SElement(torus, coeffs, gprec)


def in_cartan(torus: TorusData, m: LoopMatrix) -> bool:
    """Membership test for s via the projection: pi_s(M) = M identically."""
    proj = pi_s(torus, m).as_matrix()
    diff = m.truncated(proj.prec) - proj
    return diff.is_zero()


# ---------------------------------------------------------------------------
# compatibility


def is_graded_compatible(
    x: ApartmentPoint, torus: TorusData, conjugator: LoopMatrix | None = None
) -> bool:
    """Graded compatibility of x with s (or with Ad(conjugator) s).

    Checks (tau + ad x)(b) in s for the uniformizer-power basis of one
    grading period and that the grade-0 part of the Cartan is diagonal.
    """
    if x.n != torus.n:
        raise ValueError("size mismatch")
    conj_inv = conjugator.inverse() if conjugator is not None else None
    xd = x.diag_matrix()

    def push(mat):
        return conjugator * mat * conj_inv if conjugator is not None else mat

    def member(mat):
        if conjugator is not None:
            mat = conj_inv * mat * conjugator
        proj = pi_s(torus, mat).as_matrix()
        if proj.prec is not None and proj.prec < 1:
            raise InsufficientPrecision("cannot certify Cartan membership", needed=proj.prec)
        return (mat.truncated(proj.prec) - proj).is_zero()

    for j in range(torus.num_blocks):
        for m in range(torus.block_sizes[j]):
            b = push(torus.uniformizer_power(j, m))
            d = b.tau() + xd.commutator(b)
            if not member(d):
                return False
            # grade-0 part must be a constant diagonal matrix
            zero_part = graded_component(b, x, 0)
            for i, jj, s in zero_part.entries():
                if i != jj and not s.is_zero():
                    return False
                if i == jj and any(q != 0 for q in s.terms):
                    return False
    return True


def is_filtration_compatible(
    x: ApartmentPoint, torus: TorusData, conjugator: LoopMatrix | None = None
) -> bool:
    """Compatibility of x with the filtration of (a conjugate of) s.

    Per intrinsic grade over one period: every basis monomial has point-depth
    at least its intrinsic grade, and the graded leading parts are linearly
    independent over k.
    """

    def push(mat):
        if conjugator is None:
            return mat
        return conjugator * mat * conjugator.inverse()

    by_grade: dict[Fraction, list] = {}
    for j in range(torus.num_blocks):
        e = torus.block_sizes[j]
        for m in range(e):
            g = Fraction(m, e)
            by_grade.setdefault(g, []).append(push(torus.uniformizer_power(j, m)))
    for g, mats in sorted(by_grade.items()):
        vectors = []
        for b in mats:
            d = min_grade(b, x)
            if d is None or d < g:
                return False
            lead = graded_component(b, x, g)
            vec = []
            for i, j2, s in lead.entries():
                vec.append(s.terms.get(g - x[i] + x[j2], CYC_ZERO))
            vectors.append(vec)
        if mat_rank(kmat(vectors)) != len(vectors):
            return False
    return True


@dataclass
class CompatiblePoints:
    """Membership oracle for the set of points compatible with some torus of
    the class: the affine Weyl orbit of base_point + s(0)."""

    cls: WeylClass
    torus: TorusData

    def witness(self, y: ApartmentPoint):
        """An affine Weyl element (mu, w) with w(y) + mu in base + s(0), or
        None.  Per permutation, membership is a per-block congruence mod Z."""
        n = self.cls.n
        if y.n != n:
            raise ValueError("size mismatch")
        if n > 8:
            raise ValueError("membership search is guarded to n <= 8")
        base = self.torus.base_point
        for perm in itertools.permutations(range(n)):
            w = AffineWeylElt(perm, [0] * n)
            moved = w.act(y)
            mu = [Fraction(0)] * n
            ok = True
            for j in range(self.torus.num_blocks):
                block = list(self.torus.block_range(j))
                shift = None
                for p in block:
                    d = moved[p] - base[p]
                    if shift is None:
                        shift = d
                        continue
                    if (d - shift).denominator != 1:
                        ok = False
                        break
                    mu[p] = shift - d
                if not ok:
                    break
            if ok:
                elt = AffineWeylElt(perm, [int(m) for m in mu])
                target = elt.act(y)
                # sanity: target - base constant on blocks
                for j in range(self.torus.num_blocks):
                    block = list(self.torus.block_range(j))
                    diffs = {target[p] - base[p] for p in block}
                    assert len(diffs) == 1
                return elt
        return None

    def contains(self, y: ApartmentPoint) -> bool:
        return self.witness(y) is not None


def compatible_points(cls: WeylClass) -> CompatiblePoints:
    return CompatiblePoints(cls, TorusData(cls))


# ---------------------------------------------------------------------------
# diagonalizers


@dataclass
class Diagonalizer:
    """g = z^(-t) h over E = k((z^(1/e))) with Ad(g^{-1}) s(E) diagonal and
    n0 = g^{-1} sigma(g) a constant finite-order normalizer representative."""

    torus: TorusData
    g: LoopMatrix
    g_inv: LoopMatrix
    t: ApartmentPoint
    h: LoopMatrix
    n0: LoopMatrix

    def diagonalized(self, m: LoopMatrix) -> LoopMatrix:
        return self.g_inv * m.with_ram(self.torus.e) * self.g


def w_diagonalizer(torus: TorusData) -> Diagonalizer:
    """Block Vandermonde diagonalizer for the block-Coxeter torus.

    Block j has columns (1, lam, lam^2, ...) for lam = zeta_{e_j}^c u_{e_j},
    with u_{e_j} = z^{1/e_j} taken inside the coherent tower z^(1/e).
    """
    n = torus.n
    e = torus.e
    entries = {}
    h_entries = {}
    n0_entries = {}
    for j in range(torus.num_blocks):
        ej = torus.block_sizes[j]
        s = torus.block_starts[j]
        for row in range(ej):
            for col in range(ej):
                zc = Cyclotomic.zeta(ej, row * col)
                entries[(s + row, s + col)] = PuiseuxSeries.z_pow(
                    Fraction(row, ej), coeff=zc
                ).with_ram(e)
                h_entries[(s + row, s + col)] = PuiseuxSeries.constant(zc)
        for col in range(ej):
            n0_entries[(s + (col + 1) % ej, s + col)] = PuiseuxSeries.one()
    g = LoopMatrix.from_entries(n, entries, ram=e)
    h = LoopMatrix.from_entries(n, h_entries)
    n0 = LoopMatrix.from_entries(n, n0_entries)
    g_inv = g.inverse()
    diag = Diagonalizer(torus, g, g_inv, torus.base_point, h, n0)
    assert (g.galois() - g * n0).is_zero(), "sigma(g) != g n0"
    return diag


def unit_diagonalizer(torus: TorusData):
    """The grade-0 form p0 = g z^t of the Vandermonde diagonalizer.

    p0 and its inverse lie in the depth-0 parahoric at the base point, with
    (p0)_{a,b} = zeta^{ab} u^{a-b} per block; Ad(p0^{-1}) s(E) = t(E).
    """
    n = torus.n
    e = torus.e
    entries = {}
    inv_entries = {}
    for j in range(torus.num_blocks):
        ej = torus.block_sizes[j]
        s = torus.block_starts[j]
        for a in range(ej):
            for b in range(ej):
                entries[(s + a, s + b)] = PuiseuxSeries.z_pow(
                    Fraction(a - b, ej), coeff=Cyclotomic.zeta(ej, a * b)
                ).with_ram(e)
                inv_entries[(s + a, s + b)] = PuiseuxSeries.z_pow(
                    Fraction(a - b, ej),
                    coeff=Cyclotomic.zeta(ej, -a * b) * Fraction(1, ej),
                ).with_ram(e)
    p0 = LoopMatrix.from_entries(n, entries, ram=e)
    p0_inv = LoopMatrix.from_entries(n, inv_entries, ram=e)
    assert (p0 * p0_inv).agrees_with(LoopMatrix.identity(n, ram=e))
    return p0, p0_inv


def graded_conjugator(
    q0: LoopMatrix, torus: TorusData, x: ApartmentPoint, nprec
) -> LoopMatrix:
    """Given q0 in the parahoric at x with x compatible with Ad(q0) s, build
    q in the parahoric with Ad(q^{-1} q0) s graded compatible with x.

    Successive corrections exp(-Y_l / l) remove the off-diagonal graded parts
    of the diagonalized gauge of x, through grades below nprec.
    """
    nprec = ratio(nprec)
    if not is_filtration_compatible(x, torus, conjugator=q0):
        raise NotCompatible("x is not compatible with the conjugated Cartan")
    e = torus.e
    p0, p0_inv = unit_diagonalizer(torus)
    q0t = q0.with_ram(e).truncated(nprec + x.spread() + 2)
    p = q0t * p0
    p_inv = p0_inv * q0t.inverse()
    xd = x.diag_matrix(ram=e)
    # m = gauge(p^{-1}, x-form) = Ad(p^{-1}) x + p^{-1} tau(p)
    m = p_inv * xd * p + p_inv * p.tau()
    corr = LoopMatrix.identity(torus.n, ram=e)  # accumulates the correction
    while True:
        gp = grade_precision(m, x)
        limit = nprec if gp is None else min(nprec, gp)
        target = None
        for r in sorted(mp_decompose(m, x).components):
            if 0 < r < limit:
                off = graded_component(m, x, r)
                off = off - LoopMatrix.diagonal(
                    [off.entry(i, i) for i in range(off.n)], ram=off.ram
                )
                if not off.is_zero():
                    target = (r, off)
                    break
        if target is None:
            break
        ell, off = target
        step = off.scale(Fraction(-1) / ell).truncated(limit + x.spread() + 1)
        q_ell = matrix_exp(step)
        q_ell_inv = matrix_exp(-step)
        m = q_ell_inv * m * q_ell + q_ell_inv * q_ell.tau()
        corr = q_ell_inv * corr
    q = p * corr * p_inv
    for _, _, s in q.entries():
        for qexp in s.terms:
            assert qexp.denominator == 1, "conjugator left the loop group"
    # fix a non-diagonal zero-grade part by a constant H_x conjugation
    conj = q.inverse() * q0
    if not is_graded_compatible(x, torus, conjugator=conj):
        fix = _straighten_grade_zero(torus, x, conj)
        q = q * fix.inverse()
        conj = q.inverse() * q0
        if not is_graded_compatible(x, torus, conjugator=conj):
            raise NotCompatible("conjugator construction failed postcondition")
    return q


def _straighten_grade_zero(torus: TorusData, x: ApartmentPoint, conj: LoopMatrix):
    """Constant H_x element moving the grade-0 idempotents of Ad(conj) s into
    the diagonal.

    The grade-0 parts of the conjugated block identities are commuting
    idempotents supported on H_x roots; eigenvectors are collected per
    residue class of x so the change of basis stays inside H_x.
    """
    from .apartment import lift_constant
    from .klinear import mat_inverse

    n = torus.n
    conj_inv = conj.inverse()
    idems = []
    for j in range(torus.num_blocks):
        b = conj * torus.block_identity(j) * conj_inv
        zero_part = graded_component(b, x, 0)
        rows = [[CYC_ZERO] * n for _ in range(n)]
        for i, jj, s in zero_part.entries():
            if s.terms:
                rows[i][jj] = next(iter(s.terms.values()))
        idems.append(rows)
    classes: dict[Fraction, list] = {}
    for i in range(n):
        classes.setdefault(x[i] % 1, []).append(i)
    eigencols = {rho: [] for rho in classes}
    for rows in idems:
        for rho, idx in classes.items():
            cand = [[rows[i][c] for i in idx] for c in idx]
            for vec in cand:
                trial = eigencols[rho] + [vec]
                if mat_rank(kmat(trial)) > len(eigencols[rho]):
                    eigencols[rho].append(vec)
    v_full = [[CYC_ZERO] * n for _ in range(n)]
    for rho, idx in classes.items():
        if len(eigencols[rho]) != len(idx):
            raise NotCompatible("grade-zero part is not a split commuting family")
        for col_pos, vec in zip(idx, eigencols[rho]):
            for row_pos, val in zip(idx, vec):
                v_full[row_pos][col_pos] = val
    h = mat_inverse(v_full)
    return lift_constant(h, x)


# ---------------------------------------------------------------------------
# the torus-part decomposition T = delta_w(T) T^w


def torus_decomposition_lie(perm, vec):
    """Solve X = (w^{-1} Y - Y) + Z with Z constant on the cycles of w.

    Works over any field; returns (Y, Z)."""
    n = len(perm)
    vec = [Cyclotomic.coerce(v) for v in vec]
    y = [CYC_ZERO] * n
    z = [CYC_ZERO] * n
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        cur = perm[start]
        while cur != start:
            cycle.append(cur)
            seen[cur] = True
            cur = perm[cur]
        d = len(cycle)
        avg = sum((vec[i] for i in cycle), CYC_ZERO) * Fraction(1, d)
        for i in cycle:
            z[i] = avg
        # w^{-1}Y - Y at position i is Y_{w(i)} - Y_i; prescribe a telescoping sum
        acc = CYC_ZERO
        for idx in range(1, d):
            prev = cycle[idx - 1]
            acc = acc + (vec[prev] - avg)
            y[cycle[idx]] = acc
    return y, z


def torus_decomposition_group(perm, vec):
    """Solve t = delta_w(t1) t2 multiplicatively, t2 constant on cycles.

    Needs cycle-length roots of the cycle products; raises BaseFieldError if
    they do not exist in a cyclotomic field."""
    n = len(perm)
    vec = [Cyclotomic.coerce(v) for v in vec]
    t1 = [Cyclotomic.coerce(1)] * n
    t2 = [Cyclotomic.coerce(1)] * n
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        cur = perm[start]
        while cur != start:
            cycle.append(cur)
            seen[cur] = True
            cur = perm[cur]
        d = len(cycle)
        prod = Cyclotomic.coerce(1)
        for i in cycle:
            prod = prod * vec[i]
        a = nth_root_in_cyclotomics(prod, d)
        for i in cycle:
            t2[i] = a
        acc = Cyclotomic.coerce(1)
        for idx in range(1, d):
            prev = cycle[idx - 1]
            acc = acc * vec[prev] / a
            t1[cycle[idx]] = acc
    return t1, t2
