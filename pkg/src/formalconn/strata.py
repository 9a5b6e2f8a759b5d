"""Strata of formal connections: leading terms, fundamentality, slope.

A connection is carried as the matrix M = [nabla_tau] (so the 1-form is
M dz/z).  At an apartment point x the leading stratum reads the least grade
of M - x; the slope is computed by minimizing that depth over a candidate
grid of points and lowering nilpotent leading terms with constant + shear
gauges until a fundamental one appears.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .apartment import (
    ApartmentPoint,
    critical_numbers,
    grade_precision,
    graded_basis,
    graded_component,
    lift_constant,
    min_grade,
)
from .errors import (
    BaseFieldError,
    InsufficientPrecision,
    NotRegular,
    ReductionStuck,
    ZeroInput,
)
from .klinear import (
    CYC_ONE,
    CYC_ZERO,
    kmat,
    mat_inverse,
    mat_nullspace,
    mat_rank,
    nth_root_in_cyclotomics,
    poly_is_squarefree,
    poly_trim,
    roots_in_cyclotomics,
)
from .matrices import LoopMatrix, char_poly_series
from .scalars import Cyclotomic, PuiseuxSeries, ratio
from .torus import TorusData, WeylClass


class Connection:
    """A formal connection in a fixed trivialization, in tau-form."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: LoopMatrix):
        self.matrix = matrix

    @property
    def n(self):
        return self.matrix.n

    @property
    def prec(self):
        return self.matrix.prec

    def __repr__(self):
        return f"Connection({self.matrix!r})"


@dataclass
class Stratum:
    """(x, r, beta0) with beta0 the homogeneous grade-(-r) representative.

    beta0 may be the zero matrix (the zero functional); that only carries
    information at critical depths.
    """

    x: ApartmentPoint
    depth: Fraction
    beta0: LoopMatrix

    def __post_init__(self):
        self.depth = ratio(self.depth)
        if self.depth < 0:
            raise ValueError("stratum depth must be nonnegative")
        for i, j, s in self.beta0.entries():
            for q in s.terms:
                if q + self.x[i] - self.x[j] != -self.depth:
                    raise ValueError("beta0 is not homogeneous of grade -depth")

    @property
    def n(self):
        return self.beta0.n


def leading_stratum(c: Connection, x: ApartmentPoint) -> Stratum:
    """The minimal-depth stratum contained in c at x (identity trivialization):
    depth max(0, -min grade of M - x), functional the grade-(-r) part."""
    m = c.matrix - x.diag_matrix(ram=c.matrix.ram, prec=c.matrix.prec)
    gp = grade_precision(m, x)
    if gp is not None and gp <= 0:
        raise InsufficientPrecision(
            "leading stratum needs the matrix through grade 0", needed=gp
        )
    g = min_grade(m, x)
    if g is None:
        return Stratum(x, Fraction(0), LoopMatrix.zero(c.n))
    r = max(Fraction(0), -g)
    return Stratum(x, r, graded_component(m, x, -r))


def is_fundamental(st: Stratum) -> bool:
    """Fundamental iff the homogeneous representative is not nilpotent:
    beta0^n != 0, exactly (homogeneity keeps the power exact)."""
    return not (st.beta0 ** st.n).is_zero()


def contains_stratum(c: Connection, st: Stratum) -> bool:
    """Containment with respect to the identity trivialization: M - x lies in
    depth >= -r and its grade-(-r) part equals beta0."""
    m = c.matrix - st.x.diag_matrix(ram=c.matrix.ram, prec=c.matrix.prec)
    gp = grade_precision(m, st.x)
    if gp is not None and gp <= -st.depth:
        raise InsufficientPrecision("cannot read the claimed depth", needed=gp)
    g = min_grade(m, st.x)
    if g is not None and g < -st.depth:
        return False
    return graded_component(m, st.x, -st.depth) == st.beta0


# ---------------------------------------------------------------------------
# slope


def candidate_points(n: int):
    """Grid for slope minimization: all points with coordinates in the
    one-period (1/e)-grids for e <= n, normalized so the least coordinate is
    0 (the center direction does not affect gradings)."""
    seen = set()
    out = []
    for e in range(1, n + 1):
        grid = [Fraction(k, e) for k in range(e)]
        for combo in itertools.product(grid, repeat=n):
            base = min(combo)
            normalized = tuple(c - base for c in combo)
            if normalized not in seen:
                seen.add(normalized)
                out.append(ApartmentPoint(normalized))
    return out


@dataclass
class SlopeReport:
    slope: Fraction
    point: ApartmentPoint  # witness point in the original trivialization
    fundamental: bool


def _depth_at(m: LoopMatrix, x: ApartmentPoint) -> Fraction:
    g = min_grade(m - x.diag_matrix(ram=m.ram, prec=m.prec), x)
    if g is None:
        return Fraction(0)
    return max(Fraction(0), -g)


def _scan_candidates(m: LoopMatrix, points):
    best_r = None
    best_points = []
    for x in points:
        r = _depth_at(m, x)
        if best_r is None or r < best_r:
            best_r, best_points = r, [x]
        elif r == best_r:
            best_points.append(x)
    return best_r, best_points


def _flag_constant_and_levels(beta0: LoopMatrix, x: ApartmentPoint):
    """Constant change of basis aligning the kernel flag of a nilpotent
    homogeneous beta0 with coordinate subspaces.

    The kernel flag is graded, so it decomposes along the residue classes of
    x; eigen-directions are placed at coordinates of their own class, keeping
    the change of basis inside H_x.  Returns (C, levels) with levels[i] the
    flag level of coordinate i after applying C.
    """
    n = beta0.n

    def constant_of(i, j):
        s = beta0.entry(i, j)
        return next(iter(s.terms.values())) if s.terms else CYC_ZERO

    b = [[constant_of(i, j) for j in range(n)] for i in range(n)]
    flags = []
    power = [row[:] for row in b]
    for _ in range(n):
        flags.append(mat_nullspace(power))
        if len(flags[-1]) == n:
            break
        power = [
            [sum((b[a][k] * power[k][c] for k in range(n)), CYC_ZERO) for c in range(n)]
            for a in range(n)
        ]
    classes: dict[Fraction, list] = {}
    for i in range(n):
        classes.setdefault(x[i] % 1, []).append(i)
    chosen = []
    chosen_levels = []
    for level, ker in enumerate(flags, start=1):
        for vec in ker:
            pieces: dict[Fraction, list] = {}
            for i in range(n):
                if not vec[i].is_zero():
                    pieces.setdefault(x[i] % 1, [CYC_ZERO] * n)
                    pieces[x[i] % 1][i] = vec[i]
            for piece in pieces.values():
                if mat_rank(kmat(chosen + [piece])) > len(chosen):
                    chosen.append(piece)
                    chosen_levels.append(level)
    if len(chosen) != n:
        raise ReductionStuck("kernel flag did not exhaust the space")
    cols = [[CYC_ZERO] * n for _ in range(n)]
    levels = [0] * n
    placed = {rho: 0 for rho in classes}
    for vec, level in zip(chosen, chosen_levels):
        support = [i for i in range(n) if not vec[i].is_zero()]
        rho = x[support[0]] % 1
        pos = classes[rho][placed[rho]]
        placed[rho] += 1
        for i in range(n):
            cols[i][pos] = vec[i]
        levels[pos] = level
    return mat_inverse(cols), levels


def _apply_shear(m: LoopMatrix, mu) -> LoopMatrix:
    """gauge(z^mu, M) = Ad(z^mu) M - diag(mu)."""
    rows = [
        [m.entry(i, j).shift(mu[i] - mu[j]) for j in range(m.n)] for i in range(m.n)
    ]
    out = LoopMatrix(rows)
    return out - LoopMatrix.diagonal(list(mu), ram=out.ram, prec=out.prec)


def _witness(x: ApartmentPoint, total_shift) -> ApartmentPoint:
    raw = ApartmentPoint([c + s for c, s in zip(x.coords, total_shift)])
    return raw.normalized()


class _FastScan:
    """Integer-scaled depth scans of a fixed matrix over the candidate grid.

    Depths only depend on the minimal exponent of each entry; scans run on
    exact int64 arrays (all quantities are small multiples of 1/D)."""

    def __init__(self, m: LoopMatrix, points):
        import numpy as np

        self.np = np
        self.n = m.n
        d = 1
        for x in points:
            d = math.lcm(d, x.denominator())
        for _, _, s in m.entries():
            v = s.valuation()
            if v is not None:
                d = math.lcm(d, v.denominator)
        self.d = d
        self.vals = []
        for i, j, s in m.entries():
            v = s.valuation()
            if v is not None:
                self.vals.append((i, j, int(v * d)))
        self.pts = np.array(
            [[int(c * d) for c in x.coords] for x in points], dtype=np.int64
        )

    def depth_with_shift(self, mu):
        """min over grid points of the sheared depth, as (r*, point index)."""
        np = self.np
        d = self.d
        y = self.pts + np.array([int(v) * d for v in mu], dtype=np.int64)
        low = np.zeros(len(self.pts), dtype=np.int64)
        for i, j, v in self.vals:
            g = v + y[:, i] - y[:, j]
            np.minimum(low, g, out=low)
        depth = -low
        best = int(depth.min())
        idx = int(np.argmax(depth == best))
        return Fraction(best, d), idx


def _shear_box(levels, n):
    """Shear cocharacters: flag-level indicator ramps first, then the box
    {0..n-1}^n."""
    seen = set()
    maxlevel = max(levels) if levels else 1
    for scale in range(1, n):
        for t in range(1, maxlevel + 1):
            mu = tuple(scale if levels[i] <= t else 0 for i in range(n))
            if mu not in seen and any(mu):
                seen.add(mu)
                yield mu
    for mu in itertools.product(range(n), repeat=n):
        if mu not in seen and any(mu):
            seen.add(mu)
            yield mu


def slope_report(c: Connection) -> SlopeReport:
    """Slope with a witness.

    Minimize the leading-stratum depth over the candidate grid; a minimizer
    with non-nilpotent leading term settles the value (a fundamental stratum
    pins the slope).  Otherwise conjugate the kernel flag of the nilpotent
    leading term to coordinate form and shear; moves are chosen best-first
    with backtracking, and every accepted move strictly lowers the candidate
    depth, which is bounded below.
    """
    n = c.n
    m = c.matrix
    if m.prec is not None and m.prec < 3:
        raise InsufficientPrecision(
            "slope needs two full periods beyond grade 0", needed=m.prec
        )
    if m.valuation() is None:
        raise ZeroInput("slope of the zero connection matrix")
    points = candidate_points(n)
    budget = [4000]
    result = _slope_search(m, points, [0] * n, budget)
    if result is None:
        raise ReductionStuck("no gauge move sequence lowered the candidate depth")
    return result


def _slope_search(m, points, total_shift, budget):
    n = m.n
    budget[0] -= 1
    if budget[0] < 0:
        raise ReductionStuck("depth-lowering search exceeded its node budget")
    scan = _FastScan(m, points)
    r_star, idx = scan.depth_with_shift([0] * n)
    if r_star == 0:
        return SlopeReport(Fraction(0), _witness(points[idx], total_shift), False)
    minimizers = [
        x for x in points if _depth_at(m, x) == r_star
    ]
    nilpotent = []
    for x in minimizers:
        beta0 = graded_component(
            m - x.diag_matrix(ram=m.ram, prec=m.prec), x, -r_star
        )
        if not (beta0 ** n).is_zero():
            return SlopeReport(r_star, _witness(x, total_shift), True)
        nilpotent.append((x, beta0))
    # enumerate moves: per nilpotent minimizer, a flag-aligning constant
    # conjugation followed by shears; rank all improving moves by outcome
    moves = []
    seen_mu = set()
    for x, beta0 in nilpotent[:3]:
        try:
            const, levels = _flag_constant_and_levels(beta0, x)
        except ReductionStuck:
            continue
        if _is_identity_rows(const):
            m_conj = m
            key = None
        else:
            lift = lift_constant(const, x)
            m_conj = lift * m * lift.inverse()
            key = id(m_conj)
        conj_scan = scan if key is None else _FastScan(m_conj, points)
        for mu in _shear_box(levels, n):
            if key is None and mu in seen_mu:
                continue
            if key is None:
                seen_mu.add(mu)
            r_new, _ = conj_scan.depth_with_shift(mu)
            if r_new < r_star:
                moves.append((r_new, mu, m_conj))
    moves.sort(key=lambda t: (t[0], t[1]))
    for r_new, mu, m_conj in moves[:8]:
        m_try = _apply_shear(m_conj, mu)
        shifted = [a + b for a, b in zip(total_shift, mu)]
        result = _slope_search(m_try, points, shifted, budget)
        if result is not None:
            return result
    return None


def _is_identity_rows(rows):
    n = len(rows)
    return all(
        Cyclotomic.coerce(rows[i][j]) == (CYC_ONE if i == j else CYC_ZERO)
        for i in range(n)
        for j in range(n)
    )


def slope(c: Connection) -> Fraction:
    return slope_report(c).slope


# ---------------------------------------------------------------------------
# regularity


@dataclass
class RegularityWitness:
    weyl_class: WeylClass
    torus: TorusData
    conjugator: LoopMatrix | None  # Ad(conjugator) standard Cartan = z(beta0)


def _ad_matrix_rows(st: Stratum, ell):
    """Rows of ad(beta0): grade-ell basis -> grade-(ell - r) basis, over k."""
    x = st.x
    n = st.n
    basis = graded_basis(x, ell)
    target = graded_basis(x, ell - st.depth)
    rows = []
    for (i2, j2, m2) in target:
        row = []
        for (i, j, m) in basis:
            e = LoopMatrix.elementary(n, i, j, exponent=m)
            br = e.commutator(st.beta0)
            row.append(br.entry(i2, j2).terms.get(ratio(m2), CYC_ZERO))
        rows.append(row)
    return basis, rows


def graded_centralizer_basis(st: Stratum, ell) -> list:
    """Basis of ker ad(beta0) in grade ell at x."""
    basis, rows = _ad_matrix_rows(st, ell)
    if not basis:
        return []
    if not rows:
        rows = [[CYC_ZERO] * len(basis)]
    out = []
    for vec in mat_nullspace(rows):
        mat = LoopMatrix.zero(st.n)
        for coeff, (i, j, m) in zip(vec, basis):
            if not coeff.is_zero():
                mat = mat + LoopMatrix.elementary(st.n, i, j, exponent=m).scale(coeff)
        out.append(mat)
    return out


def centralizer_dimension(st: Stratum) -> int:
    """k-dimension of ker ad(beta0) over one grading period at x."""
    total = 0
    for ell in critical_numbers(st.x):
        basis, rows = _ad_matrix_rows(st, ell)
        if not basis:
            continue
        total += len(basis) - (mat_rank(kmat(rows)) if rows else 0)
    return total


def _deflated_char_poly(st: Stratum):
    """Characteristic data of the homogeneous beta0.

    char(t) = t^n + sum c_j z^(-r j) t^(n-j); returns (q, zero_count) with
    q(nu) = nu^n + sum c_j nu^(n-j) ascending and zero_count the multiplicity
    of the zero root.
    """
    n = st.n
    cp = char_poly_series(st.beta0)
    r = st.depth
    qcoeffs = [CYC_ZERO] * (n + 1)
    for j in range(n + 1):
        s = cp[n - j]
        for qexp, cc in s.terms.items():
            if qexp != -r * j:
                raise ValueError("characteristic polynomial is not graded")
            qcoeffs[n - j] = cc
    qcoeffs[n] = CYC_ONE
    zero_count = 0
    while zero_count <= n and Cyclotomic.coerce(qcoeffs[zero_count]).is_zero():
        zero_count += 1
    return qcoeffs, zero_count


def _eigenvalue_constants(qcoeffs, zero_count, b, n):
    """Coefficients of Q with q(nu) = nu^z Q(nu^b), or None if q does not
    deflate through nu^b."""
    deflated = qcoeffs[zero_count:]
    big_q = []
    for idx, cc in enumerate(deflated):
        if idx % b == 0:
            big_q.append(cc)
        elif not Cyclotomic.coerce(cc).is_zero():
            return None
    return big_q


def is_resonant_residues(residues, x: ApartmentPoint) -> bool:
    """Resonance of a depth-0 stratum with diagonal residue b at x: some root
    has alpha(b) + alpha(x) in Z strictly below alpha(x)."""
    n = x.n
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            val = Cyclotomic.coerce(residues[i]) - Cyclotomic.coerce(residues[j])
            if not val.is_rational():
                continue
            total = val.as_rational() + x[i] - x[j]
            if total.denominator == 1 and total < x[i] - x[j]:
                return True
    return False


def _diagonal_residues(beta0: LoopMatrix):
    out = []
    for i in range(beta0.n):
        s = beta0.entry(i, i)
        out.append(next(iter(s.terms.values())) if s.terms else CYC_ZERO)
    return out


def is_regular_stratum(st: Stratum):
    """Regularity with witness, or None.

    The graded centralizer over one period must have k-dimension n and be
    abelian; the leading term must be regular semisimple (deflated
    characteristic polynomial squarefree with at most a simple zero root);
    depth-0 strata must additionally be nonresonant.
    """
    if not is_fundamental(st):
        return None
    n = st.n
    r = st.depth
    if centralizer_dimension(st) != n:
        return None
    qcoeffs, zero_count = _deflated_char_poly(st)
    b = r.denominator if r > 0 else 1
    if zero_count > 1:
        return None
    big_q = _eigenvalue_constants(qcoeffs, zero_count, b, n)
    if big_q is None:
        return None
    if Cyclotomic.coerce(big_q[0]).is_zero():
        return None  # zero root of higher multiplicity
    if not poly_is_squarefree(big_q):
        return None
    # abelian check on the graded kernel over one period
    period_basis = []
    for ell in critical_numbers(st.x):
        period_basis.extend(graded_centralizer_basis(st, ell))
    for a in period_basis:
        for c in period_basis:
            if not a.commutator(c).is_zero():
                return None
    if r == 0:
        residues = _resonance_residues(st, qcoeffs)
        if residues is None or is_resonant_residues(residues, st.x):
            return None
    blocks = [b] * ((n - zero_count) // b) + [1] * zero_count
    cls = WeylClass(n, blocks)
    torus = TorusData(cls)
    try:
        conj = _regular_conjugator(st, torus, big_q, zero_count, b)
    except BaseFieldError:
        conj = None
    return RegularityWitness(cls, torus, conj)


def _resonance_residues(st: Stratum, qcoeffs):
    """Residue eigenvalues of a depth-0 beta0, as a list, or None when they
    do not all lie in a cyclotomic field (no resonance verdict possible)."""
    diag = all(i == j or s.is_zero() for i, j, s in st.beta0.entries())
    if diag:
        return _diagonal_residues(st.beta0)
    pairs = roots_in_cyclotomics(qcoeffs)
    count = sum(mult for _, mult in pairs)
    if count != st.n:
        raise BaseFieldError("depth-0 eigenvalues not in a cyclotomic field")
    out = []
    for root, mult in pairs:
        out.extend([root] * mult)
    return out


def _regular_conjugator(st: Stratum, torus: TorusData, big_q, zero_count, b):
    """g with Ad(g)(standard Cartan) = z(beta0), via Krylov bases of beta0
    and a model regular element of the standard Cartan with the same
    characteristic polynomial."""
    n = st.n
    r = st.depth
    pairs = roots_in_cyclotomics(big_q)
    degree = len(poly_trim(big_q)) - 1
    if sum(m for _, m in pairs) != degree:
        raise BaseFieldError("leading eigenvalues not in a cyclotomic field")
    etas = [root for root, _ in pairs]
    a_exp = int(-r * b)
    model = LoopMatrix.zero(n)
    block_iter = (j for j in range(torus.num_blocks) if torus.block_sizes[j] == b)
    for eta in etas:
        cscale = nth_root_in_cyclotomics(eta, b)
        j = next(block_iter)
        model = model + torus.uniformizer_power(j, a_exp).scale(cscale)
    # the remaining 1-blocks stay zero: they carry the zero eigenvalue
    kb, kb_inv = _krylov_invertible(st.beta0)
    km, km_inv = _krylov_invertible(model)
    g = kb * km_inv
    ginv = km * kb_inv
    assert (g * model * ginv - st.beta0.truncated(g.prec)).is_zero()
    return g


def _krylov_trials(n):
    for i in range(n):
        yield [Fraction(1) if k == i else Fraction(0) for k in range(n)]
    for t in range(1, n * n + 2):
        yield [Fraction(t) ** i for i in range(n)]


def _krylov_of(m: LoopMatrix, v) -> LoopMatrix:
    n = m.n
    cols = [[PuiseuxSeries.constant(c, m.ram, m.prec) for c in v]]
    for _ in range(n - 1):
        cur = cols[-1]
        cols.append(
            [
                sum(
                    (m.entry(i, k) * cur[k] for k in range(n)),
                    PuiseuxSeries.zero(m.ram),
                )
                for i in range(n)
            ]
        )
    return LoopMatrix([[cols[j][i] for j in range(n)] for i in range(n)])


def _krylov_invertible(m: LoopMatrix):
    """(K, K^{-1}) for a cyclic Krylov basis of m; falls back to a truncated
    inverse when every exact elimination needs a multi-term division."""
    needs_prec = None
    for v in _krylov_trials(m.n):
        mat = _krylov_of(m, v)
        try:
            return mat, mat.inverse()
        except ZeroDivisionError:
            continue
        except InsufficientPrecision:
            needs_prec = needs_prec or mat
    if needs_prec is not None:
        top = needs_prec.max_exponent() or Fraction(0)
        bottom = needs_prec.valuation() or Fraction(0)
        work = top + (top - bottom) + 8
        mat = needs_prec.truncated(work)
        return mat, mat.inverse()
    raise NotRegular("no cyclic vector found; the matrix is not regular")
