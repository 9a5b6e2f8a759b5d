"""Gauge calculus and the reduction of a connection to its formal type.

The gauge action on the tau-form matrix is M -> Ad(g) M - tau(g) g^{-1}.
Reduction cleans the graded components of M from the leading term upward:
non-Cartan parts are removed by graded kernel solves against the leading
term, positive-grade Cartan parts are absorbed into torus exponentials, and
the surviving coefficients in grades [-r, 0] are the formal type.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .apartment import (
    ApartmentPoint,
    grade_precision,
    graded_basis,
    graded_component,
    lift_constant,
    min_grade,
    mp_decompose,
)
from .errors import (
    BaseFieldError,
    InsufficientPrecision,
    NoSolution,
    NotCompatible,
    NotRegular,
    ReductionStuck,
    Resonant,
)
from .klinear import (
    CYC_ZERO,
    kmat,
    mat_inverse,
    mat_nullspace,
    mat_solve,
    roots_in_cyclotomics,
)
from .matrices import LoopMatrix, matrix_exp
from .scalars import Cyclotomic, PuiseuxSeries, ratio
from .strata import Connection, Stratum, leading_stratum
from .torus import SElement, TorusData, in_cartan, is_graded_compatible, pi_s


class GaugeElement:
    """An invertible gauge transformation, with a cached inverse."""

    __slots__ = ("matrix", "_inverse")

    def __init__(self, matrix: LoopMatrix, inverse: LoopMatrix | None = None):
        self.matrix = matrix
        self._inverse = inverse

    @classmethod
    def identity(cls, n, ram=1, prec=None):
        ident = LoopMatrix.identity(n, ram, prec)
        return cls(ident, ident)

    @classmethod
    def from_matrix(cls, matrix, prec=None):
        return cls(matrix if prec is None else matrix.truncated(prec))

    @property
    def inverse(self) -> LoopMatrix:
        if self._inverse is None:
            self._inverse = self.matrix.inverse()
        return self._inverse

    def compose(self, other: "GaugeElement") -> "GaugeElement":
        inv = None
        if self._inverse is not None and other._inverse is not None:
            inv = other._inverse * self._inverse
        return GaugeElement(self.matrix * other.matrix, inv)

    def check(self) -> bool:
        prod = self.matrix * self.inverse
        return prod.agrees_with(LoopMatrix.identity(self.matrix.n, self.matrix.ram))

    def __repr__(self):
        return f"GaugeElement({self.matrix!r})"


def gauge(g, c: Connection) -> Connection:
    """The gauge action M -> Ad(g) M - tau(g) g^{-1} on tau-form matrices."""
    if isinstance(g, GaugeElement):
        mat, inv = g.matrix, g.inverse
    else:
        mat, inv = g, g.inverse()
    m = mat * c.matrix * inv - mat.tau() * inv
    return Connection(m)


def kernel_solve(
    torus: TorusData,
    x: ApartmentPoint,
    beta0: LoopMatrix,
    y: LoopMatrix,
    ell,
) -> LoopMatrix:
    """X homogeneous of grade ell at x with [X, beta0] = Y - pi_s(Y), chosen
    trace-orthogonal to the centralizer (pi_s(X) = 0).

    Solvable whenever beta0 is a regular element of the Cartan (the graded
    kernel of the corestriction is the image of ad(beta0)).
    """
    ell = ratio(ell)
    n = beta0.n
    st = Stratum(x, -min_grade(beta0, x), beta0) if not beta0.is_zero() else None
    if st is None:
        raise NoSolution("kernel solve against a zero leading term")
    r = st.depth
    w = y - pi_s(torus, y).as_matrix()
    if w.is_zero():
        return LoopMatrix.zero(n)
    basis = graded_basis(x, ell)
    target = graded_basis(x, ell - r)
    rows = []
    rhs = []
    for (i2, j2, m2) in target:
        row = []
        for (i, j, m) in basis:
            e = LoopMatrix.elementary(n, i, j, exponent=m)
            br = e.commutator(beta0)
            row.append(br.entry(i2, j2).terms.get(ratio(m2), CYC_ZERO))
        rows.append(row)
        rhs.append(w.entry(i2, j2).terms.get(ratio(m2), CYC_ZERO))
    sol = mat_solve(rows, rhs) if rows else None
    if sol is None:
        raise NoSolution("graded kernel equation has no solution")
    xmat = LoopMatrix.zero(n)
    for coeff, (i, j, m) in zip(sol, basis):
        if not coeff.is_zero():
            xmat = xmat + LoopMatrix.elementary(n, i, j, exponent=m).scale(coeff)
    xmat = xmat - pi_s(torus, xmat).as_matrix()
    return xmat


@dataclass
class ReductionResult:
    p: GaugeElement
    formal_type: "FormalType"
    certificate: LoopMatrix
    certified_grade: Fraction

    def __iter__(self):
        return iter((self.p, self.formal_type, self.certificate))


def _leading_in_cartan(torus: TorusData, st: Stratum):
    """The leading term as Cartan coefficients, or None."""
    if not in_cartan(torus, st.beta0):
        return None
    return pi_s(torus, st.beta0)


def _check_regular_leading(torus: TorusData, x: ApartmentPoint, st: Stratum):
    from .strata import (
        _deflated_char_poly,
        _eigenvalue_constants,
        centralizer_dimension,
        is_resonant_residues,
        poly_is_squarefree,
    )

    r = st.depth
    if r == 0:
        if any(e != 1 for e in torus.block_sizes):
            raise NotRegular("depth-zero reduction is carried out for the split torus")
        diag = all(i == j or s.is_zero() for i, j, s in st.beta0.entries())
        if not diag:
            raise NotRegular(
                "depth-zero leading term is not diagonal; diagonalize it first"
            )
        residues = []
        for i in range(st.n):
            s = st.beta0.entry(i, i)
            residues.append(next(iter(s.terms.values())) if s.terms else CYC_ZERO)
        for i in range(st.n):
            for j in range(st.n):
                if i != j:
                    val = residues[i] - residues[j]
                    if val.is_zero():
                        raise NotRegular("repeated residue eigenvalue")
                    if val.is_rational():
                        tot = val.as_rational() + x[i] - x[j]
                        if tot.denominator == 1 and tot < x[i] - x[j]:
                            raise Resonant("resonant residue difference")
        return residues
    if _leading_in_cartan(torus, st) is None:
        raise NotRegular("leading term does not lie in the chosen Cartan")
    if centralizer_dimension(st) != st.n:
        raise NotRegular("leading term is not regular")
    qcoeffs, zero_count = _deflated_char_poly(st)
    if zero_count > 1:
        raise NotRegular("leading term has a repeated zero eigenvalue")
    b = r.denominator
    big_q = _eigenvalue_constants(qcoeffs, zero_count, b, st.n)
    if big_q is None or Cyclotomic.coerce(big_q[0]).is_zero() or not poly_is_squarefree(big_q):
        raise NotRegular("leading term is not regular semisimple")
    return None


def _component_of(m: LoopMatrix, x: ApartmentPoint, g):
    return graded_component(m, x, g)


def reduce_to_formal_type(
    c: Connection, torus: TorusData, x: ApartmentPoint, nprec=None
) -> ReductionResult:
    """Gauge c into the Cartan: returns p with gauge(p, c) = A-lift up to the
    certified grade, together with the formal type A.

    The connection must contain a regular stratum for the standard embedding
    of the torus at x (leading term in the Cartan, regular; nonresonant when
    the depth is zero), and x must be graded compatible with the torus.
    """
    from .formaltype import FormalType

    n = c.n
    if not is_graded_compatible(x, torus):
        raise NotCompatible("the point is not graded compatible with the torus")
    m = c.matrix
    if m.prec is None:
        st0 = leading_stratum(c, x)
        depth_hint = st0.depth
        want = ratio(nprec) if nprec is not None else Fraction(2)
        m = m.truncated(want + depth_hint + x.spread() + 3)
    st = leading_stratum(Connection(m), x)
    r = st.depth
    residues = _check_regular_leading(torus, x, st)
    gp = grade_precision(m, x)
    target = ratio(nprec) if nprec is not None else (gp if gp is not None else Fraction(2))
    if gp is not None and gp < target:
        raise InsufficientPrecision(
            f"need grades through {target}, matrix readable below {gp}", needed=target
        )
    p_total = GaugeElement.identity(n, m.ram, None)
    beta0 = st.beta0
    guard = 0
    while True:
        guard += 1
        if guard > 4000:
            raise ReductionStuck("reduction did not converge")
        gp = grade_precision(m, x)
        limit = target if gp is None else min(target, gp)
        dirty = None
        dec = mp_decompose(m, x)
        for g in sorted(dec.components):
            if g >= limit:
                break
            comp = dec.components[g]
            if g < -r:
                raise NotRegular("depth increased during reduction (internal)")
            if g <= 0:
                if not in_cartan(torus, comp):
                    dirty = (g, comp, "solve")
                    break
            else:
                ssub = pi_s(torus, comp).as_matrix()
                if not (comp - ssub).is_zero():
                    dirty = (g, comp, "solve")
                    break
                if not comp.is_zero():
                    dirty = (g, comp, "absorb")
                    break
        if dirty is None:
            break
        g, comp, kind = dirty
        mval = m.valuation() or Fraction(0)
        step_prec = limit + x.spread() + 1 - min(Fraction(0), mval)
        if kind == "solve":
            if r > 0:
                xsol = kernel_solve(torus, x, beta0, comp, g + r)
                step = matrix_exp((-xsol).truncated(step_prec))
                step_inv = matrix_exp(xsol.truncated(step_prec))
            else:
                xsol = _depth_zero_elimination(comp, x, residues, g)
                step = matrix_exp(xsol.truncated(step_prec))
                step_inv = matrix_exp((-xsol).truncated(step_prec))
        else:
            z = pi_s(torus, comp).as_matrix()
            arg = z.scale(Fraction(1) / g).truncated(step_prec)
            step = matrix_exp(arg)
            step_inv = matrix_exp(-arg)
        m = step * m * step_inv - step.tau() * step_inv
        p_total = GaugeElement(step, step_inv).compose(p_total)
    coeffs = {}
    final_s = pi_s(torus, m)
    for (j, mm), cval in final_s.coeffs.items():
        gg = Fraction(mm, torus.block_sizes[j])
        if -r <= gg <= 0:
            coeffs[(j, mm)] = cval
    ftype = FormalType(torus, r, coeffs)
    lift = ftype.lift_matrix()
    residual = m - lift.truncated(m.prec)
    cert_gp = grade_precision(residual, x)
    cert_grade = target if cert_gp is None else min(target, cert_gp)
    if nprec is not None and cert_grade < ratio(nprec):
        raise InsufficientPrecision(
            f"could only certify grades below {cert_grade}", needed=ratio(nprec)
        )
    bad = min_grade(residual, x)
    if bad is not None and bad < cert_grade:
        raise ReductionStuck("certificate failed below the certified grade")
    certificate = _keep_grades_below(residual, x, cert_grade)
    return ReductionResult(p_total, ftype, certificate, cert_grade)


def _keep_grades_below(m: LoopMatrix, x: ApartmentPoint, bound):
    entries = {}
    for i, j, s in m.entries():
        kept = {q: c for q, c in s.terms.items() if q + x[i] - x[j] < bound}
        if kept:
            entries[(i, j)] = PuiseuxSeries(kept, m.ram)
    return LoopMatrix.from_entries(m.n, entries, ram=m.ram, prec=m.prec)


def _depth_zero_elimination(comp, x: ApartmentPoint, residues, g):
    """Root-by-root elimination at grade g: X = sum Y_a / (g + a(b)); the
    denominators are nonzero by nonresonance."""
    n = comp.n
    out = LoopMatrix.zero(n)
    for i, j, s in comp.entries():
        if i == j or s.is_zero():
            continue
        denom_val = residues[i] - residues[j]
        denom = Cyclotomic.coerce(g) + denom_val
        if denom.is_zero():
            raise Resonant("vanishing denominator in depth-zero elimination")
        out = out + LoopMatrix(
            [
                [
                    s.scale(denom.inverse()) if (a, bcol) == (i, j) else PuiseuxSeries.zero(comp.ram)
                    for bcol in range(n)
                ]
                for a in range(n)
            ]
        )
    return out


def diagonalize_depth_zero(st: Stratum):
    """Conjugate a depth-zero graded regular stratum to diagonal residue form.

    Returns (m, st') with m a gauge element of the parahoric at x and st'
    the stratum with constant diagonal regular beta0.
    """
    if st.depth != 0:
        raise NotRegular("only depth-zero strata are diagonalized here")
    n = st.n
    x = st.x
    # un-lift the grade-0 matrix to a constant matrix in h_x
    rows = [[CYC_ZERO] * n for _ in range(n)]
    for i, j, s in st.beta0.entries():
        if s.terms:
            rows[i][j] = next(iter(s.terms.values()))
    diag_already = all(
        rows[i][j].is_zero() for i in range(n) for j in range(n) if i != j
    )
    if diag_already:
        vals = [rows[i][i] for i in range(n)]
        if any(vals[i] == vals[j] for i in range(n) for j in range(i + 1, n)):
            raise NotRegular("repeated residue eigenvalues")
        return GaugeElement.identity(n), st
    # residue classes of x split the constant matrix into blocks
    classes: dict[Fraction, list] = {}
    for i in range(n):
        classes.setdefault(x[i] % 1, []).append(i)
    v_full = [[CYC_ZERO] * n for _ in range(n)]
    eigvals = [None] * n
    for rho, idx in classes.items():
        block = [[rows[i][j] for j in idx] for i in idx]
        from .klinear import char_poly

        cp = char_poly(block)
        pairs = roots_in_cyclotomics(cp)
        if sum(mult for _, mult in pairs) != len(idx):
            raise BaseFieldError("residue eigenvalues not in a cyclotomic field")
        if any(mult > 1 for _, mult in pairs):
            raise NotRegular("repeated residue eigenvalues")
        placed = 0
        for lam, _ in pairs:
            shifted = [
                [block[a][b] - (lam if a == b else CYC_ZERO) for b in range(len(idx))]
                for a in range(len(idx))
            ]
            for vec in mat_nullspace(shifted):
                pos = idx[placed]
                for a, i in enumerate(idx):
                    v_full[i][pos] = vec[a]
                eigvals[pos] = lam
                placed += 1
    if any(v is None for v in eigvals):
        raise NotRegular("residue matrix is not diagonalizable")
    if any(
        eigvals[i] == eigvals[j] for i in range(n) for j in range(i + 1, n)
    ):
        raise NotRegular("repeated residue eigenvalues")
    v_inv = mat_inverse(v_full)
    gmat = lift_constant(v_inv, x)
    ginv = lift_constant(v_full, x)
    new_beta = gmat * st.beta0 * ginv
    expect = LoopMatrix.diagonal(eigvals)
    assert new_beta == expect
    return GaugeElement(gmat, ginv), Stratum(x, Fraction(0), new_beta)
