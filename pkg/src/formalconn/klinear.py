"""Exact linear algebra and univariate polynomials over Q(zeta_m).

Matrices are lists of rows of Cyclotomic entries; polynomials are ascending
coefficient lists.  Root extraction inside cyclotomic fields delegates the
factorization to sympy and verifies every returned root with our own
arithmetic before use.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import BaseFieldError
from .scalars import CYC_ONE, CYC_ZERO, Cyclotomic


def kmat(rows):
    return [[Cyclotomic.coerce(x) for x in row] for row in rows]


def mat_rref(rows):
    """Reduced row echelon form; returns (rref, pivot column list)."""
    a = [list(r) for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if not a[i][c].is_zero()), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and not a[i][c].is_zero():
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def mat_rank(rows) -> int:
    return len(mat_rref(rows)[1])


def mat_nullspace(rows):
    """Basis of the right kernel as a list of vectors."""
    if not rows:
        return []
    rref, pivots = mat_rref(rows)
    ncols = len(rows[0])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [CYC_ZERO] * ncols
        v[fc] = CYC_ONE
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(v)
    return basis


def mat_solve(rows, rhs):
    """One solution of A x = b, or None."""
    if not rows:
        return [] if all(Cyclotomic.coerce(b).is_zero() for b in rhs) else None
    aug = [list(r) + [Cyclotomic.coerce(b)] for r, b in zip(rows, rhs)]
    rref, pivots = mat_rref(aug)
    ncols = len(rows[0])
    if ncols in pivots:
        return None  # pivot in the augmented column: inconsistent
    x = [CYC_ZERO] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = rref[r][ncols]
    return x


def mat_mul(a, b):
    return [
        [sum((x * y for x, y in zip(row, col)), CYC_ZERO) for col in zip(*b)]
        for row in a
    ]


def mat_identity(n):
    return [[CYC_ONE if i == j else CYC_ZERO for j in range(n)] for i in range(n)]


def mat_inverse(rows):
    n = len(rows)
    aug = [list(r) + list(e) for r, e in zip(rows, mat_identity(n))]
    rref, pivots = mat_rref(aug)
    if pivots != list(range(n)):
        raise ZeroDivisionError("matrix not invertible over k")
    return [row[n:] for row in rref]


def char_poly(rows):
    """Characteristic polynomial det(tI - A), ascending coefficients.

    Faddeev-LeVerrier: only divisions by integers, exact over any field of
    characteristic zero.
    """
    n = len(rows)
    coeffs = [CYC_ZERO] * n + [CYC_ONE]  # t^n coefficient
    m = mat_identity(n)
    c = CYC_ONE
    for k in range(1, n + 1):
        am = mat_mul(rows, m)
        tr = sum((am[i][i] for i in range(n)), CYC_ZERO)
        c = tr * Fraction(-1, k)
        coeffs[n - k] = c
        m = [[am[i][j] + (c if i == j else CYC_ZERO) for j in range(n)] for i in range(n)]
    return coeffs


# ---------------------------------------------------------------------------
# polynomials over k (ascending coefficient lists of Cyclotomic)


def poly_trim(p):
    p = list(p)
    while p and Cyclotomic.coerce(p[-1]).is_zero():
        p.pop()
    return [Cyclotomic.coerce(c) for c in p]


def poly_mul(a, b):
    a, b = poly_trim(a), poly_trim(b)
    if not a or not b:
        return []
    out = [CYC_ZERO] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] = out[i + j] + ca * cb
    return poly_trim(out)


def poly_divmod(a, b):
    a, b = poly_trim(a), poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [CYC_ZERO] * max(0, len(a) - len(b) + 1)
    r = list(a)
    inv = b[-1].inverse()
    while len(r) >= len(b):
        c = r[-1] * inv
        d = len(r) - len(b)
        q[d] = c
        for j, cb in enumerate(b):
            r[d + j] = r[d + j] - c * cb
        r = poly_trim(r[:-1])
        if not r:
            break
    return poly_trim(q), poly_trim(r)


def poly_deriv(a):
    return poly_trim([c * i for i, c in enumerate(a)][1:])


def poly_gcd(a, b):
    a, b = poly_trim(a), poly_trim(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    if a:
        inv = a[-1].inverse()
        a = [c * inv for c in a]
    return a


def poly_is_squarefree(a) -> bool:
    g = poly_gcd(a, poly_deriv(a))
    return len(g) <= 1


def poly_eval(a, x):
    acc = CYC_ZERO
    for c in reversed(poly_trim(a)):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# sympy-backed factorization in cyclotomic fields


def _sym_field(order):
    import sympy

    if order <= 2:
        return sympy.QQ, None
    gen = sympy.exp(2 * sympy.pi * sympy.I / order)
    return sympy.QQ.algebraic_field(gen), gen


def _to_sym_coeff(c: Cyclotomic, order: int, dom):
    import sympy

    if order <= 2:
        x = c._coeffs_at(1)[0]
        return sympy.QQ(x.numerator, x.denominator)
    coeffs = c._coeffs_at(order)
    return dom([sympy.QQ(x.numerator, x.denominator) for x in reversed(coeffs)])


def _from_sym_coeff(val, order: int) -> Cyclotomic:
    if order <= 2:
        return Cyclotomic.coerce(Fraction(int(val.numerator), int(val.denominator)))
    asc = list(reversed(val.to_list()))
    return Cyclotomic(order, [Fraction(int(x.numerator), int(x.denominator)) for x in asc])


def roots_in_cyclotomics(poly, order=None):
    """Roots of the polynomial lying in Q(zeta_order), with multiplicity.

    ``order`` defaults to the lcm of the coefficient orders; roots living in
    a strictly larger cyclotomic field are not searched for here.
    """
    import sympy

    poly = poly_trim(poly)
    if len(poly) <= 1:
        return []
    if order is None:
        order = 1
        for c in poly:
            order = math.lcm(order, Cyclotomic.coerce(c).order)
    dom, _ = _sym_field(order)
    y = sympy.symbols("y")
    sym_coeffs = [_to_sym_coeff(Cyclotomic.coerce(c), order, dom) for c in reversed(poly)]
    P = sympy.Poly(sym_coeffs, y, domain=dom)
    roots = []
    for factor, mult in P.factor_list()[1]:
        fc = factor.rep.to_list()  # descending, domain elements
        if len(fc) == 2:  # linear: lead*y + c0  ->  root -c0/lead
            lead = _from_sym_coeff(fc[0], order)
            c0 = _from_sym_coeff(fc[1], order)
            root = -c0 / lead
            assert poly_eval(poly, root).is_zero(), "sympy bridge returned a non-root"
            roots.append((root, mult))
    return roots


def nth_root_in_cyclotomics(c: Cyclotomic, b: int) -> Cyclotomic:
    """Some y with y^b = c inside a cyclotomic field, if one exists.

    Tries Q(zeta_M) for a ladder of orders M built on lcm(order(c), b); raises
    BaseFieldError when no cyclotomic root is found.
    """
    c = Cyclotomic.coerce(c)
    if b == 1:
        return c
    if c.is_zero():
        return c
    base = math.lcm(c.order, b)
    seen = set()
    for mult in (1, 2, 3, 4, 6, 8, 12, 24):
        order = base * mult
        if order in seen or order > 120:
            continue
        seen.add(order)
        poly = [-c] + [CYC_ZERO] * (b - 1) + [CYC_ONE]
        found = roots_in_cyclotomics(poly, order=order)
        for root, _ in found:
            assert root ** b == c
            return root
    raise BaseFieldError(f"no cyclotomic {b}-th root of {c}")
