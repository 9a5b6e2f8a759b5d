import random
from fractions import Fraction as F

import pytest

from formalconn.apartment import (
    AffineWeylElt,
    ApartmentPoint,
    critical_numbers,
    grade_of_elementary,
    graded_basis,
    graded_dim,
    h_x_roots,
    lift_constant,
    min_grade,
    mp_decompose,
    mp_depth,
    pairing,
    theta_lift_root,
    theta_lift_torus,
)
from formalconn.errors import NotInHx, ZeroInput
from formalconn.klinear import kmat, mat_rank
from formalconn.matrices import LoopMatrix
from formalconn.scalars import PuiseuxSeries


def coxeter_uniformizer(n):
    entries = {(i, i + 1): PuiseuxSeries.one() for i in range(n - 1)}
    entries[(n - 1, 0)] = PuiseuxSeries.z_pow(1)
    return LoopMatrix.from_entries(n, entries)


def rand_point(rng, n, den=4):
    return ApartmentPoint([F(rng.randint(-den * 2, den * 2), rng.choice([1, 2, den])) for _ in range(n)])


def rand_matrix(rng, n, prec=F(5), vmin=-2):
    entries = {}
    for i in range(n):
        for j in range(n):
            if rng.random() < 0.7:
                terms = {}
                for _ in range(rng.randint(1, 3)):
                    terms[F(rng.randint(vmin, int(prec) - 1))] = F(rng.randint(-5, 5))
                entries[(i, j)] = PuiseuxSeries(terms, prec=prec)
    return LoopMatrix.from_entries(n, entries, prec=prec)


class TestGrades:
    def test_grade_formula_examples(self):
        x = ApartmentPoint([0, F(1, 2)])
        assert grade_of_elementary(0, 0, F(3), x) == 3
        assert grade_of_elementary(0, 1, 0, x) == F(-1, 2)
        y = ApartmentPoint([0, F(-1, 2)])
        assert grade_of_elementary(0, 1, -1, y) == F(-1, 2)

    def test_decompose_uniformizer_inverse(self):
        # pi_2^{-1} at (0, -1/2): single component at grade -1/2
        w = coxeter_uniformizer(2)
        winv = w.inverse()
        x = ApartmentPoint([0, F(-1, 2)])
        dec = mp_decompose(winv, x)
        assert dec.grades() == [F(-1, 2)]
        assert dec.component(F(-1, 2)) == winv

    def test_decompose_identity(self):
        x = ApartmentPoint([F(1, 3), F(-1, 4)])
        dec = mp_decompose(LoopMatrix.identity(2), x)
        assert dec.grades() == [F(0)]

    def test_decompose_diagonal_pole(self):
        m = LoopMatrix.diagonal(
            [PuiseuxSeries.z_pow(-2), PuiseuxSeries.z_pow(-2, coeff=2)]
        )
        dec = mp_decompose(m, ApartmentPoint([0, 0]))
        assert dec.grades() == [F(-2)]

    def test_depth_examples(self):
        w = coxeter_uniformizer(2)
        assert mp_depth(w.inverse(), ApartmentPoint([0, F(-1, 2)])) == F(-1, 2)
        e = LoopMatrix.elementary(2, 0, 1, exponent=-1)
        assert mp_depth(e, ApartmentPoint([0, 0])) == -1
        assert mp_depth(LoopMatrix.identity(3), ApartmentPoint([0, F(1, 3), 1])) == 0
        with pytest.raises(ZeroInput):
            mp_depth(LoopMatrix.zero(2, prec=3), ApartmentPoint([0, 0]))

    def test_center_shift_invariance(self):
        rng = random.Random(3)
        for _ in range(20):
            x = rand_point(rng, 3)
            m = rand_matrix(rng, 3)
            shifted = x.shifted_center(F(7, 3))
            assert min_grade(m, x) == min_grade(m, shifted)

    def test_critical_numbers(self):
        assert critical_numbers(ApartmentPoint([0, 0])) == [0]
        assert critical_numbers(ApartmentPoint([0, F(1, 2)])) == [0, F(1, 2)]
        assert critical_numbers(ApartmentPoint([0, F(1, 3), F(2, 3)])) == [
            0,
            F(1, 3),
            F(2, 3),
        ]


class TestHx:
    def test_h_x_roots(self):
        assert len(h_x_roots(ApartmentPoint([0, 0]))) == 2
        assert h_x_roots(ApartmentPoint([0, F(1, 2)])) == set()
        assert len(h_x_roots(ApartmentPoint([0, 1, 0]))) == 6

    def test_theta_lift(self):
        x = ApartmentPoint([0, 0])
        t = theta_lift_torus([2, 3], x)
        assert t == LoopMatrix.diagonal([2, 3])
        u = theta_lift_root(0, 1, 5, x)
        assert u == LoopMatrix.identity(2) + LoopMatrix.elementary(2, 0, 1, coeff=5)
        # at x = (0,-1): alpha(x) = 1, lift is I + c z E_12... exponent -alpha = -1
        y = ApartmentPoint([0, -1])
        u2 = theta_lift_root(0, 1, 3, y)
        assert u2 == LoopMatrix.identity(2) + LoopMatrix.elementary(
            2, 0, 1, exponent=-1, coeff=3
        )
        assert min_grade(u2 - LoopMatrix.identity(2), y) == 0
        with pytest.raises(NotInHx):
            theta_lift_root(0, 1, 1, ApartmentPoint([0, F(1, 2)]))
        with pytest.raises(NotInHx):
            lift_constant([[1, 1], [0, 1]], ApartmentPoint([0, F(1, 2)]))


class TestAffineWeyl:
    def test_action_examples(self):
        x = ApartmentPoint([0, 0])
        w = AffineWeylElt((0, 1), (1, 0))
        assert w.act(x) == ApartmentPoint([1, 0])
        swap = AffineWeylElt((1, 0), (0, 0))
        assert swap.act(ApartmentPoint([0, F(1, 2)])) == ApartmentPoint([F(1, 2), 0])
        ident = AffineWeylElt.identity(2)
        assert ident.act(ApartmentPoint([F(1, 3), 2])) == ApartmentPoint([F(1, 3), 2])

    def test_group_law(self):
        rng = random.Random(5)
        for _ in range(40):
            n = rng.choice([2, 3, 4])
            elts = []
            for _ in range(3):
                perm = list(range(n))
                rng.shuffle(perm)
                elts.append(
                    AffineWeylElt(perm, [rng.randint(-2, 2) for _ in range(n)])
                )
            a, b, c = elts
            assert (a * b) * c == a * (b * c)
            assert a * AffineWeylElt.identity(n) == a
            assert a * a.inverse() == AffineWeylElt.identity(n)
            x = rand_point(rng, n)
            assert (a * b).act(x) == a.act(b.act(x))

    def test_grading_intertwined(self):
        # Ad of the representative matches the point action on grades
        rng = random.Random(9)
        for _ in range(25):
            n = rng.choice([2, 3])
            perm = list(range(n))
            rng.shuffle(perm)
            w = AffineWeylElt(perm, [rng.randint(-2, 2) for _ in range(n)])
            x = rand_point(rng, n)
            m = rand_matrix(rng, n)
            rep = w.matrix()
            moved = rep * m * rep.inverse()
            gx = mp_decompose(m, x)
            gy = mp_decompose(moved, w.act(x))
            # compare below the common readable grade
            cut = min(g for g in (gx.grade_prec, gy.grade_prec) if g is not None)
            left = {r for r in gx.components if r < cut}
            right = {r for r in gy.components if r < cut}
            assert left == right
            for r in left:
                assert gy.components[r] == rep * gx.components[r] * rep.inverse()


class TestEigenAndDuality:
    def test_eigenvalue_property(self):
        rng = random.Random(21)
        for _ in range(100):
            n = rng.choice([2, 3])
            x = rand_point(rng, n)
            m = rand_matrix(rng, n)
            xd = x.diag_matrix()
            dec = mp_decompose(m, x)
            for r, comp in dec.components.items():
                lhs = comp.tau() + xd.commutator(comp)
                assert (lhs - comp.scale(r)).is_zero()

    def test_duality_perfect_pairing(self):
        rng = random.Random(23)
        for x in [
            ApartmentPoint([0, F(-1, 2)]),
            ApartmentPoint([0, F(1, 3), F(2, 3)]),
            rand_point(rng, 3),
        ]:
            n = x.n
            for r in critical_numbers(x):
                basis_r = graded_basis(x, r)
                basis_neg = graded_basis(x, -r)
                assert len(basis_r) == len(basis_neg)
                gram = [
                    [
                        LoopMatrix.elementary(n, i, j, exponent=m).residue_pairing(
                            LoopMatrix.elementary(n, i2, j2, exponent=m2)
                        )
                        for (i2, j2, m2) in basis_neg
                    ]
                    for (i, j, m) in basis_r
                ]
                assert mat_rank(kmat(gram)) == len(basis_r)
                # cross grades pair to zero
                for s in critical_numbers(x):
                    if s == -r or (s + r).denominator > 1:
                        continue
                    for (i, j, m) in basis_r[:2]:
                        for (i2, j2, m2) in graded_basis(x, s)[:2]:
                            assert LoopMatrix.elementary(n, i, j, exponent=m).residue_pairing(
                                LoopMatrix.elementary(n, i2, j2, exponent=m2)
                            ).is_zero()

    def test_dimension_sum_over_period(self):
        rng = random.Random(27)
        for _ in range(10):
            n = rng.choice([2, 3, 4])
            x = rand_point(rng, n)
            total = sum(graded_dim(x, r) for r in critical_numbers(x))
            assert total == n * n
