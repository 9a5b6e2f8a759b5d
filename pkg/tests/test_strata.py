import math
import random
from fractions import Fraction as F

import pytest

from formalconn.apartment import ApartmentPoint
from formalconn.errors import InsufficientPrecision
from formalconn.matrices import LoopMatrix, matrix_exp
from formalconn.scalars import PuiseuxSeries
from formalconn.strata import (
    Connection,
    Stratum,
    candidate_points,
    contains_stratum,
    is_fundamental,
    is_regular_stratum,
    is_resonant_residues,
    leading_stratum,
    slope,
    slope_report,
)
from formalconn.torus import TorusData

GL2 = TorusData([2])


def uniformizer_power(n, m):
    return TorusData([n]).uniformizer_power(0, m)


def upper_shear_witness(mat, n):
    """Explicit staircase gauge making a strictly-upper-triangular pole
    matrix regular singular: diag(z^(c(n-1)), ..., z^0) for large c."""
    deepest = 0
    for i, j, s in mat.entries():
        v = s.valuation()
        if v is not None:
            deepest = min(deepest, v)
    c = -int(deepest) + 1
    return LoopMatrix.diagonal(
        [PuiseuxSeries.z_pow(c * (n - 1 - i)) for i in range(n)]
    )


class TestLeadingStratum:
    def test_coxeter_example(self):
        winv = uniformizer_power(2, -1)
        st = leading_stratum(Connection(winv), ApartmentPoint([0, F(-1, 2)]))
        assert st.depth == F(1, 2)
        assert st.beta0 == winv

    def test_diagonal(self):
        d = LoopMatrix.diagonal(
            [PuiseuxSeries.z_pow(-1), PuiseuxSeries.z_pow(-1, coeff=2)]
        )
        st = leading_stratum(Connection(d), ApartmentPoint([0, 0]))
        assert st.depth == 1 and st.beta0 == d

    def test_constant(self):
        c = LoopMatrix.from_constant([[1, 2], [3, 4]])
        st = leading_stratum(Connection(c), ApartmentPoint([0, 0]))
        assert st.depth == 0 and st.beta0 == c

    def test_precision_guard(self):
        m = LoopMatrix.zero(2, ram=2, prec=F(1, 2))
        with pytest.raises(InsufficientPrecision):
            leading_stratum(Connection(m), ApartmentPoint([0, F(1, 2)]))


class TestFundamental:
    def test_examples(self):
        x0 = ApartmentPoint([0, 0])
        d = LoopMatrix.diagonal(
            [PuiseuxSeries.z_pow(-1), PuiseuxSeries.z_pow(-1, coeff=2)]
        )
        assert is_fundamental(Stratum(x0, 1, d))
        nil = Stratum(x0, 1, LoopMatrix.elementary(2, 0, 1, exponent=-1))
        assert not is_fundamental(nil)
        winv = uniformizer_power(2, -1)
        assert is_fundamental(Stratum(ApartmentPoint([0, F(-1, 2)]), F(1, 2), winv))


class TestContainment:
    def test_round_trip(self):
        winv = uniformizer_power(2, -1)
        c = Connection(winv)
        st = leading_stratum(c, ApartmentPoint([0, F(-1, 2)]))
        assert contains_stratum(c, st)

    def test_wrong_depth_false(self):
        winv = uniformizer_power(2, -1)
        deep = Connection(uniformizer_power(2, -3))
        st = leading_stratum(Connection(winv), ApartmentPoint([0, F(-1, 2)]))
        assert not contains_stratum(deep, st)

    def test_deeper_zero_functional(self):
        winv = uniformizer_power(2, -1)
        x = ApartmentPoint([0, F(-1, 2)])
        st = Stratum(x, 1, LoopMatrix.zero(2))
        assert contains_stratum(Connection(winv), st)


class TestSlope:
    def test_coxeter_families(self):
        for n in (2, 3):
            for m in range(1, 2 * n + 1):
                if math.gcd(m, n) != 1:
                    continue
                c = Connection(uniformizer_power(n, -m))
                assert slope(c) == F(m, n), (n, m)

    def test_witness_point(self):
        rep = slope_report(Connection(uniformizer_power(2, -1)))
        assert rep.slope == F(1, 2)
        assert rep.fundamental
        assert rep.point == ApartmentPoint([0, F(-1, 2)])

    def test_upper_triangular_zero(self):
        sh = LoopMatrix.elementary(2, 0, 1, exponent=-1)
        assert slope(Connection(sh)) == 0
        # explicit witness: diag(z, 1) gauges it into the parahoric
        g = LoopMatrix.diagonal([PuiseuxSeries.z_pow(1), PuiseuxSeries.one()])
        moved = g * sh * g.inverse() - g.tau() * g.inverse()
        assert (moved.valuation() or 0) >= 0

        big = LoopMatrix.from_entries(
            3,
            {
                (0, 1): PuiseuxSeries.z_pow(-1),
                (0, 2): PuiseuxSeries.z_pow(-2),
                (1, 2): PuiseuxSeries.z_pow(-1),
            },
        )
        assert slope(Connection(big)) == 0
        w = upper_shear_witness(big, 3)
        moved = w * big * w.inverse() - w.tau() * w.inverse()
        assert (moved.valuation() or 0) >= 0

    def test_diagonal(self):
        d = LoopMatrix.diagonal(
            [PuiseuxSeries.z_pow(-2), PuiseuxSeries.z_pow(-2, coeff=2)]
        )
        assert slope(Connection(d)) == 2

    def test_center_shift_invariance(self):
        # depths computed from strata are invariant under the center direction
        winv = uniformizer_power(2, -1)
        x = ApartmentPoint([0, F(-1, 2)])
        xs = x.shifted_center(F(3, 7))
        st = leading_stratum(Connection(winv), x)
        st2 = leading_stratum(Connection(winv), xs)
        assert st.depth == st2.depth
        assert is_fundamental(st) == is_fundamental(st2)

    def test_gauge_invariance_small(self):
        rng = random.Random(61)
        base = Connection(uniformizer_power(2, -1).truncated(10))
        want = slope(base)
        for _ in range(10):
            g = random_gauge(rng, 2, prec=10)
            moved = g * base.matrix * g.inverse() - g.tau() * g.inverse()
            assert slope(Connection(moved)) == want

    def test_candidate_points_shape(self):
        pts = candidate_points(2)
        assert ApartmentPoint([0, F(1, 2)]) in pts
        assert ApartmentPoint([F(1, 2), 0]) in pts
        assert all(min(p.coords) == 0 for p in pts)


def random_gauge(rng, n, prec=10):
    kind = rng.choice(["const", "shear", "exp"])
    if kind == "const":
        rows = [[F(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
        for i in range(n):
            rows[i][i] = F(rng.choice([1, -1, 2]))
        m = LoopMatrix.from_constant(rows, prec=prec)
        try:
            m.inverse()
            return m
        except ZeroDivisionError:
            return LoopMatrix.identity(n, prec=prec)
    if kind == "shear":
        return LoopMatrix.diagonal(
            [PuiseuxSeries.z_pow(rng.randint(-1, 1), prec=prec) for _ in range(n)]
        )
    entries = {}
    for i in range(n):
        for j in range(n):
            if rng.random() < 0.5:
                entries[(i, j)] = PuiseuxSeries(
                    {F(rng.randint(1, 2)): F(rng.randint(-2, 2))}, prec=prec
                )
    return matrix_exp(LoopMatrix.from_entries(n, entries, prec=prec))


class TestResonance:
    def test_examples(self):
        x0 = ApartmentPoint([0, 0])
        assert is_resonant_residues([1, 0], x0)       # difference -1 via (2,1)
        assert not is_resonant_residues([F(1, 3), 0], x0)

    def test_permutation_invariance(self):
        # residue differences transform by the permutation; the resonance
        # verdict is unchanged under conjugation inside N cap H_x
        rng = random.Random(67)
        for _ in range(40):
            n = rng.choice([2, 3])
            x = ApartmentPoint([0] * n)
            res = [F(rng.randint(-4, 4), rng.choice([1, 2, 3])) for _ in range(n)]
            perm = list(range(n))
            rng.shuffle(perm)
            permuted = [res[perm[i]] for i in range(n)]
            assert is_resonant_residues(res, x) == is_resonant_residues(permuted, x)


class TestRegularStratum:
    def test_coxeter(self):
        winv = uniformizer_power(2, -1)
        st = Stratum(ApartmentPoint([0, F(-1, 2)]), F(1, 2), winv)
        wit = is_regular_stratum(st)
        assert wit is not None and wit.weyl_class.cycle_type == (2,)
        assert wit.conjugator is not None

    def test_split(self):
        d = LoopMatrix.diagonal(
            [PuiseuxSeries.z_pow(-1), PuiseuxSeries.z_pow(-1, coeff=2)]
        )
        wit = is_regular_stratum(Stratum(ApartmentPoint([0, 0]), 1, d))
        assert wit is not None and wit.weyl_class.cycle_type == (1, 1)

    def test_non_regular(self):
        x0 = ApartmentPoint([0, 0])
        m = (LoopMatrix.identity(2) + LoopMatrix.elementary(2, 0, 1)).shift(-1)
        assert is_regular_stratum(Stratum(x0, 1, m)) is None

    def test_resonant_depth_zero(self):
        x0 = ApartmentPoint([0, 0])
        st = Stratum(x0, 0, LoopMatrix.diagonal([1, 0]))
        assert is_regular_stratum(st) is None
        st2 = Stratum(x0, 0, LoopMatrix.diagonal([F(1, 3), 0]))
        wit = is_regular_stratum(st2)
        assert wit is not None and wit.weyl_class.cycle_type == (1, 1)

    def test_mixed_class(self):
        T21 = TorusData([2, 1])
        st = Stratum(T21.base_point, F(1, 2), T21.uniformizer_power(0, -1))
        wit = is_regular_stratum(st)
        assert wit is not None and wit.weyl_class.cycle_type == (2, 1)

    def test_conjugator_normalizes(self):
        winv = uniformizer_power(2, -1)
        st = Stratum(ApartmentPoint([0, F(-1, 2)]), F(1, 2), winv)
        wit = is_regular_stratum(st)
        g = wit.conjugator
        ginv = g.inverse()
        model = wit.torus.uniformizer(0)
        # Ad(g) maps the standard Cartan into the centralizer of beta0
        moved = g * model * ginv
        assert moved.commutator(st.beta0).is_zero()
