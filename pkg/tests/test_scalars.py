import random
from fractions import Fraction as F

import pytest

from formalconn.errors import InsufficientPrecision, ZeroSeries
from formalconn.scalars import Cyclotomic, PuiseuxSeries, cyclotomic_polynomial


def rand_rat(rng, num=9, den=4):
    return F(rng.randint(-num, num), rng.randint(1, den))


def rand_series(rng, ram=1, prec=F(6), vmin=-2, terms=4):
    data = {}
    for _ in range(terms):
        q = F(rng.randint(vmin * ram, int(prec * ram) - 1), ram)
        data[q] = rand_rat(rng)
    return PuiseuxSeries(data, ram=ram, prec=prec)


class TestCyclotomic:
    def test_root_of_unity(self):
        for m in (1, 2, 3, 4, 5, 6, 8, 9, 12):
            zm = Cyclotomic.zeta(m)
            assert zm ** m == Cyclotomic.coerce(1)
            if m > 1:
                assert zm ** (m - 1) != Cyclotomic.coerce(1) or m == 2

    def test_minimal_polynomial_vanishes(self):
        for m in (1, 2, 3, 4, 5, 6, 8, 12, 15):
            zm = Cyclotomic.zeta(m)
            acc = Cyclotomic.coerce(0)
            for i, c in enumerate(cyclotomic_polynomial(m)):
                acc = acc + zm ** i * c
            assert acc.is_zero()

    def test_cross_order_identities(self):
        assert Cyclotomic.zeta(6, 2) == Cyclotomic.zeta(3)
        assert Cyclotomic.zeta(2) == Cyclotomic.coerce(-1)
        assert Cyclotomic.zeta(4) ** 2 == Cyclotomic.coerce(-1)
        assert Cyclotomic.zeta(12, 3) == Cyclotomic.zeta(4)

    def test_field_axioms_randomized(self):
        rng = random.Random(7)
        pool = [Cyclotomic.zeta(3), Cyclotomic.zeta(4), Cyclotomic.coerce(F(2, 3)),
                Cyclotomic.zeta(5, 2), Cyclotomic.zeta(8, 3)]
        for _ in range(50):
            a = rng.choice(pool) * rand_rat(rng)
            b = rng.choice(pool) + rand_rat(rng)
            c = rng.choice(pool)
            assert (a + b) * c == a * c + b * c
            if not b.is_zero():
                assert (a / b) * b == a

    def test_inverse(self):
        x = Cyclotomic.zeta(5) + 2
        assert x * x.inverse() == Cyclotomic.coerce(1)
        with pytest.raises(ZeroDivisionError):
            Cyclotomic.coerce(0).inverse()

    def test_rational_descend(self):
        x = Cyclotomic.zeta(3) + Cyclotomic.zeta(3, 2)
        assert x.is_rational() and x.as_rational() == -1


class TestSeriesBasics:
    def test_valuation_examples(self):
        s = PuiseuxSeries({F(2): 1, F(3): 3})
        assert s.valuation() == 2
        empty = PuiseuxSeries.zero(prec=5)
        assert empty.valuation() is None
        assert empty.prec == 5
        u = PuiseuxSeries({F(-3, 2): 1, F(1, 2): 1}, ram=2)
        assert u.valuation() == F(-3, 2)

    def test_tau_examples(self):
        assert PuiseuxSeries({F(2): 5}).tau() == PuiseuxSeries({F(2): 10})
        assert PuiseuxSeries.constant(3).tau().is_zero()
        u = PuiseuxSeries.z_pow(F(1, 2))
        assert u.tau() == PuiseuxSeries({F(1, 2): F(1, 2)}, ram=2)

    def test_invert_examples(self):
        g = PuiseuxSeries({0: 1, 1: -1}, prec=5)  # 1 - z
        inv = g.invert()
        assert inv == PuiseuxSeries({k: 1 for k in range(5)}, prec=5)
        z = PuiseuxSeries.z_pow(1)
        assert z.invert() == PuiseuxSeries.z_pow(-1)
        two = PuiseuxSeries.constant(2)
        assert two.invert() == PuiseuxSeries.constant(F(1, 2))
        with pytest.raises(ZeroSeries):
            PuiseuxSeries.zero(prec=4).invert()

    def test_coeff_guard(self):
        s = PuiseuxSeries({0: 1}, prec=3)
        assert s.coeff(2).is_zero()
        with pytest.raises(InsufficientPrecision):
            s.coeff(3)

    def test_mul_precision_rule(self):
        a = PuiseuxSeries({F(-3, 2): 1}, ram=2, prec=8)
        b = PuiseuxSeries({F(1, 2): 1}, ram=2, prec=7)
        # min(N1 + v2, N2 + v1)
        assert (a * b).prec == min(F(8) + F(1, 2), F(7) - F(3, 2))

    def test_galois_generator(self):
        u = PuiseuxSeries.z_pow(F(1, 2))
        assert u.galois() == PuiseuxSeries({F(1, 2): -1}, ram=2)
        f = PuiseuxSeries.z_pow(1, ram=2)
        assert f.galois() == f  # integral exponents are fixed


class TestSeriesProperties:
    def test_tau_is_derivation(self):
        rng = random.Random(11)
        for _ in range(60):
            ram = rng.choice([1,  2, 3])
            a = rand_series(rng, ram=ram)
            b = rand_series(rng, ram=ram)
            lhs = (a * b).tau()
            rhs = a.tau() * b + a * b.tau()
            assert (lhs - rhs).is_zero()

    def test_tau_eigenvalues(self):
        rng = random.Random(13)
        for _ in range(40):
            q = F(rng.randint(-8, 8), rng.choice([1, 2, 3, 4]))
            s = PuiseuxSeries.z_pow(q)
            assert (s.tau() - s.scale(q)).is_zero()

    def test_invert_round_trip(self):
        rng = random.Random(17)
        for _ in range(200):
            ram = rng.choice([1, 2, 3])
            s = rand_series(rng, ram=ram, prec=F(6), vmin=-2, terms=rng.randint(1, 5))
            if s.valuation() is None:
                continue
            prod = s.invert() * s
            delta = prod - PuiseuxSeries.one(ram)
            assert delta.is_zero()
            assert prod.prec is not None

    def test_exact_times_zero(self):
        z = PuiseuxSeries.zero()
        s = PuiseuxSeries({F(-1): 2}, prec=4)
        assert (z * s).is_zero() and (z * s).prec is None
