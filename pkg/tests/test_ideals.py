import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sunitkit.ideals import (FactorTooLarge, FracIdeal, IndexDivides, factor_ideal, ideal_from_factors, ideal_inv,
                             ideal_mul, ideal_norm, parse_ideal, prime_decompose, prime_from_label, primes_up_to,
                             valuation)
from sunitkit.numfield import FieldElement, equation_order, make_field

coord = st.integers(-25, 25)


class TestPrimeDecomposition:
    def test_ramified(self, gauss):
        (P,) = prime_decompose(2, gauss)
        assert (P.e, P.f) == (2, 1)
        assert P.ideal == parse_ideal(gauss, "gens:2,1+w")

    def test_split(self, gauss):
        ps = prime_decompose(5, gauss)
        assert len(ps) == 2 and all((P.e, P.f) == (1, 1) for P in ps)

    def test_inert(self, gauss):
        (P,) = prime_decompose(3, gauss)
        assert (P.e, P.f) == (1, 2) and P.norm == 9

    @pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13, 31])
    def test_product_formula(self, cubic, p):
        ps = prime_decompose(p, cubic)
        assert sum(P.e * P.f for P in ps) == cubic.n
        prod = FracIdeal.unit(cubic)
        for P in ps:
            prod = prod * P.ideal ** P.e
        assert prod == FracIdeal.from_generators(cubic, [p])

    def test_index_divides(self):
        order = equation_order(make_field([1, 0, -5]))  # Z[sqrt5] has index 2
        with pytest.raises(IndexDivides):
            prime_decompose(2, order)

    def test_label_round_trip(self, zm23):
        for P in primes_up_to(zm23, 30):
            assert prime_from_label(zm23, P.label()) == P


class TestArithmetic:
    def test_product(self, gauss):
        a = FracIdeal.principal(gauss.parse_element("1+w"))
        b = FracIdeal.principal(gauss.parse_element("1-w"))
        assert ideal_mul(a, b) == FracIdeal.from_generators(gauss, [2])

    def test_identity(self, zsqrtm5):
        a = parse_ideal(zsqrtm5, "gens:3,1+w")
        assert a * FracIdeal.unit(zsqrtm5) == a

    def test_norm(self, gauss):
        assert ideal_norm(parse_ideal(gauss, "gens:2,1+w")) == 2

    def test_inverse(self, zsqrtm5):
        a = parse_ideal(zsqrtm5, "gens:2,1+w")
        assert a * ideal_inv(a) == FracIdeal.unit(zsqrtm5)
        assert ideal_inv(a).norm() == Fraction(1, 2)

    def test_hnf_syntax(self, gauss):
        a = parse_ideal(gauss, "hnf:[[2,0],[1,1]]")
        assert a == parse_ideal(gauss, "gens:1+w")

    def test_bad_syntax(self, gauss):
        with pytest.raises(ValueError):
            parse_ideal(gauss, "2,1+w")

    def test_norm_multiplicative_random(self, cubic):
        rng = random.Random(3)
        for _ in range(1000):
            gens = [FieldElement.make(cubic, [rng.randint(-9, 9) for _ in range(3)]) for _ in range(2)]
            if any(g.is_zero() for g in gens):
                continue
            a = FracIdeal.from_generators(cubic, gens[:1] + [rng.randint(1, 12)])
            b = FracIdeal.principal(gens[1])
            assert (a * b).norm() == a.norm() * b.norm()


class TestValuation:
    def test_examples(self, gauss):
        (P,) = prime_decompose(2, gauss)
        assert valuation(gauss.parse_element("2"), P) == 2
        assert valuation(FracIdeal.unit(gauss), P) == 0
        assert valuation(P.ideal ** 3, P) == 3
        assert valuation(P.ideal ** -2, P) == -2

    @given(st.lists(coord, min_size=3, max_size=3))
    def test_norm_identity(self, coords):
        from conftest import order_of

        order = order_of("cubic")
        x = FieldElement.make(order, coords)
        if x.is_zero():
            return
        # sum_P v_P(x) f_P log p = log |N(x)|
        total = 0.0
        for P, e in factor_ideal(x):
            total += e * P.f * math.log(P.p)
        assert total == pytest.approx(math.log(abs(float(x.norm()))), abs=1e-9)


class TestFactorisation:
    def test_six(self, gauss):
        fac = factor_ideal(FracIdeal.from_generators(gauss, [6]))
        shape = sorted((P.p, P.f, e) for P, e in fac)
        assert shape == [(2, 1, 2), (3, 2, 1)]

    def test_unit_ideal(self, gauss):
        assert factor_ideal(FracIdeal.unit(gauss)) == []

    def test_prime(self, gauss):
        (P,) = prime_decompose(2, gauss)
        assert factor_ideal(P.ideal) == [(P, 1)]

    @given(st.lists(coord, min_size=2, max_size=2), st.integers(1, 6))
    def test_round_trip(self, coords, d):
        from conftest import order_of

        order = order_of("zm23")
        x = FieldElement.make(order, coords, d)
        if x.is_zero():
            return
        a = FracIdeal.principal(x)
        assert ideal_from_factors(order, factor_ideal(a)) == a

    def test_budget(self, gauss):
        big = FracIdeal.from_generators(gauss, [(2 ** 61 - 1) * (2 ** 89 - 1)])
        with pytest.raises(FactorTooLarge):
            factor_ideal(big)
