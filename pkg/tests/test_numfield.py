import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import poly_disc, resultant_norm
from sunitkit.bigfix import FixComplex
from sunitkit.numfield import (FieldElement, Reducible, ZeroElement, discriminant, elem_norm, elem_trace,
                               element_from_json, element_to_json, equation_order, field_summary, make_field,
                               order_from_spec, sturm_real_root_count)

coord = st.integers(-30, 30)


def random_element(order, rng, bound=20):
    while True:
        x = FieldElement.make(order, [rng.randint(-bound, bound) for _ in range(order.n)], rng.randint(1, 3))
        if not x.is_zero():
            return x


class TestFields:
    def test_signatures(self):
        assert make_field([1, 0, 1]).signature == (0, 1)
        assert make_field([1, 0, -2]).signature == (2, 0)
        assert make_field([1, 0, 0, -2]).signature == (1, 1)

    def test_reducible(self):
        with pytest.raises(Reducible):
            make_field([1, 0, -4])

    def test_not_monic(self):
        with pytest.raises(ValueError):
            make_field([2, 0, 1])

    @pytest.mark.parametrize("poly", [[1, 0, -2], [1, 0, 0, -2], [1, -3, 0, 1], [1, 0, -10, 0, 1], [1, 1, 1, 1, 1]])
    def test_sturm_against_numpy(self, poly):
        import numpy as np

        real = sum(1 for z in np.roots(poly) if abs(z.imag) < 1e-9)
        assert sturm_real_root_count(list(reversed(poly))) == real


class TestDiscriminant:
    @pytest.mark.parametrize("poly,disc", [([1, 0, 1], -4), ([1, 0, -2], 8), ([1, -1, -1], 5)])
    def test_examples(self, poly, disc):
        assert discriminant(equation_order(make_field(poly))) == disc

    @pytest.mark.parametrize("poly", [[1, 0, 0, -2], [1, -1, 6], [1, 0, -10, 0, 1], [1, 1, -2, -1]])
    def test_equation_order(self, poly):
        assert equation_order(make_field(poly)).discriminant == poly_disc(poly)

    def test_half_integral_order(self):
        # Z[(1+sqrt5)/2] given by an explicit basis over Z[sqrt5]
        order = order_from_spec({"poly": [1, 0, -5], "order_basis": [["1", "0"], ["1/2", "1/2"]]})
        assert order.discriminant == 5


class TestEmbeddings:
    def test_sqrt2(self, zsqrt2):
        table = zsqrt2.embeddings(80)
        roots = sorted(float(r) for r in table.roots)
        assert roots == pytest.approx([-math.sqrt(2), math.sqrt(2)], abs=1e-15)
        for r in table.roots:
            assert r.radius() <= Fraction(1, 2 ** 80)

    def test_gauss_exact(self, gauss):
        table = gauss.embeddings(200)
        (root,) = table.roots
        assert isinstance(root, FixComplex)
        assert root.re.contains(0) and root.im.contains(1)

    def test_refinement(self, cubic):
        r64 = max(x.re.radius() if isinstance(x, FixComplex) else x.radius() for x in cubic.embeddings(64).roots)
        r128 = max(x.re.radius() if isinstance(x, FixComplex) else x.radius() for x in cubic.embeddings(128).roots)
        assert r128 <= r64 / 2

    def test_norm_matches_embeddings(self, cubic, zsqrt2, gauss):
        rng = random.Random(7)
        for order in (cubic, zsqrt2, gauss):
            n1 = order.signature[0]
            for _ in range(1000 // 3):
                x = random_element(order, rng)
                prod = 1.0
                for j, z in enumerate(order.embeddings(64).embed(x)):
                    prod *= abs(float(z)) if j < n1 else abs(complex(z)) ** 2
                assert prod == pytest.approx(abs(float(x.norm())), rel=1e-9)


class TestNormTrace:
    def test_examples(self, gauss, zsqrt2):
        assert elem_norm(gauss.parse_element("1+w")) == 2
        assert elem_trace(zsqrt2.parse_element("w")) == 0
        assert elem_norm(gauss.parse_element("1")) == 1

    @given(st.lists(coord, min_size=3, max_size=3), st.lists(coord, min_size=3, max_size=3))
    def test_multiplicative(self, a, b):
        from conftest import order_of

        order = order_of("cubic")
        x, y = FieldElement.make(order, a), FieldElement.make(order, b)
        assert elem_norm(x * y) == elem_norm(x) * elem_norm(y)
        assert elem_trace(x + y) == elem_trace(x) + elem_trace(y)

    @given(st.lists(coord, min_size=3, max_size=3))
    def test_resultant(self, a):
        from conftest import POLYS, order_of

        x = FieldElement.make(order_of("cubic"), a)
        assert elem_norm(x) == Fraction(str(resultant_norm(x.to_power(), POLYS["cubic"])))


class TestElements:
    def test_parse_and_format(self, zsqrt2):
        x = zsqrt2.parse_element("(1+w)^3")
        assert str(x) == "7 + 5*w"

    def test_inverse(self, cubic):
        x = cubic.parse_element("1+w+w^2")
        assert x * x.inverse() == cubic.parse_element("1")

    def test_zero_inverse(self, gauss):
        with pytest.raises(ZeroElement):
            gauss.parse_element("0").inverse()

    def test_content_normalised(self, gauss):
        x = FieldElement.make(gauss, [2, 4], 6)
        assert x.coords == (1, 2) and x.denom == 3

    def test_json_round_trip(self, cubic):
        x = cubic.parse_element("(3 - 2*w + w^2)/5")
        assert element_from_json(cubic, element_to_json(x)) == x

    def test_summary(self, gauss):
        s = field_summary(gauss)
        assert s["signature"] == [0, 1] and s["discriminant"] == "-4"
