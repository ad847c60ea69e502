import math
import random

import pytest

from forms_oracle import class_group_invariants, fundamental_discriminants
from sunitkit.apps import (ClassGroup, CompactRep, Decomposition, NotAnSUnit, NotPrincipal, arch_data,
                           class_decompose, class_group, compact_rep, compact_rep_of, gamma_bit_bound, pip,
                           quadratic_hr_estimate, quadratic_order)
from sunitkit.ideals import FracIdeal, minkowski_bound, parse_ideal, prime_decompose, valuation


class TestQuadraticOrder:
    @pytest.mark.parametrize("d", [-3, -4, -23, 5, 8, 12, -20])
    def test_discriminant(self, d):
        assert quadratic_order(d).discriminant == d

    @pytest.mark.parametrize("d", [-1, 6, -16])
    def test_rejects(self, d):
        with pytest.raises(ValueError):
            quadratic_order(d)

    def test_hr_estimate(self):
        # h(-23) = 3 with R = 1 and w = 2
        assert quadratic_hr_estimate(quadratic_order(-23)) == pytest.approx(3, rel=0.05)


class TestClassGroup:
    @pytest.mark.parametrize("d", fundamental_discriminants(200))
    def test_against_forms(self, d):
        order = quadratic_order(d)
        cg = class_group(order, prime_bound_override=minkowski_bound(order))
        assert tuple(cg.invariants) == class_group_invariants(d)

    def test_default_bound(self):
        cg = class_group(quadratic_order(-84))
        assert sorted(cg.invariants) == [2, 2]

    def test_real_quadratic(self):
        # h(Q(sqrt 10)) = 2, h(Q(sqrt 79)) = 3
        assert class_group(quadratic_order(40)).invariants == [2]
        assert class_group(quadratic_order(316)).invariants == [3]

    def test_cubic_trivial(self, cubic):
        assert class_group(cubic).trivial

    def test_coordinates_and_json(self, zsqrtm5):
        cg = class_group(zsqrtm5)
        P2 = prime_decompose(2, zsqrtm5)[0]
        j = cg.S.index(P2)
        e = [0] * len(cg.S)
        e[j] = 1
        assert cg.coordinates(e) == [1]
        e[j] = 2
        assert cg.coordinates(e) == [0]
        back = ClassGroup.from_json(zsqrtm5, cg.to_json())
        assert back.invariants == cg.invariants and back.coordinates(e) == [0]


class TestPip:
    def test_gauss(self, gauss):
        a = FracIdeal.principal(gauss.parse_element("7+4*w"))
        g = pip(gauss, a)
        assert FracIdeal.principal(g) == a

    def test_real_quadratic_reduces_units(self, zsqrt2):
        x = zsqrt2.parse_element("(17+3*w)*(1+w)^9")
        g = pip(zsqrt2, FracIdeal.principal(x))
        assert FracIdeal.principal(g) == FracIdeal.principal(x)
        # unit reduction keeps the generator small
        assert g.bit_size() < x.bit_size()

    def test_non_principal(self, zsqrtm5):
        with pytest.raises(NotPrincipal):
            pip(zsqrtm5, parse_ideal(zsqrtm5, "gens:2,1+w"))

    def test_square_of_non_principal(self, zsqrtm5):
        a = parse_ideal(zsqrtm5, "gens:2,1+w")
        g = pip(zsqrtm5, a * a)
        assert FracIdeal.principal(g) == a * a

    def test_unit_ideal(self, cubic):
        assert pip(cubic, FracIdeal.unit(cubic)) == cubic.parse_element("1")

    def test_random_principal(self, zm23):
        rng = random.Random(4)
        for _ in range(5):
            x = zm23.parse_element(f"{rng.randint(-9, 9)}+{rng.randint(1, 9)}*w")
            a = FracIdeal.principal(x)
            assert FracIdeal.principal(pip(zm23, a)) == a


class TestDecompose:
    @pytest.mark.parametrize("spec", ["gens:2,1+w", "gens:3,1+w", "gens:7,3+w", "gens:6"])
    def test_zsqrtm5(self, zsqrtm5, spec):
        a = parse_ideal(zsqrtm5, spec)
        dec = class_decompose(zsqrtm5, a)
        assert dec.verify(a)
        back = Decomposition.from_json(zsqrtm5, dec.to_json())
        assert back.verify(a)

    def test_large_prime(self, zm23):
        # a prime far outside the generating set
        P = prime_decompose(101, zm23)[0]
        dec = class_decompose(zm23, P.ideal, prime_bound_override=minkowski_bound(zm23))
        assert dec.verify(P.ideal)
        assert dec.primes and all(Q.norm <= 3 for Q in dec.primes)


class TestCompactRep:
    @pytest.mark.parametrize("k", [1, 8, 16, 100, -37])
    def test_unit_powers(self, zsqrt2, k):
        x = zsqrt2.parse_element("1+w") ** k
        rep = compact_rep_of(x, [], 2)
        assert rep.expand() == x
        assert rep.k0 <= max(1, math.ceil(math.log2(abs(k)))) + 1
        assert rep.max_bits() <= gamma_bit_bound(zsqrt2, [], 2)

    def test_s_unit_base_three(self, gauss):
        S = prime_decompose(2, gauss) + prime_decompose(13, gauss)
        y = gauss.parse_element("3+2*w") ** 40 * gauss.parse_element("1+w") ** -7
        rep = compact_rep_of(y, S, 3)
        assert rep.expand() == y
        assert rep.valuations(S) == [valuation(y, P) for P in S]
        assert sorted(rep.valuations(S)[1:]) == [0, 40]
        assert rep.max_bits() <= gamma_bit_bound(gauss, S, 3)

    def test_json(self, gauss):
        S = prime_decompose(2, gauss)
        x = gauss.parse_element("1+w") ** 9
        rep = compact_rep_of(x, S, 2)
        assert CompactRep.from_json(gauss, rep.to_json()).expand() == x

    def test_wrong_logs(self, zsqrt2):
        data = arch_data(zsqrt2.parse_element("1+w") ** 5)
        logs = [data.logs[0], data.logs[1] + data.logs[1]]  # not the log vector of a unit
        with pytest.raises(NotAnSUnit):
            compact_rep(logs, data.phases, [], 2, zsqrt2, [], 128)
