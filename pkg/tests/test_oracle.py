import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sunitkit.bigfix import FixComplex
from sunitkit.elattice import matrix_distance_near, unit_eideal
from sunitkit.ideals import prime_decompose
from sunitkit.numfield import ZeroElement
from sunitkit.oracle import (ControlPoint, OracleParams, compute_u1, eval_oracle, eval_oracle_auto, log_coordinates,
                             phi, to_control)


def near(a, b, tol):
    d = matrix_distance_near(a, b)
    return d is not None and float(d.upper()) <= tol


class TestComputeU1:
    def test_norm_one(self, zsqrt2):
        x = ControlPoint((Fraction(3, 7),), (0, 0), (), ())
        assert compute_u1(x, zsqrt2, [], 64).contains(Fraction(-3, 7))

    def test_zero(self, cubic):
        assert compute_u1(ControlPoint.zero(cubic, 0), cubic, [], 64).contains(0)

    def test_inert_prime(self, zsqrt2):
        # 3 is inert in Z[sqrt2]: N(P) = 9
        (P,) = prime_decompose(3, zsqrt2)
        assert P.f == 2
        x = ControlPoint((Fraction(0),), (0, 0), (), (1,))
        y = compute_u1(x, zsqrt2, [P], 64)
        assert float(y) == pytest.approx(math.log(9), abs=1e-15)
        assert y.radius() <= Fraction(1, 2 ** 64)

    def test_complex_first_place(self, gauss):
        # the single complex place has weight 2: log|x1| = log N(P) / 2
        (P,) = prime_decompose(2, gauss)
        x = ControlPoint((), (), (Fraction(0),), (1,))
        assert float(compute_u1(x, gauss, [P], 64)) == pytest.approx(math.log(2) / 2, abs=1e-15)


class TestControlPoint:
    def test_theta_mod_one(self, gauss):
        x = ControlPoint((), (), (Fraction(7, 4),), ())
        assert x.theta == (Fraction(3, 4),)
        assert (x - x).theta == (0,)

    def test_parse_round_trip(self, cubic):
        x = ControlPoint.parse("u=1/3;mu=1;theta=1/8;v=2,-1", cubic, 2)
        assert ControlPoint.parse(x.to_str(), cubic, 2) == x
        assert ControlPoint.from_json(x.to_json()) == x

    def test_parse_errors(self, cubic):
        with pytest.raises(ValueError):
            ControlPoint.parse("u=1,2", cubic, 0)
        with pytest.raises(ValueError):
            ControlPoint.parse("w=1", cubic, 0)


class TestToControl:
    def test_one(self, cubic):
        assert to_control(cubic.parse_element("1"), [], 64) == ControlPoint.zero(cubic, 0)

    def test_minus_one(self, zsqrt2):
        c = to_control(zsqrt2.parse_element("-1"), [], 64)
        assert c.mu == (1, 1) and c.u == (0,)

    def test_fundamental_unit(self, zsqrt2):
        c = to_control(zsqrt2.parse_element("1+w"), [], 64)
        assert float(c.u[0]) == pytest.approx(0.881373587019543, abs=1e-15)
        assert float(compute_u1(c, zsqrt2, [], 64)) == pytest.approx(-0.881373587019543, abs=1e-15)

    def test_zero(self, gauss):
        with pytest.raises(ZeroElement):
            to_control(gauss.parse_element("0"), [], 64)

    @pytest.mark.parametrize("name,elt,p", [("gauss", "3+2*w", 13), ("cubic", "1+w", 3), ("zsqrt2", "5+w", 23)])
    def test_phi_round_trip(self, request, name, elt, p):
        order = request.getfixturevalue(name)
        x = order.parse_element(elt)
        S = prime_decompose(p, order)
        c = to_control(x, S, 80)
        point = phi(c, order, S, 60)
        # phi(to_control(x)) is x divided by nothing: the E-point of x itself
        emb = order.embeddings(80).embed(x)
        for a, b in zip(point, emb):
            za = complex(a) if isinstance(a, FixComplex) else float(a)
            zb = complex(b) if isinstance(b, FixComplex) else float(b)
            assert abs(za - zb) <= 1e-12 * max(1.0, abs(zb))

    def test_log_coordinates(self, zsqrt2):
        c = ControlPoint((Fraction(1, 2),), (0, 0), (), ())
        lg = log_coordinates(c, zsqrt2, [], 64)
        assert [float(t) for t in lg] == pytest.approx([-0.5, 0.5])


class TestEvalOracle:
    def test_zero_point(self, zsqrt2):
        out = eval_oracle(ControlPoint.zero(zsqrt2, 0), OracleParams(zsqrt2, [], 64))
        assert near(out, unit_eideal(zsqrt2, 64), 2.0 ** -32)

    def test_fundamental_unit(self, zsqrt2):
        c = to_control(zsqrt2.parse_element("1+w"), [], 64)
        out = eval_oracle(c, OracleParams(zsqrt2, [], 64))
        assert near(out, unit_eideal(zsqrt2, 64), 2.0 ** -16)

    def test_gauss_s_unit(self, gauss):
        S = prime_decompose(2, gauss)
        c = to_control(gauss.parse_element("1+w"), S, 64)
        assert c.v == (1,)
        out = eval_oracle(c, OracleParams(gauss, S, 64))
        assert near(out, unit_eideal(gauss, 64), 2.0 ** -16)

    def test_determinant_is_root_disc(self, zsqrtm5):
        S = prime_decompose(2, zsqrtm5) + prime_decompose(3, zsqrtm5)
        x = ControlPoint((), (), (Fraction(1, 3),), (1, -2, 1))
        out = eval_oracle_auto(x, OracleParams(zsqrtm5, S, 64))
        assert float(out.det()) == pytest.approx(math.sqrt(20), rel=1e-9)

    def test_log_shift_is_diagonal(self, zsqrt2):
        params = OracleParams(zsqrt2, [], 80)
        x = ControlPoint((Fraction(1, 5),), (0, 1), (), ())
        t = Fraction(1, 64)
        y = ControlPoint((Fraction(1, 5) + t,), (0, 1), (), ())
        ex, ey = eval_oracle(x, params), eval_oracle(y, params)
        d = matrix_distance_near(ex, ey)
        assert d is not None and float(d) == pytest.approx(float(t), rel=1e-6)

    def test_periodicity_cubic(self, cubic):
        S = prime_decompose(2, cubic) + prime_decompose(5, cubic)
        rng = random.Random(1)
        x = ControlPoint((Fraction(rng.randint(-3000, 3000), 1000),), (1,), (Fraction(3, 7),),
                         tuple(rng.randint(-3, 3) for _ in S))
        params = OracleParams(cubic, S, 64)
        base = eval_oracle(x, params)
        for elt in ("1+w+w^2", "w", "(1+w+w^2)^2*w"):
            shifted = x + to_control(cubic.parse_element(elt), S, 160)
            assert near(eval_oracle(shifted, params), base, 2.0 ** -16)


@settings(max_examples=8)
@given(st.integers(-2000, 2000), st.integers(0, 1), st.integers(-3, 3), st.integers(-2, 2))
def test_periodicity_property(u, mu, v, power):
    """eval_oracle is invariant under shifts by S-units of Z[sqrt2]."""
    from conftest import order_of

    order = order_of("zsqrt2")
    S = prime_decompose(7, order)
    x = ControlPoint((Fraction(u, 1000),), (mu, 0), (), (v, -v))
    unit = order.parse_element("1+w") ** power * order.parse_element("3+w")
    params = OracleParams(order, S, 64)
    y = x + to_control(unit, S, 160)
    assert near(eval_oracle_auto(y, params), eval_oracle_auto(x, params), 2.0 ** -16)
