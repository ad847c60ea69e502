"""Fractional ideals of an order, prime decomposition and valuations."""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import sympy

from .intlinalg import det_exact, hnf_basis, hnf_square_mod, snf
from .numfield import FieldElement, OrderZ, ZeroElement

FACTOR_BUDGET_BITS = 160


class IndexDivides(ArithmeticError):
    """Raised when p may divide the index of the equation order in the given order."""


class NotInvertible(ArithmeticError):
    pass


class FactorTooLarge(ArithmeticError):
    pass


def _content(rows: Sequence[Sequence[int]]) -> int:
    return math.gcd(*(x for r in rows for x in r))


@dataclass(frozen=True)
class FracIdeal:
    """The fractional ideal num / denom, num an HNF basis over the order basis."""

    order: OrderZ
    num: tuple[tuple[int, ...], ...]
    denom: int = 1

    # -- construction ------------------------------------------------------
    @staticmethod
    def _normalise(order: OrderZ, num: Sequence[Sequence[int]], denom: int) -> "FracIdeal":
        g = math.gcd(_content(num), denom)
        if g > 1:
            num = [[x // g for x in r] for r in num]
            denom //= g
        return FracIdeal(order, tuple(tuple(r) for r in num), denom)

    @staticmethod
    def from_basis(order: OrderZ, rows: Sequence[Sequence[int]], denom: int = 1, check: bool = True) -> "FracIdeal":
        basis = hnf_basis(rows)
        if len(basis) != order.n:
            raise ValueError("ideal lattice must have full rank")
        a = FracIdeal._normalise(order, basis, denom)
        if check and not a.is_module():
            raise ValueError("lattice is not closed under multiplication by the order")
        return a

    @staticmethod
    def from_generators(order: OrderZ, gens: Sequence[Union[FieldElement, int]]) -> "FracIdeal":
        elems = [g if isinstance(g, FieldElement) else order.element([g * c for c in order.one]) for g in gens]
        elems = [g for g in elems if not g.is_zero()]
        if not elems:
            raise ZeroElement("the zero ideal is not a fractional ideal")
        d = math.lcm(*(g.denom for g in elems))
        rows: list[list[int]] = []
        modulus = 0
        for g in elems:
            c = [x * (d // g.denom) for x in g.coords]
            m = order.mult_matrix(c)
            rows.extend(m)
            modulus = math.gcd(modulus, abs(det_exact(m)))
        num = hnf_square_mod(rows, modulus)
        return FracIdeal._normalise(order, num, d)

    @staticmethod
    def principal(x: FieldElement) -> "FracIdeal":
        return FracIdeal.from_generators(x.order, [x])

    @staticmethod
    def unit(order: OrderZ) -> "FracIdeal":
        n = order.n
        return FracIdeal(order, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), 1)

    # -- basic queries -----------------------------------------------------
    @property
    def n(self) -> int:
        return self.order.n

    def num_det(self) -> int:
        return abs(int(det_exact(self.num)))

    def norm(self) -> Fraction:
        return Fraction(self.num_det(), self.denom ** self.n)

    def is_integral(self) -> bool:
        return self.denom == 1

    def is_unit(self) -> bool:
        return self.denom == 1 and self.num_det() == 1

    def basis_elements(self) -> list[FieldElement]:
        return [FieldElement.make(self.order, r, self.denom) for r in self.num]

    def _solve(self, coords: Sequence[Fraction]) -> list[Fraction]:
        # num is upper triangular: solve y num = coords
        n = self.n
        y = [Fraction(0)] * n
        rest = [Fraction(c) for c in coords]
        for i in range(n):
            p = self.num[i][i]
            y[i] = rest[i] / p
            if y[i]:
                for j in range(i, n):
                    rest[j] -= y[i] * self.num[i][j]
        return y

    def contains(self, x: FieldElement) -> bool:
        coords = [Fraction(c * self.denom, x.denom) for c in x.coords]
        return all(v.denominator == 1 for v in self._solve(coords))

    def is_module(self) -> bool:
        n = self.n
        for r in self.num:
            for k in range(n):
                w = [int(i == k) for i in range(n)]
                prod = self.order.mul_coords(r, w)
                if not all(v.denominator == 1 for v in self._solve(prod)):
                    return False
        return True

    def min_integer(self) -> Fraction:
        """The positive generator of the ideal's intersection with Q."""
        y = self._solve([Fraction(c * self.denom) for c in self.order.one])
        t = math.lcm(*(v.denominator for v in y))
        return Fraction(t, 1)

    # -- arithmetic --------------------------------------------------------
    def __mul__(self, other: Union["FracIdeal", FieldElement, int]) -> "FracIdeal":
        if not isinstance(other, FracIdeal):
            other = FracIdeal.from_generators(self.order, [other])
        rows = [self.order.mul_coords(a, b) for a in self.num for b in other.num]
        modulus = self.num_det() * other.num_det()
        num = hnf_square_mod(rows, modulus)
        return FracIdeal._normalise(self.order, num, self.denom * other.denom)

    __rmul__ = __mul__

    def inv(self) -> "FracIdeal":
        return ideal_inv(self)

    def __truediv__(self, other: "FracIdeal") -> "FracIdeal":
        return self * other.inv()

    def __pow__(self, k: int) -> "FracIdeal":
        if k < 0:
            return self.inv() ** (-k)
        result = FracIdeal.unit(self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, FracIdeal):
            return NotImplemented
        return self.order is other.order and self.num == other.num and self.denom == other.denom

    def __hash__(self) -> int:
        return hash((self.num, self.denom))

    def two_element(self, seed: int = 0) -> tuple[Fraction, FieldElement]:
        """(a, beta) with a rational and beta in the ideal generating it."""
        a = self.min_integer() / self.denom
        if self.n == 1:
            return a, self.basis_elements()[0]
        rng = random.Random(seed)
        elems = self.basis_elements()
        for bound in (1, 2, 3, 5, 8, 13, 21):
            for _ in range(40):
                cs = [rng.randint(-bound, bound) for _ in elems]
                beta = sum((c * e for c, e in zip(cs, elems) if c), FieldElement.make(self.order, [0] * self.n))
                if beta.is_zero():
                    continue
                if FracIdeal.from_generators(self.order, [FieldElement.from_fractions(
                        self.order, [a * c for c in self.order.one]), beta]) == self:
                    return a, beta
        raise ArithmeticError("no two-element representation found")

    def to_str(self) -> str:
        rows = ",".join("[" + ",".join(str(x) for x in r) + "]" for r in self.num)
        return f"hnf:[{rows}]/{self.denom}"

    __str__ = to_str

    def __repr__(self) -> str:
        return f"FracIdeal({self.to_str()})"


def ideal_mul(a: FracIdeal, b: FracIdeal) -> FracIdeal:
    return a * b


def ideal_norm(a: FracIdeal) -> Fraction:
    return a.norm()


def ideal_inv(a: FracIdeal) -> FracIdeal:
    """Inverse via the Smith form of the stacked multiplication matrices.

    y lies in the inverse exactly when y M_h is integral for every basis
    vector h; with U C V = D that lattice has basis rows U_i / d_i.
    """
    order = a.order
    n = a.n
    mats = [order.mult_matrix(list(h)) for h in a.num]
    c = [[mats[b][i][k] for b in range(n) for k in range(n)] for i in range(n)]
    d, u, _ = snf(c)
    diag = [d[i][i] for i in range(n)]
    if any(x == 0 for x in diag):
        raise NotInvertible("degenerate ideal")
    lcm = math.lcm(*diag)
    rows = [[(lcm // diag[i]) * x for x in u[i]] for i in range(n)]
    num = hnf_basis(rows)
    inv = FracIdeal._normalise(order, [[x * a.denom for x in r] for r in num], lcm)
    if not (a * inv).is_unit():
        raise NotInvertible(f"{a} is not invertible in this order")
    return inv


def parse_ideal(order: OrderZ, text: str) -> FracIdeal:
    """Parse 'hnf:[[..],[..]]/d' or 'gens:g1,g2,...'."""
    text = text.strip()
    if text.startswith("hnf:"):
        body = text[4:]
        m = re.fullmatch(r"(\[.*\])\s*(?:/\s*(\d+))?", body)
        if not m:
            raise ValueError(f"bad ideal syntax: {text}")
        import json

        rows = json.loads(m.group(1))
        return FracIdeal.from_basis(order, [[int(x) for x in r] for r in rows], int(m.group(2) or 1))
    if text.startswith("gens:"):
        gens = [order.parse_element(g) for g in text[5:].split(",") if g.strip()]
        return FracIdeal.from_generators(order, gens)
    raise ValueError(f"bad ideal syntax: {text}")


# ---------------------------------------------------------------------------
# primes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PrimeIdeal:
    p: int
    gen2: FieldElement
    e: int
    f: int
    ideal: FracIdeal
    beta: tuple[int, ...]  # beta / p has valuation -1 here and >= 0 elsewhere

    @property
    def norm(self) -> int:
        return self.p ** self.f

    @property
    def order(self) -> OrderZ:
        return self.ideal.order

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeIdeal) and self.ideal == other.ideal

    def __hash__(self) -> int:
        return hash(self.ideal)

    def label(self) -> str:
        return f"<{self.p}, {self.gen2}>"

    def __str__(self) -> str:
        return self.label()

    def __repr__(self) -> str:
        return f"PrimeIdeal({self.label()}, e={self.e}, f={self.f})"


def prime_from_label(order: OrderZ, label: str) -> PrimeIdeal:
    """Inverse of ``PrimeIdeal.label``."""
    m = re.fullmatch(r"\s*<\s*(\d+)\s*,(.*)>\s*", label)
    if not m:
        raise ValueError(f"bad prime label: {label!r}")
    p = int(m.group(1))
    target = FracIdeal.from_generators(order, [order.parse_element(str(p)), order.parse_element(m.group(2))])
    for P in prime_decompose(p, order):
        if P.ideal == target:
            return P
    raise ValueError(f"{label} is not a prime of this order")


def _poly_from_gf(poly: sympy.Poly, p: int) -> list[int]:
    return [int(c) % p for c in reversed(poly.all_coeffs())]


def _dedekind_ok(fcoeffs_high: list[int], factors, p: int) -> bool:
    x = sympy.Symbol("x")
    f = sympy.Poly(fcoeffs_high, x)
    g = sympy.Poly(1, x)
    prod = sympy.Poly(1, x)
    for fac, mult in factors:
        lift = sympy.Poly([int(c) % p for c in fac.all_coeffs()], x)
        g = g * lift
        prod = prod * lift ** mult
    big_f = sympy.Poly((f - prod).as_expr() / p, x)
    if not all(c.is_integer for c in big_f.all_coeffs()):
        return False
    fp = sympy.Poly(big_f.as_expr(), x, modulus=p)
    gp = sympy.Poly(g.as_expr(), x, modulus=p)
    hp = sympy.Poly(f.as_expr(), x, modulus=p).quo(gp)
    if fp.is_zero:
        return gp.gcd(hp).degree() == 0
    return fp.gcd(gp).gcd(hp).degree() == 0


def prime_decompose(p: int, order: OrderZ) -> list[PrimeIdeal]:
    """Kummer-Dedekind decomposition of p, sorted by (f, e, generator)."""
    return order.cache(("primes", p), lambda: _prime_decompose(p, order))


def _prime_decompose(p: int, order: OrderZ) -> list[PrimeIdeal]:
    if p < 2 or not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    idx = order.index_in_maximal_hint
    if idx.numerator % p == 0 or idx.denominator % p == 0:
        raise IndexDivides(f"{p} divides the index of Z[theta] in the order")
    x = sympy.Symbol("x")
    fhigh = order.field.poly_high_first
    _, factors = sympy.Poly(fhigh, x, modulus=p).factor_list()
    if not _dedekind_ok(fhigh, factors, p):
        raise IndexDivides(f"Z[theta] is not {p}-maximal")
    out = []
    for fac, e in factors:
        g = _poly_from_gf(fac, p)
        gen2 = order.from_poly(g)
        pe = FieldElement.from_fractions(order, [Fraction(p * c) for c in order.one])
        ideal = FracIdeal.from_generators(order, [pe, gen2])
        f = fac.degree()
        if ideal.norm() != p ** f:
            raise IndexDivides(f"unexpected norm for the prime above {p}")
        out.append((f, e, gen2, ideal))
    primes = []
    for f, e, gen2, ideal in out:
        inv = ideal_inv(ideal)
        scaled = [[x * p // inv.denom for x in r] for r in inv.num] if p % inv.denom == 0 else None
        if scaled is None:
            raise IndexDivides("prime inverse has unexpected denominator")
        beta = next(r for r in scaled if any(x % p for x in r))
        primes.append(PrimeIdeal(p, gen2, e, f, ideal, tuple(beta)))
    total = sum(P.e * P.f for P in primes)
    if total != order.n:
        raise IndexDivides(f"sum of e*f is {total}, expected {order.n}")
    primes.sort(key=lambda P: (P.f, P.e, P.ideal.num))
    return primes


def _vp_int(d: int, p: int) -> int:
    v = 0
    d = abs(d)
    while d and d % p == 0:
        d //= p
        v += 1
    return v


def _val_coords(coords: Sequence[int], P: PrimeIdeal, cap: int = 100000) -> int:
    if not any(coords):
        raise ZeroElement("valuation of zero")
    order = P.order
    mb = order.mult_matrix(list(P.beta))
    c = list(coords)
    p = P.p
    n = order.n
    v = 0
    # fast path: strip common factors of p first
    g = _vp_int(math.gcd(*c), p)
    if g:
        c = [x // p ** g for x in c]
        v = g * P.e
    while v < cap:
        nxt = [sum(c[i] * mb[i][k] for i in range(n)) for k in range(n)]
        if any(x % p for x in nxt):
            return v
        c = [x // p for x in nxt]
        v += 1
    raise ArithmeticError("valuation loop did not terminate")


def valuation(a: Union[FracIdeal, FieldElement, int, Fraction], P: PrimeIdeal) -> int:
    """Exponent of P in a fractional ideal or nonzero element."""
    if isinstance(a, (int, Fraction)):
        a = Fraction(a)
        if a == 0:
            raise ZeroElement("valuation of zero")
        return P.e * (_vp_int(a.numerator, P.p) - _vp_int(a.denominator, P.p))
    if isinstance(a, FieldElement):
        return _val_coords(a.coords, P) - P.e * _vp_int(a.denom, P.p)
    return min(_val_coords(r, P) for r in a.num) - P.e * _vp_int(a.denom, P.p)


def _check_budget(x: int) -> None:
    if x.bit_length() > FACTOR_BUDGET_BITS:
        raise FactorTooLarge(f"norm has {x.bit_length()} bits, budget is {FACTOR_BUDGET_BITS}")


def rational_primes_of(a: Union[FracIdeal, FieldElement]) -> list[int]:
    if isinstance(a, FieldElement):
        nm = a.norm()
        nums = [abs(nm.numerator), nm.denominator, a.denom]
    else:
        nums = [a.num_det(), a.denom]
    ps: set[int] = set()
    for x in nums:
        if x > 1:
            _check_budget(x)
            ps.update(sympy.factorint(x).keys())
    return sorted(ps)


def factor_ideal(a: Union[FracIdeal, FieldElement]) -> list[tuple[PrimeIdeal, int]]:
    """Prime factorisation, primes ordered by rational prime then decomposition order."""
    if isinstance(a, FieldElement):
        if a.is_zero():
            raise ZeroElement("cannot factor zero")
    out = []
    for p in rational_primes_of(a):
        for P in prime_decompose(p, a.order):
            v = valuation(a, P)
            if v:
                out.append((P, v))
    return out


def ideal_from_factors(order: OrderZ, factors: Sequence[tuple[PrimeIdeal, int]]) -> FracIdeal:
    result = FracIdeal.unit(order)
    for P, v in factors:
        if v:
            result = result * (P.ideal ** v)
    return result


def primes_up_to(order: OrderZ, bound: float, skip_bad: bool = True) -> list[PrimeIdeal]:
    """All primes of norm <= bound (primes where decomposition fails are skipped)."""
    out = []
    for p in sympy.primerange(2, int(bound) + 1):
        try:
            for P in prime_decompose(p, order):
                if P.norm <= bound:
                    out.append(P)
        except IndexDivides:
            if not skip_bad:
                raise
    return out


def primes_above(order: OrderZ, ps: Sequence[int]) -> list[PrimeIdeal]:
    out = []
    for p in ps:
        out.extend(prime_decompose(int(p), order))
    return out


def minkowski_bound(order: OrderZ) -> float:
    n = order.n
    n2 = order.signature[1]
    return math.sqrt(abs(order.discriminant)) * (4 / math.pi) ** n2 * math.factorial(n) / n ** n


def bach_bound(order: OrderZ) -> float:
    return 48 * math.log(abs(order.discriminant)) ** 2 if abs(order.discriminant) > 1 else 1.0


def is_principal_exact(a: FracIdeal, g: FieldElement) -> bool:
    return FracIdeal.principal(g) == a


__all__ = [
    "FracIdeal", "PrimeIdeal", "IndexDivides", "NotInvertible", "FactorTooLarge",
    "ideal_mul", "ideal_inv", "ideal_norm", "prime_decompose", "valuation",
    "factor_ideal", "ideal_from_factors", "parse_ideal", "primes_up_to", "primes_above",
    "minkowski_bound", "bach_bound",
]

