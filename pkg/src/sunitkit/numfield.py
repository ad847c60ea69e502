"""Number fields, orders, exact element arithmetic and certified embeddings."""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

import mpmath
import sympy

from .bigfix import FixComplex, FixReal, PrecisionExhausted
from .intlinalg import det_exact, inverse_exact

Rational = Union[int, Fraction]


class Reducible(ValueError):
    pass


class ZeroElement(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# polynomial helpers (coefficient lists, low degree first)
# ---------------------------------------------------------------------------

def _trim(p: list) -> list:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    db = len(b) - 1
    while len(a) - 1 >= db and any(a):
        c = a[-1] / b[-1]
        shift = len(a) - 1 - db
        for i, bc in enumerate(b):
            a[shift + i] -= c * bc
        a.pop()
        _trim(a)
        if len(a) - 1 < db:
            break
    return _trim(a) if a else [Fraction(0)]


def _poly_deriv(p: Sequence) -> list:
    return [i * c for i, c in enumerate(p)][1:] or [0]


def _sign_at_inf(p: Sequence, neg: bool) -> int:
    lead = p[-1]
    s = (lead > 0) - (lead < 0)
    if neg and (len(p) - 1) % 2 == 1:
        s = -s
    return s


def sturm_real_root_count(coeffs: Sequence[int]) -> int:
    """Number of distinct real roots of a squarefree polynomial (low first)."""
    p0 = [Fraction(c) for c in coeffs]
    seq = [p0, [Fraction(c) for c in _poly_deriv(p0)]]
    while len(seq[-1]) > 1 or seq[-1][0] != 0:
        r = _poly_rem(seq[-2], seq[-1])
        if len(r) == 1 and r[0] == 0:
            break
        seq.append([-c for c in r])

    def changes(neg: bool) -> int:
        signs = [_sign_at_inf(p, neg) for p in seq if any(p)]
        signs = [s for s in signs if s]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    return changes(True) - changes(False)


def _horner_exact(coeffs: Sequence[int], re: Fraction, im: Fraction) -> tuple[Fraction, Fraction]:
    ar, ai = Fraction(0), Fraction(0)
    for c in reversed(coeffs):
        ar, ai = ar * re - ai * im + c, ar * im + ai * re
    return ar, ai


def _sqrt_upper(x: Fraction, shift: int = 128) -> Fraction:
    """A rational upper bound on sqrt(x), within 2**-shift."""
    if x <= 0:
        return Fraction(0)
    num = x.numerator << (2 * shift)
    r = math.isqrt(num // x.denominator) + 1
    return Fraction(r, 1 << shift)


# ---------------------------------------------------------------------------
# fields and orders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NumberField:
    """K = Q[x]/(f) for a monic irreducible integer polynomial f.

    ``coeffs`` is stored low degree first.
    """

    coeffs: tuple[int, ...]
    signature: tuple[int, int]

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    @property
    def poly_high_first(self) -> list[int]:
        return list(reversed(self.coeffs))

    def __str__(self) -> str:
        x = sympy.Symbol("x")
        return str(sympy.Poly(self.poly_high_first, x).as_expr())


def make_field(poly: Sequence[Union[int, str]]) -> NumberField:
    """Build a field from coefficients listed highest degree first."""
    coeffs_high = [int(str(c).replace("−", "-")) for c in poly]
    if not coeffs_high or coeffs_high[0] != 1:
        raise ValueError("defining polynomial must be monic")
    if len(coeffs_high) < 2:
        raise ValueError("defining polynomial must have degree >= 1")
    x = sympy.Symbol("x")
    _, factors = sympy.factor_list(sympy.Poly(coeffs_high, x))
    if len(factors) != 1 or factors[0][1] != 1:
        raise Reducible(f"{sympy.Poly(coeffs_high, x).as_expr()} factors over Q")
    low = tuple(reversed(coeffs_high))
    n = len(low) - 1
    n1 = sturm_real_root_count(low)
    if (n - n1) % 2:
        raise ArithmeticError("inconsistent real root count")
    return NumberField(low, (n1, (n - n1) // 2))


class OrderZ:
    """An order given by a Z-basis in the power basis of its field.

    ``basis[k]`` lists the power-basis coordinates (low first) of omega_k.
    The default is the equation order Z[theta].
    """

    def __init__(self, field: NumberField, basis: Optional[Sequence[Sequence[Rational]]] = None):
        self.field = field
        n = field.n
        if basis is None:
            basis = [[int(i == j) for j in range(n)] for i in range(n)]
        self.basis = [[Fraction(x) for x in row] for row in basis]
        if det_exact(self.basis) == 0:
            raise ValueError("order basis is singular")
        self.basis_inv = inverse_exact(self.basis)
        self.is_equation_order = all(self.basis[i][j] == (i == j) for i in range(n) for j in range(n))
        self._table = self._mult_table()
        self.one = self._coords_of_power([Fraction(1)] + [Fraction(0)] * (n - 1), must_be_integral=True)
        self._lock = threading.RLock()
        self._emb_cache: dict[int, "EmbeddingTable"] = {}
        self._cache: dict = {}

    @property
    def n(self) -> int:
        return self.field.n

    @property
    def signature(self) -> tuple[int, int]:
        return self.field.signature

    # power basis <-> order coordinates
    def _power_mul(self, a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
        n = self.n
        prod = [Fraction(0)] * (2 * n - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        f = self.field.coeffs
        for d in range(2 * n - 2, n - 1, -1):
            c = prod[d]
            if c:
                for i in range(n):
                    prod[d - n + i] -= c * f[i]
                prod[d] = Fraction(0)
        return prod[:n]

    def _coords_of_power(self, pw: Sequence[Fraction], must_be_integral: bool = False) -> list:
        c = [sum(pw[i] * self.basis_inv[i][k] for i in range(self.n)) for k in range(self.n)]
        if must_be_integral:
            if any(x.denominator != 1 for x in c):
                raise ValueError("order basis is not closed under multiplication or lacks 1")
            return [int(x) for x in c]
        return c

    def to_power(self, coords: Sequence[Rational]) -> list[Fraction]:
        n = self.n
        return [sum(Fraction(coords[k]) * self.basis[k][i] for k in range(n)) for i in range(n)]

    def _mult_table(self) -> list[list[list[int]]]:
        n = self.n
        t = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                c = self._coords_of_power(self._power_mul(self.basis[i], self.basis[j]), must_be_integral=True)
                t[i][j] = t[j][i] = c
        return t

    def mul_coords(self, a: Sequence[Rational], b: Sequence[Rational]) -> list:
        n = self.n
        out = [0] * n
        t = self._table
        for i in range(n):
            ai = a[i]
            if not ai:
                continue
            for j in range(n):
                bj = b[j]
                if not bj:
                    continue
                c = ai * bj
                row = t[i][j]
                for k in range(n):
                    if row[k]:
                        out[k] += c * row[k]
        return out

    def mult_matrix(self, x: Sequence[Rational]) -> list[list]:
        """Row i holds the coordinates of omega_i * x."""
        n = self.n
        t = self._table
        return [[sum(x[j] * t[i][j][k] for j in range(n) if x[j]) for k in range(n)] for i in range(n)]

    @cached_property
    def discriminant(self) -> int:
        return discriminant(self)

    @cached_property
    def trace_basis(self) -> list[int]:
        return [sum(self.mult_matrix([int(i == j) for j in range(self.n)])[k][k] for k in range(self.n))
                for i in range(self.n)]

    @cached_property
    def index_in_maximal_hint(self) -> Fraction:
        """[O : Z[theta]] as a rational (an integer when Z[theta] is inside O)."""
        return 1 / abs(Fraction(det_exact(self.basis)))

    def element(self, coords: Sequence[Rational], denom: int = 1) -> "FieldElement":
        return FieldElement.make(self, coords, denom)

    def from_power(self, pw: Sequence[Rational]) -> "FieldElement":
        c = self._coords_of_power([Fraction(x) for x in pw])
        return FieldElement.from_fractions(self, c)

    def from_poly(self, coeffs: Sequence[Rational]) -> "FieldElement":
        """Element given by a polynomial in theta of any degree (low first)."""
        n = self.n
        f = self.field.coeffs
        c = [Fraction(x) for x in coeffs] + [Fraction(0)] * max(0, n - len(coeffs))
        for deg in range(len(c) - 1, n - 1, -1):
            top = c[deg]
            if top:
                for i in range(n):
                    c[deg - n + i] -= top * f[i]
                c[deg] = Fraction(0)
        return self.from_power(c[:n])

    def parse_element(self, text: str) -> "FieldElement":
        return parse_element(self, text)

    def embeddings(self, q_target: int) -> "EmbeddingTable":
        return embeddings(self, q_target)

    def cache(self, key, factory):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = factory()
            return self._cache[key]

    def __repr__(self) -> str:
        return f"OrderZ({self.field}, n={self.n}, disc={self.discriminant})"


def discriminant(order: OrderZ) -> int:
    """Determinant of the trace form on the order basis."""
    n = order.n
    tr = order.trace_basis
    gram = [[sum(order._table[i][j][k] * tr[k] for k in range(n)) for j in range(n)] for i in range(n)]
    return int(det_exact(gram))


def equation_order(field: NumberField) -> OrderZ:
    return OrderZ(field)


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldElement:
    """coords / denom over the order basis, content normalised."""

    order: OrderZ
    coords: tuple[int, ...]
    denom: int = 1

    @staticmethod
    def make(order: OrderZ, coords: Sequence[Rational], denom: int = 1) -> "FieldElement":
        if any(isinstance(c, Fraction) and c.denominator != 1 for c in coords):
            return FieldElement.from_fractions(order, [Fraction(c) / denom for c in coords])
        cs = [int(c) for c in coords]
        d = int(denom)
        if d == 0:
            raise ZeroDivisionError("zero denominator")
        if d < 0:
            cs, d = [-c for c in cs], -d
        g = math.gcd(d, *cs)
        if g > 1:
            cs, d = [c // g for c in cs], d // g
        return FieldElement(order, tuple(cs), d)

    @staticmethod
    def from_fractions(order: OrderZ, coords: Sequence[Fraction]) -> "FieldElement":
        coords = [Fraction(c) for c in coords]
        d = math.lcm(*(c.denominator for c in coords)) if coords else 1
        return FieldElement.make(order, [int(c * d) for c in coords], d)

    @property
    def n(self) -> int:
        return self.order.n

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_integral(self) -> bool:
        return self.denom == 1

    def frac_coords(self) -> list[Fraction]:
        return [Fraction(c, self.denom) for c in self.coords]

    def to_power(self) -> list[Fraction]:
        return self.order.to_power(self.frac_coords())

    def _lift(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            return other
        o = Fraction(other)
        return FieldElement.from_fractions(self.order, [o * c for c in self.order.one])

    def __add__(self, other) -> "FieldElement":
        o = self._lift(other)
        d = self.denom * o.denom
        return FieldElement.make(self.order, [a * o.denom + b * self.denom for a, b in zip(self.coords, o.coords)], d)

    __radd__ = __add__

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.order, tuple(-c for c in self.coords), self.denom)

    def __sub__(self, other) -> "FieldElement":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "FieldElement":
        return self._lift(other) - self

    def __mul__(self, other) -> "FieldElement":
        o = self._lift(other)
        return FieldElement.make(self.order, self.order.mul_coords(self.coords, o.coords), self.denom * o.denom)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroElement("zero has no inverse")
        m = self.order.mult_matrix(self.coords)
        inv = inverse_exact(m)
        one = self.order.one
        y = [sum(one[i] * inv[i][k] for i in range(self.n)) * self.denom for k in range(self.n)]
        return FieldElement.from_fractions(self.order, y)

    def __truediv__(self, other) -> "FieldElement":
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other) -> "FieldElement":
        return self._lift(other) * self.inverse()

    def __pow__(self, k: int) -> "FieldElement":
        if k < 0:
            return self.inverse() ** (-k)
        result = self._lift(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.order is other.order and self.coords == other.coords and self.denom == other.denom
        if isinstance(other, (int, Fraction)):
            return self == self._lift(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.coords, self.denom))

    def mult_matrix(self) -> list[list[int]]:
        return self.order.mult_matrix(self.coords)

    def norm(self) -> Fraction:
        return elem_norm(self)

    def trace(self) -> Fraction:
        return elem_trace(self)

    def height(self) -> int:
        return max(max((abs(c) for c in self.coords), default=0), self.denom)

    def bit_size(self) -> int:
        return sum(abs(c).bit_length() for c in self.coords) + self.denom.bit_length()

    def __str__(self) -> str:
        return format_element(self)

    def __repr__(self) -> str:
        return f"FieldElement({list(self.coords)}, {self.denom})"


def elem_norm(x: FieldElement) -> Fraction:
    """Exact norm as the determinant of the multiplication matrix."""
    return Fraction(det_exact(x.mult_matrix()), x.denom ** x.n)


def elem_trace(x: FieldElement) -> Fraction:
    m = x.mult_matrix()
    return Fraction(sum(m[i][i] for i in range(x.n)), x.denom)


def char_poly(x: FieldElement) -> list[Fraction]:
    """Characteristic polynomial of x (low first) via sympy on the multiplication matrix."""
    m = sympy.Matrix(x.mult_matrix()) / x.denom
    lam = sympy.Symbol("lam")
    p = sympy.Poly(m.charpoly(lam).as_expr(), lam)
    return [Fraction(str(c)) for c in reversed(p.all_coeffs())]


_W = sympy.Symbol("w")


def parse_element(order: OrderZ, text: str) -> FieldElement:
    """Parse 'c0 + c1*w + c2*w^2 (/ d)' where w is the root of the defining polynomial."""
    expr = sympy.sympify(text.replace("^", "**").replace("−", "-"), locals={"w": _W})
    num, den = sympy.fraction(sympy.together(expr))
    pn = sympy.Poly(num, _W)
    pd = sympy.Poly(den, _W)
    if pd.degree() > 0:
        raise ValueError("element denominators must be rational")
    d = Fraction(str(pd.as_expr()))
    coeffs = [Fraction(str(c)) / d for c in reversed(pn.all_coeffs())]
    return order.from_poly(coeffs)


def element_to_json(x: FieldElement) -> dict:
    return {"coords": [str(c) for c in x.coords], "denom": str(x.denom)}


def element_from_json(order: OrderZ, data: dict) -> FieldElement:
    return FieldElement.make(order, [int(c) for c in data["coords"]], int(data.get("denom", 1)))


def format_element(x: FieldElement) -> str:
    pw = x.to_power()
    d = math.lcm(*(c.denominator for c in pw))
    terms = []
    for i, c in enumerate(pw):
        c = int(c * d)
        if not c:
            continue
        mon = "" if i == 0 else ("w" if i == 1 else f"w^{i}")
        if mon and abs(c) == 1:
            body = mon
        elif mon:
            body = f"{abs(c)}*{mon}"
        else:
            body = str(abs(c))
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sgn, body in terms[1:]:
        s += f" {sgn} {body}"
    if d != 1:
        s = f"({s})/{d}" if len(terms) > 1 else f"{s}/{d}"
    return s


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------

@dataclass
class EmbeddingTable:
    """sigma[j][k] encloses sigma_j(omega_k).

    Rows 0..n1-1 are real embeddings in increasing order of the root; the
    remaining n2 rows use the roots with positive imaginary part, ordered by
    real part.
    """

    order: OrderZ
    sigma: list[list[Union[FixReal, FixComplex]]]
    roots: list[Union[FixReal, FixComplex]]
    err_q: int

    @property
    def n1(self) -> int:
        return self.order.signature[0]

    @property
    def n2(self) -> int:
        return self.order.signature[1]

    def embed(self, x: FieldElement) -> list[Union[FixReal, FixComplex]]:
        """Enclosures of sigma_j(x) for j over the n1 + n2 embeddings."""
        out = []
        for j, row in enumerate(self.sigma):
            if j < self.n1:
                acc = FixReal.exact(0)
                for c, s in zip(x.coords, row):
                    if c:
                        acc = acc + s * c
                out.append(_div_int(acc, x.denom, self.err_q))
            else:
                acc = FixComplex.of(0)
                for c, s in zip(x.coords, row):
                    if c:
                        acc = acc + s * c
                out.append(FixComplex(_div_int(acc.re, x.denom, self.err_q), _div_int(acc.im, x.denom, self.err_q)))
        return out


def _div_int(a: FixReal, d: int, q_floor: int = 0) -> FixReal:
    if d == 1:
        return a
    # exact inputs carry no error exponent, so fall back to the table precision
    q = max(a.err_q if a.err_q is not None else a.scale_q0, q_floor) + 8
    return a * FixReal.approx(Fraction(1, d), q + d.bit_length())


def _certified_roots(field: NumberField, work: int) -> tuple[list, list]:
    """Root enclosures (center, radius) with centers on a 2**-work grid."""
    n = field.n
    coeffs = field.coeffs
    if n == 1:
        return [(Fraction(-coeffs[0]), Fraction(0), Fraction(0))], []
    dps = int(work * 0.302) + 30
    with mpmath.workdps(dps):
        approx = mpmath.polyroots(list(reversed(coeffs)), maxsteps=200 + 4 * work, extraprec=2 * work)
        approx = [mpmath.mpc(z) for z in approx]
    scale = 1 << work
    n1 = field.signature[0]
    reals = sorted([z for z in approx if abs(z.imag) < mpmath.mpf(2) ** (-work // 2)], key=lambda z: z.real)
    cplx = sorted([z for z in approx if z.imag >= mpmath.mpf(2) ** (-work // 2)], key=lambda z: z.real)
    if len(reals) != n1 or len(cplx) != field.signature[1]:
        raise PrecisionExhausted("root classification failed")

    def to_dyadic(v) -> Fraction:
        with mpmath.workdps(dps):
            return Fraction(int(mpmath.nint(v * scale)), scale)

    deriv = _poly_deriv(coeffs)
    disks = []
    for z in reals:
        disks.append((to_dyadic(z.real), Fraction(0)))
    for z in cplx:
        disks.append((to_dyadic(z.real), to_dyadic(z.imag)))
    rads = []
    for re, im in disks:
        fr, fi = _horner_exact(coeffs, re, im)
        dr, di = _horner_exact(deriv, re, im)
        den = dr * dr + di * di
        if den == 0:
            raise PrecisionExhausted("derivative vanishes at approximate root")
        rads.append(_sqrt_upper(Fraction(n * n) * (fr * fr + fi * fi) / den, 2 * work))
    # disks around all n roots (conjugates included) must be pairwise disjoint
    full = [(re, im, rho) for (re, im), rho in zip(disks, rads)]
    full += [(re, -im, rho) for (re, im), rho in zip(disks[n1:], rads[n1:])]
    for a in range(len(full)):
        for b in range(a + 1, len(full)):
            dre = full[a][0] - full[b][0]
            dim = full[a][1] - full[b][1]
            if dre * dre + dim * dim <= (full[a][2] + full[b][2]) ** 2:
                raise PrecisionExhausted("root disks overlap")
    for (re, im), rho in zip(disks[n1:], rads[n1:]):
        if rho >= im:
            raise PrecisionExhausted("complex root disk meets the real axis")
    real_out = [(re, Fraction(0), rho) for (re, _), rho in zip(disks[:n1], rads[:n1])]
    cplx_out = [(re, im, rho) for (re, im), rho in zip(disks[n1:], rads[n1:])]
    return real_out, cplx_out


def embeddings(order: OrderZ, q_target: int) -> EmbeddingTable:
    """Certified enclosures of sigma_j(omega_k) with radius <= 2**-q_target."""
    with order._lock:
        cached = order._emb_cache.get(q_target)
    if cached is not None:
        return cached
    n = order.n
    bits = max(abs(c) for c in order.field.coeffs).bit_length() + max(
        (abs(x.numerator).bit_length() for row in order.basis for x in row), default=1)
    work = q_target + 4 * n * (bits + 2) + 24
    for _ in range(6):
        try:
            table = _build_table(order, q_target, work)
            break
        except PrecisionExhausted:
            work *= 2
    else:
        raise PrecisionExhausted("could not certify embeddings")
    with order._lock:
        order._emb_cache.setdefault(q_target, table)
        return order._emb_cache[q_target]


def _build_table(order: OrderZ, q_target: int, work: int) -> EmbeddingTable:
    n = order.n
    real_roots, cplx_roots = _certified_roots(order.field, work)
    roots: list = []
    for re, _, rho in real_roots:
        roots.append(FixReal.from_interval(re, rho))
    for re, im, rho in cplx_roots:
        roots.append(FixComplex(FixReal.from_interval(re, rho), FixReal.from_interval(im, rho)))
    sigma = []
    n1 = len(real_roots)
    for j, r in enumerate(roots):
        pw = [FixReal.exact(1) if j < n1 else FixComplex.of(1)]
        for _ in range(1, n):
            pw.append(pw[-1] * r)
        row = []
        for k in range(n):
            acc = FixReal.exact(0) if j < n1 else FixComplex.of(0)
            for i, c in enumerate(order.basis[k]):
                if c:
                    term = pw[i] * FixReal.exact(c) if j >= n1 else pw[i] * c
                    acc = acc + term
            row.append(acc)
        sigma.append(row)
    for row in sigma:
        for v in row:
            parts = (v,) if isinstance(v, FixReal) else (v.re, v.im)
            for p in parts:
                if p.radius() > Fraction(1, 1 << q_target):
                    raise PrecisionExhausted("embedding enclosure too wide")
    return EmbeddingTable(order, sigma, roots, q_target)


def float_embedding_matrix(order: OrderZ):
    """numpy n x n matrix whose row k is omega_k in the (Re, Im) layout."""
    import numpy as np

    def build():
        t = embeddings(order, 64)
        n1, n2 = order.signature
        m = np.zeros((order.n, order.n))
        for k in range(order.n):
            col = 0
            for j in range(n1):
                m[k, col] = float(t.sigma[j][k])
                col += 1
            for j in range(n1, n1 + n2):
                z = t.sigma[j][k]
                m[k, col] = float(z.re)
                m[k, col + 1] = float(z.im)
                col += 2
        return m

    return order.cache("float_emb", build)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def order_from_spec(spec: dict) -> OrderZ:
    field = make_field(spec["poly"])
    basis = spec.get("order_basis")
    if basis is not None:
        basis = [[Fraction(str(x)) for x in row] for row in basis]
    return OrderZ(field, basis)


def load_order(path: str) -> OrderZ:
    with open(path) as fh:
        return order_from_spec(json.load(fh))


def field_summary(order: OrderZ) -> dict:
    return {
        "poly": [str(c) for c in order.field.poly_high_first],
        "degree": order.n,
        "signature": list(order.signature),
        "discriminant": str(order.discriminant),
        "basis": [[str(x) for x in row] for row in order.basis],
    }

