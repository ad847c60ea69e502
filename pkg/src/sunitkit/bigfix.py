"""Dyadic fixed-point reals with a tracked error exponent.

A ``FixReal`` stands for the closed interval
``[m / 2**q0 - 2**-err_q, m / 2**q0 + 2**-err_q]``.  Every operation returns
an interval that contains the exact image of its inputs.  After each
operation the result is renormalised so that ``q0 == err_q``; the rounding
step is accounted for so the new interval always contains the old one.

Exact dyadic values are supported by setting ``err_q`` to ``None``.

Transcendental functions are evaluated with integer fixed-point arithmetic at
a few guard bits above the requested precision; rounding errors are counted
in units in the last place and folded into the output radius.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union


class DomainError(ArithmeticError):
    """Argument outside the domain of the requested function."""


class PrecisionExhausted(ArithmeticError):
    """A decision could not be certified at the current precision."""


Number = Union[int, Fraction, "FixReal"]


def _ceil_log2(x: int) -> int:
    # smallest k with 2**k >= x, for x >= 1
    return (x - 1).bit_length()


def _shift_round(x: int, s: int) -> int:
    """Round x / 2**s to the nearest integer (ties away from zero)."""
    if s <= 0:
        return x << (-s)
    half = 1 << (s - 1)
    if x >= 0:
        return (x + half) >> s
    return -((-x + half) >> s)


def _frac_to_dyadic_upper(r: Fraction) -> tuple[int, int]:
    """Return (a, k) with a / 2**k >= r >= 0, tight to a couple of bits."""
    if r <= 0:
        return 0, 0
    k = max(0, 64 - (r.numerator.bit_length() - r.denominator.bit_length()))
    a = -((-r.numerator << k) // r.denominator)
    return a, k


@dataclass(frozen=True)
class FixReal:
    mantissa: int
    scale_q0: int
    err_q: Optional[int] = None  # None means exact

    # ---- construction -------------------------------------------------
    @staticmethod
    def exact(x: Union[int, Fraction]) -> "FixReal":
        x = Fraction(x)
        d = x.denominator
        if d & (d - 1):
            raise ValueError("exact FixReal needs a dyadic rational; use FixReal.approx")
        return FixReal(x.numerator, d.bit_length() - 1, None)

    @staticmethod
    def approx(x: Union[int, Fraction, str, float], q: int) -> "FixReal":
        """Enclosure of a rational (or decimal string) with radius 2**-q."""
        if isinstance(x, str):
            x = Fraction(x.strip())
        x = Fraction(x)
        d = x.denominator
        if not d & (d - 1):
            return FixReal.exact(x)
        m = (x.numerator * (1 << (q + 1)) + d) // (2 * d)  # round(x * 2**q)
        return FixReal(m, q, q)

    @staticmethod
    def from_interval(center: Fraction, radius: Fraction) -> "FixReal":
        """Smallest renormalised FixReal containing center +- radius."""
        center = Fraction(center)
        radius = Fraction(radius)
        if radius < 0:
            raise ValueError("negative radius")
        if radius == 0:
            d = center.denominator
            if not d & (d - 1):
                return FixReal.exact(center)
            # non-dyadic exact rational: enclose with a fine grid
            return FixReal.approx(center, 128 + d.bit_length())
        a, k = _frac_to_dyadic_upper(radius)
        # radius <= a / 2**k; need 2**-(e+1) >= radius
        e = k - 1 - _ceil_log2(a)
        num = center.numerator << max(e, 0)
        den = center.denominator << max(-e, 0)
        m = (2 * num + den) // (2 * den)
        return FixReal(m, e, e)

    @staticmethod
    def _renorm(num: int, q: int, rad_num: int) -> "FixReal":
        """Build from center num/2**q and radius rad_num/2**q (rad_num >= 0)."""
        if rad_num == 0:
            if num == 0:
                return FixReal(0, 0, None)
            tz = (num & -num).bit_length() - 1
            tz = min(tz, q) if q > 0 else 0
            return FixReal(num >> tz, q - tz, None)
        e = q - 1 - _ceil_log2(rad_num)
        return FixReal(_shift_round(num, q - e), e, e)

    # ---- views ----------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return self.err_q is None

    def center(self) -> Fraction:
        if self.scale_q0 >= 0:
            return Fraction(self.mantissa, 1 << self.scale_q0)
        return Fraction(self.mantissa << (-self.scale_q0))

    def radius(self) -> Fraction:
        if self.err_q is None:
            return Fraction(0)
        if self.err_q >= 0:
            return Fraction(1, 1 << self.err_q)
        return Fraction(1 << (-self.err_q))

    def lower(self) -> Fraction:
        return self.center() - self.radius()

    def upper(self) -> Fraction:
        return self.center() + self.radius()

    def abs_upper(self) -> Fraction:
        return abs(self.center()) + self.radius()

    def contains(self, x: Union[int, Fraction, float]) -> bool:
        x = Fraction(x)
        return self.lower() <= x <= self.upper()

    def intersects(self, other: "FixReal") -> bool:
        return self.lower() <= other.upper() and other.lower() <= self.upper()

    def __float__(self) -> float:
        if self.scale_q0 >= 0:
            return self.mantissa / (1 << self.scale_q0)
        return float(self.mantissa << (-self.scale_q0))

    def _parts(self, q: int) -> tuple[int, int]:
        """(center numerator, radius numerator) over 2**q; requires q >= q0, err_q."""
        num = self.mantissa << (q - self.scale_q0)
        rad = 0 if self.err_q is None else 1 << (q - self.err_q)
        return num, rad

    def _q(self) -> int:
        return self.scale_q0 if self.err_q is None else max(self.scale_q0, self.err_q)

    # ---- arithmetic -----------------------------------------------------
    def __add__(self, other: Number) -> "FixReal":
        other = _lift(other)
        q = max(self._q(), other._q(), 0)
        a, ra = self._parts(q)
        b, rb = other._parts(q)
        return FixReal._renorm(a + b, q, ra + rb)

    __radd__ = __add__

    def __neg__(self) -> "FixReal":
        return FixReal(-self.mantissa, self.scale_q0, self.err_q)

    def __sub__(self, other: Number) -> "FixReal":
        return self + (-_lift(other))

    def __rsub__(self, other: Number) -> "FixReal":
        return _lift(other) - self

    def __mul__(self, other: Number) -> "FixReal":
        other = _lift(other)
        qa, qb = max(self._q(), 0), max(other._q(), 0)
        a, ra = self._parts(qa)
        b, rb = other._parts(qb)
        # |ab - (a+da)(b+db)| <= |a| rb + |b| ra + ra rb, all over 2**(qa+qb)
        rad = abs(a) * rb + abs(b) * ra + ra * rb
        return FixReal._renorm(a * b, qa + qb, rad)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "FixReal":
        other = _lift(other)
        if other.lower() <= 0 <= other.upper():
            raise DomainError("division by an interval containing zero")
        return self * other.reciprocal()

    def __rtruediv__(self, other: Number) -> "FixReal":
        return _lift(other) * self.reciprocal()

    def reciprocal(self, q_target: Optional[int] = None) -> "FixReal":
        lo, hi = self.lower(), self.upper()
        if lo <= 0 <= hi:
            raise DomainError("reciprocal of an interval containing zero")
        c = self.center()
        inv = 1 / c
        if self.is_exact and q_target is None and not inv.denominator & (inv.denominator - 1):
            return FixReal.exact(inv)
        q = q_target if q_target is not None else max(self._q(), 0) + 2 * abs(c.numerator.bit_length() - c.denominator.bit_length()) + 4
        lo_abs = min(abs(lo), abs(hi))
        # |1/x - 1/c| = |x - c| / (|x| |c|)
        rad = self.radius() / (abs(c) * lo_abs) + Fraction(1, 1 << (q + 1))
        return FixReal.from_interval(inv, rad)

    def scale2(self, k: int) -> "FixReal":
        """Exact multiplication by 2**k."""
        err = None if self.err_q is None else self.err_q - k
        return FixReal(self.mantissa, self.scale_q0 - k, err)

    def __abs__(self) -> "FixReal":
        if self.lower() >= 0:
            return self
        if self.upper() <= 0:
            return -self
        # interval straddles zero: enclose [0, max|.|]
        u = self.abs_upper()
        return FixReal.from_interval(u / 2, u / 2)

    def square(self) -> "FixReal":
        if self.lower() >= 0 or self.upper() <= 0:
            return self * self
        u = self.abs_upper()
        return FixReal.from_interval(u * u / 2, u * u / 2)

    # ---- certified comparison -------------------------------------------
    def sign(self) -> int:
        if self.lower() > 0:
            return 1
        if self.upper() < 0:
            return -1
        if self.is_exact and self.mantissa == 0:
            return 0
        raise PrecisionExhausted("sign of interval not certified")

    def __lt__(self, other: Number) -> bool:
        return (self - _lift(other)).sign() < 0

    def __gt__(self, other: Number) -> bool:
        return (self - _lift(other)).sign() > 0

    def __str__(self) -> str:
        if self.err_q is None:
            return f"{self.mantissa} * 2^-{self.scale_q0} (exact)"
        return f"{self.mantissa} * 2^-{self.scale_q0} ± 2^-{self.err_q}"

    def to_str(self) -> str:
        """Compact serialisation 'm*2^-q0' (radius carried separately)."""
        return f"{self.mantissa}*2^-{self.scale_q0}"

    @staticmethod
    def parse(text: str) -> "FixReal":
        """Parse 'm * 2^-q0 ± 2^-q', 'm*2^-q0' or a decimal string (exact if dyadic)."""
        s = text.replace(" ", "")
        mt = re.fullmatch(r"(-?\d+)\*2\^(-?\d+)(?:(?:±|\+-)2\^(-?\d+)|\(exact\))?", s)
        if mt:
            m, e = int(mt.group(1)), -int(mt.group(2))
            err = None if mt.group(3) is None else -int(mt.group(3))
            return FixReal(m, e, err)
        return FixReal.approx(Fraction(s), 256)


def _lift(x: Number) -> FixReal:
    if isinstance(x, FixReal):
        return x
    if isinstance(x, int):
        return FixReal(x, 0, None)
    if isinstance(x, Fraction):
        d = x.denominator
        if not d & (d - 1):
            return FixReal.exact(x)
        return FixReal.approx(x, 256)
    raise TypeError(f"cannot lift {type(x).__name__} to FixReal")


def fx(x: Union[int, Fraction, str, FixReal], q: int = 256) -> FixReal:
    """Convenience constructor: exact when dyadic, else radius 2**-q."""
    if isinstance(x, FixReal):
        return x
    return FixReal.approx(x, q) if not isinstance(x, int) else FixReal(x, 0, None)


def fx_mul(a: FixReal, b: FixReal) -> FixReal:
    return a * b


def fx_add(a: FixReal, b: FixReal) -> FixReal:
    return a + b


# ---------------------------------------------------------------------------
# Integer fixed-point kernels.  Values are integers X standing for X / 2**w.
# Each returns (value, error bound in ulps).
# ---------------------------------------------------------------------------

def _fixed_of(x: FixReal, w: int) -> tuple[int, int]:
    """Center of x on the 2**-w grid and the conversion error in ulps."""
    s = w - x.scale_q0
    if s >= 0:
        return x.mantissa << s, 0
    return _shift_round(x.mantissa, -s), 1


def _exp_series(c: int, w: int) -> tuple[int, int, int]:
    """sum_k c^k/k! for |c| < 2**w; returns (value, ulp error, terms)."""
    one = 1 << w
    total = one
    term = one
    k = 0
    while term != 0:
        k += 1
        term = (term * c) // (one * k) if term * c >= 0 else -((-term * c) // (one * k))
        total += term
    # error recurrence e_k <= e_{k-1} + 1 gives sum_k (k+1) ulps; the tail after
    # the first vanishing term is below 2 (e_k + 1)
    err = (k + 1) * (k + 2) // 2 + 2 * (k + 2) + 2
    return total, err, k


def _atanh_inv_series(z_num: int, z_den: int, w: int) -> tuple[int, int]:
    """atanh(z_num/z_den) for 0 <= z < 1/2 in fixed point; (value, ulp error)."""
    z = (z_num << w) // z_den
    z2 = (z * z) >> w
    power = z
    total = 0
    k = 0
    err = 1
    while power != 0:
        total += power // (2 * k + 1)
        power = (power * z2) >> w
        k += 1
        err += 2
    return total, err + 6


@lru_cache(maxsize=64)
def _ln2_fixed(w: int) -> tuple[int, int]:
    v, e = _atanh_inv_series(1, 3, w)
    return 2 * v, 2 * e


@lru_cache(maxsize=64)
def _pi_fixed(w: int) -> tuple[int, int]:
    def atan_inv(x: int) -> tuple[int, int]:
        one = 1 << w
        power = one // x
        x2 = x * x
        total = 0
        k = 0
        while power != 0:
            term = power // (2 * k + 1)
            total += term if k % 2 == 0 else -term
            power //= x2
            k += 1
        return total, 2 * k + 2

    a, ea = atan_inv(5)
    b, eb = atan_inv(239)
    return 16 * a - 4 * b, 16 * ea + 4 * eb


def _sincos_series(c: int, w: int) -> tuple[int, int, int]:
    """(cos, sin, ulp error) for |c| <= 4 * 2**w."""
    one = 1 << w
    cos_t, sin_t = one, 0
    term = one
    k = 0
    while term != 0 or k < 2:
        k += 1
        num = term * c
        term = num // (one * k) if num >= 0 else -((-num) // (one * k))
        r = k % 4
        if r == 0:
            cos_t += term
        elif r == 1:
            sin_t += term
        elif r == 2:
            cos_t -= term
        else:
            sin_t -= term
    # e_k <= 4 e_{k-1}/k + 1 stays below 60 (k + 1)
    err = 60 * (k + 1) * (k + 2) + 4
    return cos_t, sin_t, err


def _guard(q: int) -> int:
    return 2 * max(q, 8).bit_length() + 12


def _finish(value: int, ulps: int, w: int, extra_rad: Fraction) -> FixReal:
    rad = Fraction(ulps, 1 << w) + extra_rad
    return FixReal.from_interval(Fraction(value, 1 << w), rad)


def fx_exp_frac(s: FixReal, q_target: int) -> FixReal:
    """e**s for s inside (-1, 1) by its Taylor series."""
    lo, hi = s.lower(), s.upper()
    if not (-1 < lo and hi < 1):
        raise DomainError("fx_exp_frac needs an argument inside (-1, 1)")
    if s.is_exact and s.mantissa == 0:
        return FixReal(1, 0, None)
    w = q_target + _guard(q_target)
    c, conv = _fixed_of(s, w)
    val, err, _ = _exp_series(c, w)
    # conversion error and input radius: derivative bounded by e**hi < 3
    prop = 3 * (s.radius() + Fraction(conv, 1 << w))
    return _finish(val, err, w, prop)


def fx_exp(x: FixReal, q_target: int) -> FixReal:
    """e**x for moderate |x| by halving and repeated squaring."""
    if x.is_exact and x.mantissa == 0:
        return FixReal(1, 0, None)
    c = x.center()
    mag = abs(c) + x.radius()
    j = max(0, math.ceil(math.log2(float(mag) + 1e-300)) + 1) if mag > Fraction(1, 2) else 0
    growth = int(mag * 2) + 2  # bits of e**|x|
    w = q_target + growth + 2 * j + _guard(q_target)
    cc, conv = _fixed_of(x, w)
    c0 = _shift_round(cc, j)  # x / 2**j on the 2**-w grid
    conv_rad = Fraction(conv, 1 << w) + (Fraction(1, 1 << (w + 1 - j)) if j else 0)
    val, err, _ = _exp_series(c0, w)
    for _ in range(j):
        # (V + E)^2 - V^2 = 2 V E + E^2, plus one ulp of flooring
        err = 2 * err * ((val >> w) + 1) + (err * err >> w) + 2
        val = (val * val) >> w
    up = _exp_upper(x.upper() + conv_rad)
    rad_in = x.radius() + conv_rad
    prop = up * rad_in * 2 if rad_in else Fraction(0)
    return _finish(val, err, w, prop)


def _exp_upper(x: Fraction) -> Fraction:
    # crude rigorous bound for e**x: 3**ceil(x) for x > 0, 1 otherwise
    if x <= 0:
        return Fraction(1)
    return Fraction(3) ** math.ceil(x)


def fx_log(a: FixReal, q_target: int) -> FixReal:
    """Natural logarithm via reduction to [1, 2) and the atanh series."""
    lo = a.lower()
    if lo <= 0:
        raise DomainError("fx_log of an interval touching (-inf, 0]")
    if a.is_exact and a.center() == 1:
        return FixReal(0, 0, None)
    m, q0 = a.mantissa, a.scale_q0
    b = m.bit_length() - 1
    k = b - q0  # a / 2**k in [1, 2)
    w = q_target + _guard(q_target) + max(k, -k, 1).bit_length()
    pw = 1 << b
    t, et = _atanh_inv_series(m - pw, m + pw, w)
    l2, el2 = _ln2_fixed(w)
    val = 2 * t + k * l2
    err = 2 * et + abs(k) * el2
    prop = a.radius() / lo
    return _finish(val, err, w, prop)


def fx_pi(q_target: int) -> FixReal:
    w = q_target + _guard(q_target)
    v, e = _pi_fixed(w)
    return _finish(v, e, w, Fraction(0))


def fx_sincos(x: FixReal, q_target: int) -> tuple[FixReal, FixReal]:
    """(cos x, sin x); the argument is reduced modulo 2*pi first."""
    if x.is_exact and x.mantissa == 0:
        return FixReal(1, 0, None), FixReal(0, 0, None)
    c = x.center()
    turns = round(c / (2 * Fraction(355, 113)))
    w = q_target + _guard(q_target) + max(abs(turns), 1).bit_length() + 4
    cc, conv = _fixed_of(x, w)
    shift_err = 0
    if turns:
        p, ep = _pi_fixed(w)
        cc -= 2 * turns * p
        shift_err = 2 * abs(turns) * ep
    cv, sv, err = _sincos_series(cc, w)
    # sin and cos are 1-Lipschitz; reduction error multiplies by at most 1
    prop = x.radius() + Fraction(conv + shift_err, 1 << w)
    return _finish(cv, err, w, prop), _finish(sv, err, w, prop)


def fx_cos_sin_turns(theta: Fraction, q_target: int) -> tuple[FixReal, FixReal]:
    """(cos 2*pi*theta, sin 2*pi*theta) for an exact rational theta."""
    theta = Fraction(theta) % 1
    if theta > Fraction(1, 2):
        theta -= 1
    # exact values on the quarter grid
    quarter = {Fraction(0): (1, 0), Fraction(1, 4): (0, 1), Fraction(1, 2): (-1, 0), Fraction(-1, 4): (0, -1)}
    if theta in quarter:
        cv, sv = quarter[theta]
        return FixReal(cv, 0, None), FixReal(sv, 0, None)
    w = q_target + _guard(q_target) + 4
    p, ep = _pi_fixed(w)
    ang = (2 * p * theta.numerator) // theta.denominator
    ang_err = 2 * ep + 1
    cv, sv, err = _sincos_series(ang, w)
    prop = Fraction(ang_err, 1 << w)
    return _finish(cv, err, w, prop), _finish(sv, err, w, prop)


def fx_sqrt(a: FixReal, q_target: int) -> FixReal:
    """Square root of a non-negative interval."""
    lo, hi = a.lower(), a.upper()
    if hi < 0:
        raise DomainError("fx_sqrt of a negative interval")
    lo = max(lo, Fraction(0))
    w = q_target + 4
    lo_s = math.isqrt((lo.numerator << (2 * w)) // lo.denominator)
    hi_s = math.isqrt(-((-hi.numerator << (2 * w)) // hi.denominator)) + 1
    return FixReal.from_interval(Fraction(lo_s + hi_s, 2 << w), Fraction(hi_s - lo_s, 2 << w))


def fx_atan(t: FixReal, q_target: int) -> FixReal:
    """arctan of a real interval."""
    if t.is_exact and t.mantissa == 0:
        return FixReal(0, 0, None)
    c = t.center()
    if abs(c) > 1:
        # atan(t) = sign(t) pi/2 - atan(1/t)
        half_pi = fx_pi(q_target + 4).scale2(-1)
        inner = fx_atan(t.reciprocal(q_target + 8), q_target + 4)
        return (half_pi - inner) if c > 0 else (-half_pi - inner)
    w = q_target + _guard(q_target) + 8
    x, conv = _fixed_of(t, w)
    if x < 0:
        return -fx_atan(-t, q_target)
    one = 1 << w
    halvings = 0
    err = conv
    # atan(x) = 2 atan(x / (1 + sqrt(1 + x^2))): the map is 1/2-Lipschitz
    while abs(x) > one >> 3:
        s = math.isqrt(one * one + x * x)
        x = (x * one) // (one + s)
        err = err // 2 + 3
        halvings += 1
    x2 = (x * x) >> w
    power = x
    total = 0
    k = 0
    while power != 0:
        term = power // (2 * k + 1)
        total += term if k % 2 == 0 else -term
        power = (power * x2) >> w
        k += 1
    err = (err + 2 * k + 2) << halvings
    total <<= halvings
    return _finish(total, err, w, t.radius())


# ---------------------------------------------------------------------------
# Complex values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixComplex:
    re: FixReal
    im: FixReal

    @staticmethod
    def of(re: Number, im: Number = 0) -> "FixComplex":
        return FixComplex(_lift(re), _lift(im))

    def __add__(self, o: "FixComplex") -> "FixComplex":
        o = _clift(o)
        return FixComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o: "FixComplex") -> "FixComplex":
        o = _clift(o)
        return FixComplex(self.re - o.re, self.im - o.im)

    def __neg__(self) -> "FixComplex":
        return FixComplex(-self.re, -self.im)

    def __mul__(self, o: Union["FixComplex", Number]) -> "FixComplex":
        if not isinstance(o, FixComplex):
            o = _lift(o)
            return FixComplex(self.re * o, self.im * o)
        return FixComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self) -> "FixComplex":
        return FixComplex(self.re, -self.im)

    def abs2(self) -> FixReal:
        return self.re.square() + self.im.square()

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        return (float(self.re.lower()) - tol <= z.real <= float(self.re.upper()) + tol
                and float(self.im.lower()) - tol <= z.imag <= float(self.im.upper()) + tol)

    def __str__(self) -> str:
        return f"({self.re}) + i({self.im})"


def _clift(x) -> FixComplex:
    if isinstance(x, FixComplex):
        return x
    return FixComplex(_lift(x), FixReal(0, 0, None))


def fx_exp_complex(z: FixComplex, q_target: int) -> FixComplex:
    mag = fx_exp(z.re, q_target + 4)
    c, s = fx_sincos(z.im, q_target + 4 + max(0, int(abs(z.re.center())) * 2))
    return FixComplex(mag * c, mag * s)


def fx_arg(z: FixComplex, q_target: int) -> FixReal:
    """Argument of z in (-pi, pi]; z must be bounded away from 0."""
    re, im = z.re, z.im
    if abs(re.center()) >= abs(im.center()):
        if re.sign() == 0:
            raise DomainError("argument of an interval containing 0")
        a = fx_atan(im * re.reciprocal(q_target + 8), q_target + 4)
        if re.center() < 0:
            pi = fx_pi(q_target + 4)
            a = a + pi if im.center() >= 0 else a - pi
        return a
    half_pi = fx_pi(q_target + 4).scale2(-1)
    inner = fx_atan(re * im.reciprocal(q_target + 8), q_target + 4)
    return (half_pi - inner) if im.center() > 0 else (-half_pi - inner)


def fx_log_complex(z: FixComplex, q_target: int) -> FixComplex:
    """Principal logarithm for z with positive real part."""
    if z.re.lower() <= 0:
        raise DomainError("complex log implemented for Re z > 0 only")
    half_log = fx_log(z.abs2(), q_target + 2).scale2(-1)
    arg = fx_atan(z.im * z.re.reciprocal(q_target + 8), q_target + 2)
    return FixComplex(half_log, arg)
