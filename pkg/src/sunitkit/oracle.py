"""The control group, the maps to and from it, and the classical oracle.

A control point (u, mu, theta, v) describes the E-point whose components
have logarithmic absolute values u (all but the first, which is fixed by
the norm constraint), signs mu on the real embeddings and phases theta
(in turns) on the complex ones, together with valuations v at the primes
of S.  The oracle maps it to the E-ideal phi(u, mu, theta) * O * prod P^-v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .bigfix import (
    FixComplex,
    FixReal,
    fx,
    fx_arg,
    fx_cos_sin_turns,
    fx_exp,
    fx_exp_frac,
    fx_log,
    fx_pi,
    fx_sqrt,
)
from .elattice import EIdeal, apply_diag, eideal_mul, embed_ideal, unit_eideal
from .ideals import PrimeIdeal, valuation
from .intlinalg import PrecisionInsufficient
from .numfield import FieldElement, OrderZ, ZeroElement

# rough bits lost per E-ideal multiplication, used to pick the working precision
LOSS_PER_MUL = 12


def weights(order: OrderZ) -> list[int]:
    n1, n2 = order.signature
    return [1] * n1 + [2] * n2


@dataclass(frozen=True)
class ControlPoint:
    u: tuple[Fraction, ...]
    mu: tuple[int, ...]
    theta: tuple[Fraction, ...]
    v: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(Fraction(t) % 1 for t in self.theta))
        object.__setattr__(self, "mu", tuple(int(b) & 1 for b in self.mu))

    @staticmethod
    def zero(order: OrderZ, s: int) -> "ControlPoint":
        n1, n2 = order.signature
        return ControlPoint((Fraction(0),) * (n1 + n2 - 1), (0,) * n1, (Fraction(0),) * n2, (0,) * s)

    def __add__(self, o: "ControlPoint") -> "ControlPoint":
        return ControlPoint(
            tuple(a + b for a, b in zip(self.u, o.u)),
            tuple(a ^ b for a, b in zip(self.mu, o.mu)),
            tuple(a + b for a, b in zip(self.theta, o.theta)),
            tuple(a + b for a, b in zip(self.v, o.v)),
        )

    def __neg__(self) -> "ControlPoint":
        return ControlPoint(tuple(-a for a in self.u), self.mu, tuple(-t for t in self.theta),
                            tuple(-a for a in self.v))

    def __sub__(self, o: "ControlPoint") -> "ControlPoint":
        return self + (-o)

    def to_str(self) -> str:
        def j(xs):
            return ",".join(str(x) for x in xs)

        return f"u={j(self.u)};mu={j(self.mu)};theta={j(self.theta)};v={j(self.v)}"

    def to_json(self) -> dict:
        return {"u": [str(x) for x in self.u], "mu": list(self.mu),
                "theta": [str(x) for x in self.theta], "v": list(self.v)}

    @staticmethod
    def from_json(data: dict) -> "ControlPoint":
        return ControlPoint(tuple(Fraction(x) for x in data["u"]), tuple(int(b) for b in data["mu"]),
                            tuple(Fraction(x) for x in data["theta"]), tuple(int(v) for v in data["v"]))

    @staticmethod
    def parse(text: str, order: OrderZ, s: int) -> "ControlPoint":
        """Parse 'u=...;mu=...;theta=...;v=...'; missing parts default to 0."""
        base = ControlPoint.zero(order, s)
        parts = {"u": list(base.u), "mu": list(base.mu), "theta": list(base.theta), "v": list(base.v)}
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            key, _, val = chunk.partition("=")
            key = key.strip()
            if key not in parts:
                raise ValueError(f"unknown control-point field {key!r}")
            items = [x.strip() for x in val.split(",") if x.strip()]
            if len(items) != len(parts[key]):
                raise ValueError(f"{key} needs {len(parts[key])} entries, got {len(items)}")
            conv = int if key in ("mu", "v") else (lambda t: Fraction(t))
            parts[key] = [conv(x) for x in items]
        return ControlPoint(tuple(parts["u"]), tuple(parts["mu"]), tuple(parts["theta"]), tuple(parts["v"]))


@dataclass
class OracleParams:
    order: OrderZ
    S: Sequence[PrimeIdeal]
    q: int = 128
    nu: float = 0.05
    check_det: bool = True
    stats: dict = field(default_factory=dict)


def _log_norms(S: Sequence[PrimeIdeal], q: int) -> list[FixReal]:
    # N(P) = p**f (standard convention)
    return [fx_log(FixReal.exact(P.norm), q) for P in S]


def compute_u1(x: ControlPoint, order: OrderZ, S: Sequence[PrimeIdeal], q: int) -> FixReal:
    """log|x_1| from the norm constraint: sum_P v_P log N(P) - sum_{i>1} w_i u_i, over w_1."""
    w = weights(order)
    acc = FixReal.exact(0)
    for v, ln in zip(x.v, _log_norms(S, q + 8)):
        if v:
            acc = acc + ln * v
    for wi, ui in zip(w[1:], x.u):
        acc = acc - fx(Fraction(ui), q + 8) * wi
    return acc.scale2(-1) if w[0] == 2 else acc


def _dyadic(x: FixReal, q: int) -> Fraction:
    c = x.center()
    return Fraction(math.floor(c * (1 << q) + Fraction(1, 2)), 1 << q)


def to_control(x: FieldElement, S: Sequence[PrimeIdeal], q: int) -> ControlPoint:
    """Control coordinates of x, rounded to the 2**-q grid."""
    if x.is_zero():
        raise ZeroElement("zero has no control coordinates")
    order = x.order
    n1, n2 = order.signature
    emb = order.embeddings(q + 16).embed(x)
    logs = []
    mu = []
    theta = []
    for j, c in enumerate(emb):
        if j < n1:
            logs.append(fx_log(abs(c), q + 4))
            mu.append(1 if c.sign() < 0 else 0)
        else:
            logs.append(fx_log(c.abs2(), q + 4).scale2(-1))
            arg = fx_arg(c, q + 8)
            turns = arg * fx_pi(q + 8).scale2(1).reciprocal(q + 8)
            theta.append(_dyadic(turns, q))
    u = tuple(_dyadic(lg, q) for lg in logs[1:])
    v = tuple(valuation(x, P) for P in S)
    return ControlPoint(u, tuple(mu), tuple(theta), v)


def log_coordinates(x: ControlPoint, order: OrderZ, S: Sequence[PrimeIdeal], q: int) -> list[FixReal]:
    """(log|x_1|, u_2, ...) with the first entry from compute_u1."""
    return [compute_u1(x, order, S, q)] + [fx(Fraction(u), q + 8) for u in x.u]


def phi(x: ControlPoint, order: OrderZ, S: Sequence[PrimeIdeal], q: int) -> list:
    """The E-point encoded by a control point."""
    n1, _ = order.signature
    logs = log_coordinates(x, order, S, q + 8)
    out = []
    for j, lg in enumerate(logs):
        mag = fx_exp(lg, q + 4)
        if j < n1:
            out.append(-mag if x.mu[j] else mag)
        else:
            c, s = fx_cos_sin_turns(x.theta[j - n1], q + 8)
            out.append(FixComplex(mag * c, mag * s))
    return out


# ---------------------------------------------------------------------------
# Algorithm: binary splitting of the oracle
# ---------------------------------------------------------------------------

def _balanced_digits(t: int, length: int) -> list[int]:
    """Digits a_k in {-1, 0, 1} with t = sum a_k 2**k (all the sign of t)."""
    s = -1 if t < 0 else 1
    m = abs(t)
    return [s * ((m >> k) & 1) for k in range(length)]


def _scale_point(order: OrderZ, factors: Sequence[FixReal]) -> list:
    n1 = order.signature[0]
    zero = FixReal.exact(0)
    return [f if j < n1 else FixComplex(f, zero) for j, f in enumerate(factors)]


def _exp_digits(order: OrderZ, digits: Sequence[Fraction], q: int) -> list:
    """e**a on each component for a digit vector a (dependent entry first, possibly a half)."""
    return _scale_point(order, [fx_exp(fx(Fraction(d), q + 8), q) for d in digits])


def _dependent(w: Sequence[int], rest: Sequence[Fraction]) -> Fraction:
    return -sum(wi * r for wi, r in zip(w[1:], rest)) / w[0]


def _check_det(e: EIdeal, disc: int, label: str) -> None:
    d2 = e.det().square()
    if not d2.contains(disc):
        raise ArithmeticError(f"{label}: determinant does not enclose sqrt|disc|")


def _horner(factors: list[Optional[EIdeal]], unit: EIdeal, mul) -> EIdeal:
    """prod_k F_k**(2**k) as (((F_K)^2 F_{K-1})^2 ...) F_0."""
    acc: Optional[EIdeal] = None
    for f in reversed(factors):
        if acc is not None:
            acc = mul(acc, acc)
        if f is not None:
            acc = f if acc is None else mul(acc, f)
    return acc if acc is not None else unit


def chain_length(x: ControlPoint) -> int:
    bits = max([int(math.floor(abs(u))).bit_length() for u in x.u] + [abs(v).bit_length() for v in x.v] + [0])
    return 4 * bits + 4


def eval_oracle(x: ControlPoint, params: OracleParams, q_work: Optional[int] = None) -> EIdeal:
    """phi(x) * O * prod P_j**-v_j evaluated by binary splitting.

    The result has precision at least ``params.q``; otherwise
    ``PrecisionInsufficient`` is raised with a suggested working precision.
    """
    order, S = params.order, list(params.S)
    n1, n2 = order.signature
    w = weights(order)
    disc = abs(order.discriminant)
    q = params.q
    qw = q_work if q_work is not None else q + LOSS_PER_MUL * chain_length(x) + 16
    muls = [0]

    def mul(a: EIdeal, b: EIdeal) -> EIdeal:
        muls[0] += 1
        return eideal_mul(a, b)

    unit = unit_eideal(order, qw)

    # (A) archimedean part: fractional parts, then binary digits of the integer parts
    ints = [math.floor(u) for u in x.u]
    fracs = [Fraction(u) - t for u, t in zip(x.u, ints)]
    s_dep = _dependent(w, fracs)
    exps = [fx_exp(fx(s_dep, qw + 8), qw + 4)] + [fx_exp_frac(fx(s, qw + 8), qw + 4) for s in fracs]
    a_minus1 = apply_diag(unit, _scale_point(order, exps), qw)
    length = max([abs(t).bit_length() for t in ints] + [0])
    digit_rows = [_balanced_digits(t, length) for t in ints]
    a_factors: list[Optional[EIdeal]] = []
    cache: dict = {}
    for k in range(length):
        a = [row[k] for row in digit_rows]
        if not any(a):
            a_factors.append(None)
            continue
        dep = _dependent(w, a)
        digits = (dep,) + tuple(Fraction(t) for t in a)
        if digits not in cache:
            cache[digits] = apply_diag(unit, _exp_digits(order, digits, qw + 4), qw)
            if params.check_det:
                _check_det(cache[digits], disc, f"A_{k}")
        a_factors.append(cache[digits])
    a_part = mul(a_minus1, _horner(a_factors, unit, mul)) if length else a_minus1

    # (B) non-archimedean part: P_j**-1 scaled to unit determinant
    if S and any(x.v):
        b_single = []
        for P in S:
            root = FixReal.exact(P.norm) if w[0] == 1 else fx_sqrt(FixReal.exact(P.norm), qw + 8)
            one = FixReal.exact(1)
            up = [root] + [one] * (len(w) - 1)
            down = [root.reciprocal(qw + 8)] + [one] * (len(w) - 1)
            b_pos = apply_diag(embed_ideal(P.ideal.inv(), qw + 8), _scale_point(order, up), qw)
            b_neg = apply_diag(embed_ideal(P.ideal, qw + 8), _scale_point(order, down), qw)
            if params.check_det:
                _check_det(b_pos, disc, "B_j")
                _check_det(b_neg, disc, "B_j^-1")
            b_single.append((b_pos, b_neg))
        vlen = max(abs(v).bit_length() for v in x.v)
        vdigits = [_balanced_digits(v, vlen) for v in x.v]
        b_factors: list[Optional[EIdeal]] = []
        for k in range(vlen):
            acc = None
            for j, row in enumerate(vdigits):
                if row[k]:
                    f = b_single[j][0] if row[k] > 0 else b_single[j][1]
                    acc = f if acc is None else mul(acc, f)
            if acc is not None and params.check_det:
                _check_det(acc, disc, f"B_{k}")
            b_factors.append(acc)
        result = mul(a_part, _horner(b_factors, unit, mul))
    else:
        result = a_part

    # phases, applied last
    if any(x.mu) or any(x.theta):
        ph = []
        for j in range(n1):
            ph.append(FixReal.exact(-1 if x.mu[j] else 1))
        for j in range(n2):
            c, s = fx_cos_sin_turns(x.theta[j], result.q + 8)
            ph.append(FixComplex(c, s))
        result = apply_diag(result, ph, result.q - 1)
    params.stats["multiplications"] = muls[0]
    params.stats["working_q"] = qw
    if result.q < q:
        raise PrecisionInsufficient(qw + (q - result.q) + 8,
                                    f"oracle output has precision {result.q} < {q}")
    return result.with_precision(q)


def eval_oracle_auto(x: ControlPoint, params: OracleParams, retries: int = 4) -> EIdeal:
    """eval_oracle, raising the working precision on PrecisionInsufficient."""
    qw = None
    for _ in range(retries + 1):
        try:
            return eval_oracle(x, params, qw)
        except PrecisionInsufficient as e:
            qw = e.required_q
    return eval_oracle(x, params, qw)


def unit_shift(u: FieldElement, S: Sequence[PrimeIdeal], q: int) -> ControlPoint:
    """Control coordinates of an S-unit, for periodicity checks."""
    return to_control(u, S, q)
