"""Class groups, principal ideals, class decomposition and compact representations.

Everything here is built on an S-unit group: the class group is the cokernel
of its valuation matrix, a principal ideal's generator is a product of
S-units whose valuations solve a linear system, and a compact
representation rewrites a large S-unit as a short product of small elements
raised to powers of a base l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import sympy

from .bigfix import FixComplex, FixReal, fx_arg, fx_log, fx_pi

from .ideals import (FracIdeal, PrimeIdeal, bach_bound, factor_ideal, minkowski_bound,
                     prime_from_label, primes_up_to, valuation)
from .intlinalg import PrecisionInsufficient, hnf, lll_int, snf
from .numfield import (FieldElement, OrderZ, element_from_json, element_to_json, equation_order,
                       float_embedding_matrix, make_field)
from .sunits import (SUnitGroup, _weights, centered_logs, enumerate_sunits, expand_product,
                     realized_matrix)


class NotPrincipal(ValueError):
    pass


class NotAnSUnit(ValueError):
    pass


# ---------------------------------------------------------------------------
# quadratic orders and the analytic class number
# ---------------------------------------------------------------------------

def quadratic_order(disc: int) -> OrderZ:
    """The maximal order of discriminant ``disc`` (a fundamental discriminant)."""
    if disc % 4 == 1:
        poly, core = [1, -1, (1 - disc) // 4], disc
    elif disc % 4 == 0 and (disc // 4) % 4 in (2, 3):
        poly, core = [1, 0, -disc // 4], disc // 4
    else:
        raise ValueError(f"{disc} is not a fundamental discriminant")
    if core in (0, 1) or any(e > 1 for e in sympy.factorint(abs(core)).values()):
        raise ValueError(f"{disc} is not fundamental")
    order = equation_order(make_field(poly))
    if order.discriminant != disc:
        raise ValueError(f"{disc} is not fundamental")
    return order


@lru_cache(maxsize=4)
def _odd_primes(bound: int) -> tuple[int, ...]:
    return tuple(sympy.primerange(3, bound))


def _kronecker(d: int, p: int) -> int:
    if p == 2:
        return 0 if d % 2 == 0 else (1 if d % 8 in (1, 7) else -1)
    t = pow(d % p, (p - 1) // 2, p)
    return -1 if t == p - 1 else t


def quadratic_hr_estimate(order: OrderZ, prime_bound: int = 20000) -> float:
    """h * R from the truncated Euler product of L(1, chi) (heuristic, used as a search guard)."""
    d = order.discriminant
    lval = 1.0 / (1.0 - _kronecker(d, 2) / 2.0)
    for p in _odd_primes(prime_bound):
        lval /= 1.0 - _kronecker(d, p) / p
    if d < 0:
        w = 6 if d == -3 else 4 if d == -4 else 2
        return w * math.sqrt(-d) * lval / (2 * math.pi)
    return math.sqrt(d) * lval / 2


def _quadratic_guard(order: OrderZ, slack: float = 1.5):
    """accept(index, regulator) for quadratic orders: index * R must be below slack * estimate.

    A relation lattice that is too small has index * R at least twice the
    true h * R, so any slack below 2 rejects it once the estimate is good.
    """
    if order.n != 2:
        return None
    est = quadratic_hr_estimate(order)
    return lambda index, reg: index * reg < slack * est


# ---------------------------------------------------------------------------
# class group
# ---------------------------------------------------------------------------

@dataclass
class ClassGroup:
    invariants: list[int]
    S: list[PrimeIdeal]
    generators: list[list[int]]   # exponents over S for each cyclic generator
    group: SUnitGroup
    snf_v: list[list[int]]        # U M V = D; class of S[j] is row j of V mod invariants

    @property
    def order(self) -> int:
        return math.prod(self.invariants)

    @property
    def trivial(self) -> bool:
        return not self.invariants

    def coordinates(self, exps: Sequence[int]) -> list[int]:
        """Class of prod S[j]**exps[j] in Z/d1 x Z/d2 x ..."""
        k = len(self.snf_v) - len(self.invariants)
        row = [sum(e * self.snf_v[j][i] for j, e in enumerate(exps)) for i in range(len(self.snf_v))]
        return [row[k + i] % d for i, d in enumerate(self.invariants)]

    def to_json(self) -> dict:
        return {"invariants": list(self.invariants), "class_number": self.order,
                "S": [P.label() for P in self.S], "generators": self.generators, "snf_v": self.snf_v}

    @staticmethod
    def from_json(order: OrderZ, data: dict) -> "ClassGroup":
        # the S-unit group is not serialised; coordinates() only needs snf_v
        return ClassGroup([int(d) for d in data["invariants"]],
                          [prime_from_label(order, t) for t in data["S"]],
                          [[int(x) for x in r] for r in data["generators"]], None,
                          [[int(x) for x in r] for r in data["snf_v"]])


def class_group_primes(order: OrderZ, prime_bound_override: Optional[float] = None,
                       one_per_prime: bool = False) -> list[PrimeIdeal]:
    bound = bach_bound(order)
    if prime_bound_override is not None:
        bound = min(bound, prime_bound_override)
    S = primes_up_to(order, max(bound, 2.0) if order.n > 1 else 1)
    if one_per_prime:
        # in a quadratic field the conjugate of P is the inverse class of P
        if order.n != 2:
            raise ValueError("one_per_prime needs a quadratic order")
        keep, seen = [], set()
        for P in S:
            if P.p not in seen:
                seen.add(P.p)
                keep.append(P)
        S = keep
    return S


def class_group(order: OrderZ, prime_bound_override: Optional[float] = None, seed: int = 0,
                one_per_prime: bool = False, **search) -> ClassGroup:
    """Invariant factors of Cl(order) from the valuation matrix of the S-units."""
    S = class_group_primes(order, prime_bound_override, one_per_prime)
    guard = _quadratic_guard(order)
    group = enumerate_sunits(order, S, seed=seed, accept=guard, **search)
    s = len(S)
    if s == 0:
        return ClassGroup([], S, [], group, [])
    m = group.valuation_matrix()
    d, _, v = snf(m)
    diag = [d[i][i] for i in range(s)]
    keep = [i for i, x in enumerate(diag) if x != 1]
    v_inv = _int_inverse(v)
    gens = [list(v_inv[i]) for i in keep]
    return ClassGroup([diag[i] for i in keep], S, gens, group, v)


def _int_inverse(m: Sequence[Sequence[int]]) -> list[list[int]]:
    """Inverse of a unimodular matrix."""
    n = len(m)
    rows = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(m)]
    h, _ = hnf(rows, transform=False)
    return [r[n:] for r in h[:n]]


# ---------------------------------------------------------------------------
# principal ideals
# ---------------------------------------------------------------------------

def _solve_echelon(m: list[list[int]], target: Sequence[int], free_cols: Sequence[int] = ()) -> Optional[tuple[list[int], list[int]]]:
    """x with target - x M zero outside ``free_cols`` and reduced into [0, pivot) on them.

    M must be square upper triangular with positive diagonal (an HNF).  Returns
    (x, remainder) or None when some column outside ``free_cols`` is not
    divisible.
    """
    s = len(target)
    rest = list(target)
    x = [0] * s
    for c in range(s):
        piv = m[c][c]
        if c in free_cols:
            k = rest[c] // piv
        else:
            if rest[c] % piv:
                return None
            k = rest[c] // piv
        if k:
            x[c] = k
            rest = [a - k * b for a, b in zip(rest, m[c])]
    return x, rest


def _unit_reduce(group: SUnitGroup, factors: list, logs: np.ndarray) -> list:
    """Append unit powers to a power product so its log vector is nearly balanced."""
    if not group.units:
        return factors
    b = np.array([g.logs[1:] for g in group.units])
    c = np.rint(np.linalg.lstsq(b.T, centered_logs(group.order, logs)[1:], rcond=None)[0]).astype(int)
    out = list(factors)
    for g, k in zip(group.units, c):
        if k:
            out.extend((x, -int(k) * e) for x, e in g.factors)
    return out


def _combine_sgens(group: SUnitGroup, x: Sequence[int]) -> tuple[list, np.ndarray]:
    factors, logs = [], np.zeros(len(_weights(group.order)))
    for g, k in zip(group.sgens, x):
        if k:
            factors.extend((y, e * k) for y, e in g.factors)
            logs = logs + k * g.logs
    return factors, logs


def _collect(factors: list) -> list:
    acc: dict = {}
    elems: dict = {}
    for y, e in factors:
        key = (tuple(y.coords), y.denom)
        elems[key] = y
        acc[key] = acc.get(key, 0) + e
    return [(elems[k], e) for k, e in acc.items() if e]


def _normalise_sign(order: OrderZ, g: FieldElement) -> FieldElement:
    # pick a canonical associate among the torsion multiples: first nonzero coordinate positive
    for c in g.coords:
        if c:
            return g if c > 0 else -g
    return g


def pip(order: OrderZ, a: FracIdeal, seed: int = 0, retries: int = 2, **search) -> FieldElement:
    """A generator g with (g) = a, or NotPrincipal.

    The S-unit group for S = primes dividing a is searched; a is principal
    iff its valuation vector lies in the valuation lattice of the S-units.
    A negative answer is rechecked with longer searches before it is reported.
    """
    one = FieldElement.make(order, order.one)
    if a == FracIdeal.unit(order):
        return one
    fac = factor_ideal(a)
    S = [P for P, _ in fac]
    target = [e for _, e in fac]
    stable = search.pop("stable", None)
    for attempt in range(retries + 1):
        st = None if stable is None and attempt == 0 else (stable or 20) * 4 ** attempt
        group = enumerate_sunits(order, S, seed=seed + attempt, stable=st, **search)
        sol = _solve_echelon(group.valuation_matrix(), target)
        if sol is None:
            continue
        factors, logs = _combine_sgens(group, sol[0])
        factors = _collect(_unit_reduce(group, factors, logs))
        g = expand_product(factors) if factors else one
        g = _normalise_sign(order, g)
        if FracIdeal.principal(g) != a:
            raise ArithmeticError("generator check failed")  # would be a bug, not a domain error
        return g
    raise NotPrincipal(f"{a.to_str()} is not principal")


# ---------------------------------------------------------------------------
# class decomposition
# ---------------------------------------------------------------------------

@dataclass
class Decomposition:
    beta_product: list            # (element, exponent) pairs; beta is their product
    exponents: list[int]          # over ``primes``
    primes: list[PrimeIdeal]

    def beta(self) -> FieldElement:
        return expand_product(self.beta_product) if self.beta_product else None

    def verify(self, a: FracIdeal) -> bool:
        order = a.order
        rhs = FracIdeal.unit(order)
        b = self.beta()
        if b is not None:
            rhs = rhs * FracIdeal.principal(b)
        for P, e in zip(self.primes, self.exponents):
            if e:
                rhs = rhs * P.ideal ** e
        return rhs == a

    def to_json(self) -> dict:
        return {"exponents": list(self.exponents), "primes": [P.label() for P in self.primes],
                "beta": [dict(element_to_json(x), exp=e) for x, e in self.beta_product]}

    @staticmethod
    def from_json(order: OrderZ, data: dict) -> "Decomposition":
        return Decomposition([(element_from_json(order, b), int(b["exp"])) for b in data["beta"]],
                             [int(e) for e in data["exponents"]],
                             [prime_from_label(order, t) for t in data["primes"]])


def class_decompose(order: OrderZ, a: FracIdeal, prime_bound_override: Optional[float] = None,
                    seed: int = 0, **search) -> Decomposition:
    """a = (beta) * prod P**v with P over the generating set; verified exactly."""
    # small primes last, so the reduced exponents land on them
    base = class_group_primes(order, prime_bound_override)[::-1]
    fac = factor_ideal(a)
    extra = [P for P, _ in fac if P not in base]
    S = extra + base
    target = [dict(fac).get(P, 0) for P in S]
    guard = _quadratic_guard(order)
    group = enumerate_sunits(order, S, seed=seed, accept=guard, **search)
    m = group.valuation_matrix()
    free = range(len(extra), len(S))
    sol = _solve_echelon(m, target, free_cols=free)
    if sol is None:
        raise ArithmeticError("generating set does not generate the class of a")
    x, rest = sol
    factors, logs = _combine_sgens(group, x)
    factors = _collect(_unit_reduce(group, factors, logs))
    dec = Decomposition(factors, rest[len(extra):], base)
    if not dec.verify(a):
        raise ArithmeticError("decomposition check failed")
    return dec


# ---------------------------------------------------------------------------
# compact representation
# ---------------------------------------------------------------------------

@dataclass
class CompactRep:
    l: int
    gammas: list[FieldElement]    # alpha = prod gammas[k] ** (l ** k)

    @property
    def k0(self) -> int:
        return len(self.gammas) - 1

    def max_bits(self) -> int:
        return max(g.bit_size() for g in self.gammas)

    def expand(self) -> FieldElement:
        return expand_product([(g, self.l ** k) for k, g in enumerate(self.gammas)])

    def valuations(self, S: Sequence[PrimeIdeal]) -> list[int]:
        return [sum(self.l ** k * valuation(g, P) for k, g in enumerate(self.gammas)) for P in S]

    def to_json(self) -> dict:
        return {"l": self.l, "k0": self.k0, "gammas": [element_to_json(g) for g in self.gammas]}

    @staticmethod
    def from_json(order: OrderZ, data: dict) -> "CompactRep":
        return CompactRep(int(data["l"]), [element_from_json(order, g) for g in data["gammas"]])


@dataclass
class ArchData:
    """Archimedean data of an element: log|sigma_j| and phase per place.

    Phases are in turns (R/Z); on real places they are 0 or 1/2.
    """
    logs: list[FixReal]
    phases: list[Fraction]


def arch_data(x: FieldElement, q: int = 128) -> ArchData:
    order = x.order
    n1 = order.signature[0]
    bits = max(abs(c).bit_length() for c in x.coords) + x.denom.bit_length()
    emb = order.embeddings(q + 2 * bits + 32).embed(x)
    two_pi = fx_pi(q + 16).scale2(1)
    logs, phases = [], []
    for j, z in enumerate(emb):
        if j < n1:
            logs.append(fx_log(abs(z), q))
            phases.append(Fraction(0) if z.sign() > 0 else Fraction(1, 2))
        else:
            logs.append(fx_log(z.abs2(), q).scale2(-1))
            t = (fx_arg(z, q + 8) / two_pi).center()
            phases.append(t - math.floor(t))
    return ArchData(logs, phases)


def gamma_bit_bound(order: OrderZ, S: Sequence[PrimeIdeal], l: int, c: float = 4.0) -> int:
    """c * (n + log|disc| + log max N(P) + log l)**2 bits (all logs base 2)."""
    big = max([P.norm for P in S], default=2)
    size = order.n + math.log2(max(abs(order.discriminant), 2)) + math.log2(big) + math.log2(max(l, 2))
    return int(c * size * size)


def _signed_digits(v: int, l: int, k: int) -> list[int]:
    sign = -1 if v < 0 else 1
    v = abs(v)
    out = []
    for _ in range(k + 1):
        out.append(sign * (v % l))
        v //= l
    if v:
        raise ValueError("valuation too large for the digit count")
    return out


def _reduced_element(ideal: FracIdeal, weights: np.ndarray) -> FieldElement:
    """First LLL vector of ``ideal`` under T2 with place j scaled by weights[j]."""
    order = ideal.order
    n1 = order.signature[0]
    real = realized_matrix(order).copy()
    w = np.concatenate([weights[:n1], np.repeat(weights[n1:], 2)])
    b = np.array(ideal.num, dtype=np.float64) @ (real * w) / ideal.denom
    scale = 2.0 ** (40 - math.floor(math.log2(np.max(np.abs(b)))))
    ints = [[int(round(t * scale)) for t in row] for row in b]
    _, u = lll_int(ints)
    best = min(u, key=lambda c: float(np.linalg.norm(np.array(c, dtype=np.float64) @ b)))
    coords = [sum(c * ideal.num[i][k] for i, c in enumerate(best)) for k in range(order.n)]
    return FieldElement.make(order, coords, ideal.denom)


def compact_rep(logs: Sequence, phases: Sequence, vals: Sequence[int], l: int, order: OrderZ,
                S: Sequence[PrimeIdeal], q: int = 128, margin: int = 16) -> CompactRep:
    """Compact representation prod gamma_k ** (l**k) of the S-unit with the given data.

    ``logs`` are log|sigma_j(alpha)| per place (FixReal or numbers), ``phases``
    the phases in turns and ``vals`` the valuations at S.
    """
    if l < 2:
        raise ValueError("base must be at least 2")
    n = order.n
    n1, n2 = order.signature
    places = n1 + n2
    logs = [x if isinstance(x, FixReal) else FixReal.approx(Fraction(x), q) for x in logs]
    phases = [Fraction(p) for p in phases]
    if len(logs) != places or len(phases) != places or len(vals) != len(S):
        raise ValueError("input lengths do not match the field and S")
    worst_rad = max(x.radius() for x in logs)
    if worst_rad > Fraction(1, 2 ** (n + margin)):
        raise PrecisionInsufficient(n + margin, "log data too coarse for exact recovery")
    cap = max(math.log(abs(order.discriminant)) if abs(order.discriminant) > 1 else 0.0, 1.0)
    top = max(abs(float(x)) for x in logs)
    top_v = max([abs(v) for v in vals], default=0)
    k0 = 0
    while top / l ** k0 > cap or top_v >= l ** (k0 + 1):
        k0 += 1
    qw = q + k0 * max(1, (l - 1).bit_length()) + 32
    digits = [_signed_digits(v, l, k0) for v in vals]
    two_pi = fx_pi(qw).scale2(1)
    powers = [P.ideal for P in S]

    def ideal_part(k: int) -> FracIdeal:
        out = FracIdeal.unit(order)
        for P, d in zip(powers, digits):
            if d[k]:
                out = out * P ** d[k]
        return out

    scaled = [x * FixReal.approx(Fraction(1, l ** k0), qw + 8) for x in logs]
    R = [FixReal.exact(0)] * places
    phase_acc = [FixReal.exact(0)] * places
    sign_acc = [0] * places          # parity of sign flips on real places, as turns * 2
    ideal = FracIdeal.unit(order)
    betas: dict[int, FieldElement] = {}
    for k in range(k0, 0, -1):
        J = ideal ** l * ideal_part(k)
        Rp = [r * l + (scaled[j] if k == k0 else 0) for j, r in enumerate(R)]
        weights = np.exp(np.array([float(x) for x in Rp]) - max(float(x) for x in Rp))
        beta = _reduced_element(J.inv(), weights)
        emb = order.embeddings(qw).embed(beta)
        R = []
        for j, z in enumerate(emb):
            if j < n1:
                R.append(Rp[j] + fx_log(abs(z), qw))
                if z.sign() < 0 and l ** k % 2:
                    sign_acc[j] ^= 1
            else:
                R.append(Rp[j] + fx_log(z.abs2(), qw).scale2(-1))
                phase_acc[j] = phase_acc[j] + fx_arg(z, qw + 8) / two_pi * (l ** k)
        ideal = J * beta
        betas[k] = beta
    J = ideal ** l * ideal_part(0)
    Rp = [r * l + (scaled[j] if k0 == 0 else 0) for j, r in enumerate(R)]
    target = []
    for j in range(places):
        mag = math.exp(float(Rp[j]))
        if j < n1:
            flip = (phases[j] == Fraction(1, 2)) ^ bool(sign_acc[j])
            target.append(-mag if flip else mag)
        else:
            t = float((phase_acc[j] + FixReal.approx(phases[j], qw)).center() % 1)
            target.extend([mag * math.cos(2 * math.pi * t), mag * math.sin(2 * math.pi * t)])
    rho = _babai_element(J, np.array(target))
    if rho is None or FracIdeal.principal(rho) != J:
        raise NotAnSUnit("final element does not generate the remaining ideal")
    gammas = [rho] + [betas[k].inverse() for k in range(1, k0 + 1)]
    rep = CompactRep(l, gammas)
    _verify_compact(rep, logs, phases, vals, S, order, q)
    return rep


def _babai_element(J: FracIdeal, target: np.ndarray) -> Optional[FieldElement]:
    order = J.order
    m = float_embedding_matrix(order)
    b = np.array(J.num, dtype=np.float64) @ m / J.denom
    c = np.linalg.solve(b.T, target)
    ci = np.rint(c)
    if np.max(np.abs(c - ci)) > 0.25:
        return None
    coords = [sum(int(x) * J.num[i][k] for i, x in enumerate(ci)) for k in range(order.n)]
    return FieldElement.make(order, coords, J.denom)


def _verify_compact(rep: CompactRep, logs, phases, vals, S, order: OrderZ, q: int) -> None:
    """Valuations must match exactly on S and vanish elsewhere; logs and phases must agree."""
    total: dict = {}
    for k, g in enumerate(rep.gammas):
        for P, e in factor_ideal(g):
            total[P] = total.get(P, 0) + e * rep.l ** k
    for P, e in total.items():
        want = vals[S.index(P)] if P in S else 0
        if e != want:
            raise NotAnSUnit(f"valuation mismatch at {P.label()}")
    for P, v in zip(S, vals):
        if v and total.get(P, 0) != v:
            raise NotAnSUnit(f"valuation mismatch at {P.label()}")
    n1 = order.signature[0]
    qv = max(q, 100)
    acc = [FixReal.exact(0)] * len(logs)
    turns = [Fraction(0)] * len(logs)
    for k, g in enumerate(rep.gammas):
        data = arch_data(g, qv + k * rep.l.bit_length() + 16)
        for j in range(len(logs)):
            acc[j] = acc[j] + data.logs[j] * rep.l ** k
            turns[j] += data.phases[j] * rep.l ** k
    tol = Fraction(1, 2 ** 20)
    for j in range(len(logs)):
        if abs(acc[j].center() - logs[j].center()) > acc[j].radius() + logs[j].radius() + Fraction(1, 2 ** (qv // 2)):
            raise NotAnSUnit("archimedean logs disagree")
        d = (turns[j] - phases[j]) % 1
        if min(d, 1 - d) > tol:
            raise NotAnSUnit("phases disagree")


def compact_rep_of(alpha: FieldElement, S: Sequence[PrimeIdeal], l: int = 2, q: int = 128) -> CompactRep:
    """Convenience wrapper: compute the inputs of compact_rep from an exact S-unit."""
    S = list(S)
    data = arch_data(alpha, q)
    vals = [valuation(alpha, P) for P in S]
    return compact_rep(data.logs, data.phases, vals, l, alpha.order, S, q)


__all__ = [
    "NotPrincipal", "NotAnSUnit", "ClassGroup", "Decomposition", "CompactRep", "ArchData",
    "quadratic_order", "quadratic_hr_estimate", "class_group", "class_group_primes", "pip",
    "class_decompose", "compact_rep", "compact_rep_of", "arch_data", "gamma_bit_bound",
]
