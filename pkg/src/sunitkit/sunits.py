"""S-unit groups by relation search, log embeddings and the lattice promise bounds.

The relation search stands in for the quantum hidden-subgroup step: it
collects elements whose principal ideal is supported on S by enumerating
short vectors of ideals prod P_i**a_i, keeps the valuation vectors in an
incrementally maintained echelon form and the unit logarithms in an
LLL-reduced basis, and stops once neither has changed for a while.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .bigfix import FixReal, fx_log
from .ideals import FracIdeal, PrimeIdeal, minkowski_bound, prime_from_label, valuation
from .intlinalg import hnf, hnf_square_mod, lll_int
from .numfield import (FieldElement, OrderZ, ZeroElement, element_from_json, element_to_json,
                       float_embedding_matrix)
from .qsim import _kern

UNIT_LOG_TOL = 1e-6
# largest denominator accepted when expressing a unit in the current basis
MAX_INDEX_STEP = 10 ** 6


class BudgetExceeded(RuntimeError):
    pass


class RankDeficient(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# embeddings and logs
# ---------------------------------------------------------------------------

def _weights(order: OrderZ) -> np.ndarray:
    n1, n2 = order.signature
    return np.array([1.0] * n1 + [2.0] * n2)


def realized_matrix(order: OrderZ) -> np.ndarray:
    """Rows omega_k in R^n with complex coordinates scaled by sqrt 2 (T2 is the squared length)."""
    m = float_embedding_matrix(order).copy()
    m[:, order.signature[0]:] *= math.sqrt(2.0)
    return m


def float_abs_embeddings(order: OrderZ, coords: np.ndarray) -> np.ndarray:
    """|sigma_j(x)| for each row of integer coordinates (one column per embedding)."""
    e = coords @ float_embedding_matrix(order)
    n1, n2 = order.signature
    out = [np.abs(e[:, :n1])]
    if n2:
        out.append(np.hypot(e[:, n1::2], e[:, n1 + 1::2]))
    return np.hstack(out)


def centered_logs(order: OrderZ, logs: np.ndarray) -> np.ndarray:
    """Remove the norm part: the result sums to zero, like the log vector of a unit."""
    w = _weights(order)
    return logs - w * (logs.sum() / w.sum())


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def float_logs(x: FieldElement) -> np.ndarray:
    """w_j log|sigma_j(x)| as floats, through certified embeddings when coordinates are large."""
    order = x.order
    bits = max(abs(c).bit_length() for c in x.coords) + x.denom.bit_length()
    if bits < 40:
        a = float_abs_embeddings(order, np.array([x.coords], dtype=np.float64))[0] / x.denom
        return _weights(order) * np.log(a)
    emb = order.embeddings(2 * bits + 64).embed(x)
    n1 = order.signature[0]
    out = []
    for j, c in enumerate(emb):
        if j < n1:
            out.append(_log_fraction(abs(c.center())))
        else:
            out.append(_log_fraction(c.abs2().center()))
    return np.array(out)


def log_embedding(x: FieldElement, S: Sequence[PrimeIdeal], q: int = 64) -> list[FixReal]:
    """(w_j log|sigma_j(x)|)_j followed by (-v_P(x) log N(P))_P; sums to 0 on S-units."""
    if x.is_zero():
        raise ZeroElement("log embedding of zero")
    order = x.order
    n1, _ = order.signature
    emb = order.embeddings(q + 16).embed(x)
    out = []
    for j, c in enumerate(emb):
        if j < n1:
            out.append(fx_log(abs(c), q + 4))
        else:
            out.append(fx_log(c.abs2(), q + 4))
    for P in S:
        v = valuation(x, P)
        out.append(fx_log(FixReal.exact(P.norm), q + 4) * (-v) if v else FixReal.exact(0))
    return out


# ---------------------------------------------------------------------------
# torsion
# ---------------------------------------------------------------------------

def roots_of_unity(order: OrderZ) -> tuple[FieldElement, int]:
    """A generator of the roots of unity in the order and their number."""
    n = order.n
    one = FieldElement.make(order, order.one)
    if order.signature[0] > 0:
        return -one, 2
    basis = realized_matrix(order)
    red, u = _reduce_float_basis(basis)
    coeffs = _kern.enum_ball(red, math.sqrt(n) * (1 + 1e-9), 10 ** 6)
    found = []
    for c in coeffs:
        if not c.any():
            continue
        xs = [int(t) for t in np.array(c) @ u]
        x = FieldElement.make(order, xs)
        if np.all(np.abs(float_abs_embeddings(order, np.array([xs], dtype=np.float64)) - 1) < 1e-9):
            found.append(x)
    best, best_ord = -one, 2
    for x in found:
        k, p = 1, x
        while p != one and k <= 4 * n * n:
            p = p * x
            k += 1
        if p == one and k > best_ord:
            best, best_ord = x, k
    return best, best_ord


def _reduce_float_basis(basis: np.ndarray, bits: int = 40) -> tuple[np.ndarray, np.ndarray]:
    scale = 2.0 ** bits
    ints = [[int(round(x * scale)) for x in row] for row in basis]
    _, u = lll_int(ints)
    u = np.array(u, dtype=np.int64)
    return u.astype(np.float64) @ basis, u


# ---------------------------------------------------------------------------
# incremental structures
# ---------------------------------------------------------------------------

class _Bases:
    """Elements that power products refer to, with their log vectors."""

    def __init__(self):
        self.elems: list[FieldElement] = []
        self.logs: list[np.ndarray] = []

    def add(self, x: FieldElement, logs: Optional[np.ndarray] = None) -> dict[int, int]:
        self.elems.append(x)
        self.logs.append(float_logs(x) if logs is None else logs)
        return {len(self.elems) - 1: 1}

    def logs_of(self, exps: dict[int, int]) -> np.ndarray:
        out = np.zeros_like(self.logs[0])
        for i, e in exps.items():
            out += e * self.logs[i]
        return out

    def factors(self, exps: dict[int, int]) -> tuple:
        return tuple((self.elems[i], e) for i, e in sorted(exps.items()) if e)


def _lin(a: dict[int, int], x: int, b: dict[int, int], y: int) -> dict[int, int]:
    """Exponent dict of a**x * b**y."""
    out: dict[int, int] = {}
    for d, k in ((a, x), (b, y)):
        if not k:
            continue
        for i, e in d.items():
            t = out.get(i, 0) + k * e
            if t:
                out[i] = t
            else:
                out.pop(i, None)
    return out


def expand_product(factors: Sequence[tuple[FieldElement, int]]) -> FieldElement:
    """Exact value of prod x**e; positive and negative parts are multiplied separately."""
    num = den = None
    for x, e in factors:
        if e > 0:
            t = x ** e
            num = t if num is None else num * t
        elif e < 0:
            t = x ** (-e)
            den = t if den is None else den * t
    if num is None and den is None:
        raise ValueError("empty product")
    if den is None:
        return num
    if num is None:
        return den.inverse()
    return num / den


class _Echelon:
    """Integer row echelon form of valuation vectors; each row carries an S-unit with those valuations."""

    def __init__(self, s: int, bases: _Bases, reducer):
        self.s = s
        self.bases = bases
        self.reducer = reducer
        self.rows: dict[int, tuple[list[int], dict[int, int]]] = {}

    def index(self) -> Optional[int]:
        if len(self.rows) < self.s:
            return None
        return math.prod(abs(self.rows[c][0][c]) for c in range(self.s))

    def _set(self, c: int, v: list[int], e: dict[int, int]) -> None:
        self.rows[c] = (v, self.reducer(e))

    def insert(self, v: list[int], x: dict[int, int]) -> Optional[dict[int, int]]:
        """Returns the leftover unit when v reduces to zero, else None."""
        v = list(v)
        for c in range(self.s):
            if v[c] == 0:
                continue
            if c not in self.rows:
                self._set(c, v, x)
                return None
            rv, rx = self.rows[c]
            a, b = rv[c], v[c]
            if b % a == 0:
                k = b // a
                v = [p - k * q for p, q in zip(v, rv)]
                x = _lin(x, 1, rx, -k)
                continue
            g, s1, s2 = _xgcd(a, b)
            # [s1 s2; -b/g a/g] is unimodular
            nv = [s1 * p + s2 * q for p, q in zip(rv, v)]
            ov = [(-b // g) * p + (a // g) * q for p, q in zip(rv, v)]
            nx = _lin(rx, s1, x, s2)
            x = _lin(rx, -b // g, x, a // g)
            self._set(c, nv, nx)
            v = ov
            # keep entries right of the new pivot small
            self._reduce_right(c)
        return x

    def _reduce_right(self, c: int) -> None:
        v, e = self.rows[c]
        for c2 in range(c + 1, self.s):
            if c2 in self.rows and v[c2]:
                pv, pe = self.rows[c2]
                k = v[c2] // pv[c2] if pv[c2] > 0 else -(v[c2] // -pv[c2])
                if k:
                    v = [p - k * q for p, q in zip(v, pv)]
                    e = _lin(e, 1, pe, -k)
        self.rows[c] = (v, e)

    def normalise(self) -> None:
        """Hermite normal form: positive pivots, entries above each pivot reduced into [0, pivot)."""
        cols = sorted(self.rows)
        for c in cols:
            v, e = self.rows[c]
            if v[c] < 0:
                self._set(c, [-t for t in v], _lin(e, -1, {}, 0))
        for c in cols:
            pv, pe = self.rows[c]
            for c2 in cols:
                if c2 >= c:
                    break
                v, e = self.rows[c2]
                k = v[c] // pv[c]
                if k:
                    self._set(c2, [p - k * q for p, q in zip(v, pv)], _lin(e, 1, pe, -k))

    def basis(self) -> list[tuple[list[int], dict[int, int]]]:
        return [self.rows[c] for c in sorted(self.rows)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


class _UnitLattice:
    """LLL-reduced generators of the unit logarithm lattice (first coordinate dropped)."""

    def __init__(self, r: int, bases: _Bases, weights: np.ndarray):
        self.r = r
        self.bases = bases
        self.weights = weights
        self.gens: list[tuple[dict[int, int], np.ndarray]] = []

    def regulator(self) -> Optional[float]:
        if len(self.gens) < self.r:
            return None
        if self.r == 0:
            return 1.0
        m = np.array([g[1][1:] for g in self.gens])
        return abs(float(np.linalg.det(m)))

    def add(self, u: dict[int, int]) -> bool:
        if self.r == 0:
            return False
        logs = self.bases.logs_of(u)
        if np.max(np.abs(logs)) < UNIT_LOG_TOL:
            return False
        if not self.gens:
            self.gens = [(u, logs)]
            return True
        b = np.array([g[1][1:] for g in self.gens])
        coef, *_ = np.linalg.lstsq(b.T, logs[1:], rcond=None)
        if np.max(np.abs(coef @ b - logs[1:])) > 1e-7 * (1 + np.max(np.abs(logs))):
            # independent of the current generators
            if len(self.gens) >= self.r:
                raise RankDeficient("more independent units than the unit rank")
            self.gens = self._lll(self.gens + [(u, logs)])
            return True
        fracs = [Fraction(float(c)).limit_denominator(MAX_INDEX_STEP) for c in coef]
        den = math.lcm(*(f.denominator for f in fracs))
        if den == 1:
            return False
        k = len(self.gens)
        rows = [[den if i == j else 0 for j in range(k)] for i in range(k)]
        rows.append([int(f * den) for f in fracs])
        h, tr = hnf(rows)
        cand = self.gens + [(u, logs)]
        new = [self._combine(cand, trow) for hrow, trow in zip(h, tr) if any(hrow)]
        self.gens = self._lll(new)
        return True

    def _combine(self, cand: list, coeffs: Sequence[int]) -> tuple:
        e: dict[int, int] = {}
        for (x, _), c in zip(cand, coeffs):
            if c:
                e = _lin(e, 1, x, int(c))
        return e, self.bases.logs_of(e)

    def _lll(self, cand: list, bits: int = 30) -> list:
        """LLL on the log vectors; only the exponents are rounded."""
        if len(cand) <= 1:
            return cand
        rows = [[int(round(x * 2.0 ** bits)) for x in lg[1:]] for _, lg in cand]
        try:
            _, tr = lll_int(rows)
        except (ValueError, ZeroDivisionError):
            return cand
        return [self._combine(cand, row) for row in tr]

    def centre(self, logs: np.ndarray) -> np.ndarray:
        return logs - self.weights * (logs.sum() / self.weights.sum())

    def reduce(self, x: dict[int, int]) -> dict[int, int]:
        """Multiply x by units so that its archimedean log vector is short (Babai rounding)."""
        if not self.gens:
            return x
        logs = self.centre(self.bases.logs_of(x))
        b = np.array([g[1][1:] for g in self.gens])
        c = np.rint(np.linalg.lstsq(b.T, logs[1:], rcond=None)[0]).astype(int)
        for (u, _), k in zip(self.gens, c):
            if k:
                x = _lin(x, 1, u, -int(k))
        return x


# ---------------------------------------------------------------------------
# the S-unit group
# ---------------------------------------------------------------------------

class SUnitGenerator:
    """An S-unit kept as a power product of small elements; the value is expanded on demand."""

    def __init__(self, factors: Sequence[tuple[FieldElement, int]], vals: Sequence[int], logs: np.ndarray):
        self.factors = tuple(factors)
        self.vals = tuple(vals)
        self.logs = logs
        self._value: Optional[FieldElement] = None

    @classmethod
    def of(cls, x: FieldElement, S: Sequence[PrimeIdeal]) -> "SUnitGenerator":
        return cls(((x, 1),), [valuation(x, P) for P in S], float_logs(x))

    def value(self) -> FieldElement:
        if self._value is None:
            self._value = expand_product(self.factors)
        return self._value

    @property
    def element(self) -> FieldElement:
        return self.value()

    def __repr__(self) -> str:
        return f"SUnitGenerator(vals={self.vals}, factors={len(self.factors)})"


@dataclass
class SUnitGroup:
    order: OrderZ
    S: list
    torsion: FieldElement
    torsion_order: int
    units: list          # SUnitGenerator with zero valuations
    sgens: list          # SUnitGenerator whose valuations form an echelon basis of the image
    stats: dict = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.units) + len(self.sgens)

    @property
    def free_gens(self) -> list:
        return self.units + self.sgens

    def valuation_matrix(self) -> list[list[int]]:
        return [list(g.vals) for g in self.sgens]

    def unit_rank(self) -> int:
        return sum(self.order.signature) - 1

    def to_json(self) -> dict:
        return {
            "torsion": {"generator": element_to_json(self.torsion), "order": self.torsion_order},
            "S": [P.label() for P in self.S],
            "generators": [
                {"element": element_to_json(g.element),
                 "valuations": list(g.vals),
                 "log": [round(float(x), 12) for x in g.logs]}
                for g in self.free_gens
            ],
        }

    @staticmethod
    def from_json(order: OrderZ, data: dict) -> "SUnitGroup":
        S = [prime_from_label(order, t) for t in data["S"]]
        gens = [SUnitGenerator(((element_from_json(order, g["element"]), 1),), g["valuations"],
                               np.array(g["log"], dtype=np.float64))
                for g in data["generators"]]
        tors = data["torsion"]
        return SUnitGroup(order, S, element_from_json(order, tors["generator"]), int(tors["order"]),
                          [g for g in gens if not any(g.vals)], [g for g in gens if any(g.vals)])


def _exponent_bounds(order: OrderZ, S: Sequence[PrimeIdeal], floor_exp: int) -> list[int]:
    target = max(minkowski_bound(order), 1.0) * abs(order.discriminant)
    return [max(floor_exp, math.ceil(math.log(target) / math.log(P.norm))) for P in S]


def _search_radius(order: OrderZ, det: float, first: float, want: int) -> float:
    n = order.n
    vol = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
    return max((want * det / vol) ** (1.0 / n), first * 1.01)


class _PrimePowers:
    def __init__(self, S: Sequence[PrimeIdeal]):
        self.S = list(S)
        self.cache: dict = {}

    def ideal(self, a: Sequence[int]) -> FracIdeal:
        acc = None
        for i, e in enumerate(a):
            if not e:
                continue
            key = (i, e)
            if key not in self.cache:
                self.cache[key] = self.S[i].ideal ** e
            acc = self.cache[key] if acc is None else acc * self.cache[key]
        return acc


def short_vectors(J: FracIdeal, want: int) -> list[list[int]]:
    """Coordinates (over J.denom) of roughly ``want`` short nonzero elements of J under T2."""
    order = J.order
    # exact LLL on coordinates first: HNF rows are too long to realize in floats
    num, _ = lll_int(J.num)
    rows = np.array(num, dtype=np.float64)
    red, u = _reduce_float_basis(rows @ realized_matrix(order) / J.denom)
    det = float(J.norm()) * math.sqrt(abs(order.discriminant))
    radius = _search_radius(order, det, float(np.linalg.norm(red[0])), want)
    coeffs = _kern.enum_ball(red, radius, 50 * want + 1000)
    if coeffs is None or len(coeffs) == 0:
        return []
    return [[int(t) for t in xs] for xs in coeffs @ u @ np.array(num, dtype=object) if any(xs)]


def enumerate_sunits(order: OrderZ, S: Sequence[PrimeIdeal], height_bound: Optional[int] = None,
                     seed: int = 0, max_ideals: int = 4000, want_points: int = 24,
                     stable: Optional[int] = None, floor_exp: int = 6,
                     saturate: bool = True, collide_bound: int = 10 ** 5,
                     accept: Optional[Callable[[int, float], bool]] = None) -> SUnitGroup:
    """Generators of U_S modulo torsion, found by short-vector relation search.

    The search stops once ``stable`` consecutive relations changed neither the
    valuation index nor the regulator and, if given, ``accept(index)`` holds.
    """
    S = list(S)
    s = len(S)
    n1, n2 = order.signature
    r = n1 + n2 - 1
    rng = random.Random(seed)
    torsion, w = roots_of_unity(order)
    if order.n == 1:
        r = 0
    stable = stable if stable is not None else max(20, 2 * (s + r) + 10)
    bounds = _exponent_bounds(order, S, floor_exp)
    if height_bound is not None:
        bounds = [min(b, height_bound) for b in bounds]
    primes_p = sorted({P.p for P in S})
    by_p: dict[int, list[int]] = {}
    for i, P in enumerate(S):
        by_p.setdefault(P.p, []).append(i)
    weights = _weights(order)
    powers = _PrimePowers(S)
    bases = _Bases()
    units = _UnitLattice(r, bases, weights)
    echelon = _Echelon(s, bases, units.reduce)
    relations = 0
    seen: set = set()
    quiet = 0
    ideals_tried = 0
    partners: dict = {}
    visits: dict = {}
    box = 1
    for b in bounds:
        box *= b + 1
    exhaustive = box <= max_ideals
    if exhaustive:
        # the zero vector first (units), then the box in a seeded random order
        box_list = list(itertools.product(*[range(b + 1) for b in bounds]))
        rng.shuffle(box_list)
        box_list.sort(key=lambda a: any(a))
        exps_iter = iter(box_list)
    else:
        exps_iter = None
    singles = [] if exhaustive else list(range(s - 1, -1, -1))

    def next_exponents():
        if exhaustive:
            a = next(exps_iter, None)
            if a is not None:
                return a
        if ideals_tried == 0 or s == 0:
            return (0,) * s
        if singles:
            # each prime on its own first: cheap relations with valuation 1
            i = singles.pop()
            return tuple(int(j == i) for j in range(s))
        k = rng.randint(1, min(3, s))
        a = [0] * s
        for i in rng.sample(range(s), k):
            # geometric: small exponents are the productive ones
            e = 1
            while e < bounds[i] and rng.random() < 0.5:
                e += 1
            a[i] = e
        return tuple(a)

    def done() -> bool:
        if quiet < stable or echelon.index() is None or units.regulator() is None:
            return False
        return accept is None or accept(echelon.index(), units.regulator())

    while not done():
        a = next_exponents()
        if ideals_tried >= max_ideals:
            break
        ideals_tried += 1
        J = powers.ideal(a) if any(a) else FracIdeal.unit(order)
        visits[a] = visits.get(a, 0) + 1
        coords = short_vectors(J, want_points * visits[a])
        for xs in coords:
            key = tuple(xs)
            # x and -x give the same information
            if key in seen or tuple(-t for t in xs) in seen:
                continue
            seen.add(key)
            x = FieldElement.make(order, xs, J.denom)
            absv = float_abs_embeddings(order, np.array([x.coords], dtype=np.float64))[0] / x.denom
            nrm = float(np.prod(absv ** weights))
            m = int(round(nrm))
            if m == 0 or abs(nrm - m) > 1e-6 * max(1.0, nrm):
                continue
            rest = m
            for p in primes_p:
                while rest % p == 0:
                    rest //= p
            if rest != 1 and (rest > collide_bound or not x.is_integral()):
                quiet += 1 if echelon.index() is not None else 0
                continue
            vals = [0] * s
            for p in primes_p:
                if m % p == 0:
                    for i in by_p[p]:
                        vals[i] = valuation(x, S[i])
            exact = abs(x.norm())
            if exact != rest * math.prod(Fraction(S[i].norm) ** vals[i] for i in range(s)):
                continue
            if rest != 1:
                # x O = (S-part) * (x O + rest O); equal non-S parts give an S-unit quotient
                key = (rest, tuple(map(tuple, hnf_square_mod(x.mult_matrix(), rest))))
                prev = partners.get(key)
                if prev is None:
                    partners[key] = (bases.add(x), vals)
                    quiet += 1 if echelon.index() is not None else 0
                    continue
                y, yvals = prev
                xe = _lin(bases.add(x), 1, y, -1)
                vals = [a - b for a, b in zip(vals, yvals)]
            else:
                xe = bases.add(x)
            relations += 1
            before = echelon.index()
            left = echelon.insert(vals, xe)
            changed = echelon.index() != before
            if left is not None:
                changed = units.add(left) or changed
            quiet = 0 if changed else quiet + 1
            if done():
                break
    if echelon.index() is None and s > 0 or units.regulator() is None:
        raise RankDeficient(f"found rank {len(echelon.rows) + len(units.gens)} of {s + r} "
                            f"after {ideals_tried} ideals")
    unit_gens = [SUnitGenerator(bases.factors(u), (0,) * s, lg) for u, lg in units.gens]
    if saturate and unit_gens:
        unit_gens = _saturate_units(order, unit_gens, torsion, w, s)
        units.gens = [(bases.add(g.value(), g.logs), g.logs) for g in unit_gens]
    echelon.normalise()
    sgens = [SUnitGenerator(bases.factors(e), v, bases.logs_of(e)) for v, e in echelon.basis()]
    stats = {"ideals": ideals_tried, "relations": relations, "exhaustive": exhaustive,
             "accepted": accept is None or accept(echelon.index() or 0, units.regulator() or 0.0),
             "index": echelon.index(), "regulator": units.regulator()}
    return SUnitGroup(order, S, torsion, w, unit_gens, sgens, stats)


# ---------------------------------------------------------------------------
# saturation
# ---------------------------------------------------------------------------

def _small_primes(bound: int = 7) -> list[int]:
    return [p for p in (2, 3, 5, 7) if p <= bound]


def nth_root(x: FieldElement, ell: int) -> Optional[FieldElement]:
    """An exact ell-th root of x in the order (up to the order's index), or None."""
    order = x.order
    n1, n2 = order.signature
    m = float_embedding_matrix(order)
    emb = np.array(x.coords, dtype=np.float64) @ m / x.denom
    choices = []
    for j in range(n1):
        v = emb[j]
        if v < 0 and ell % 2 == 0:
            return None
        choices.append([math.copysign(abs(v) ** (1.0 / ell), v)] if ell % 2 else
                       [abs(v) ** (1.0 / ell), -abs(v) ** (1.0 / ell)])
    for j in range(n2):
        z = complex(emb[n1 + 2 * j], emb[n1 + 2 * j + 1])
        r0 = abs(z) ** (1.0 / ell)
        ang = math.atan2(z.imag, z.real)
        choices.append([r0 * complex(math.cos((ang + 2 * math.pi * k) / ell),
                                     math.sin((ang + 2 * math.pi * k) / ell)) for k in range(ell)])
    minv = np.linalg.inv(m)
    denom = max(1, int(round(1 / abs(np.linalg.det(np.array(order.basis, dtype=float)))))) if not order.is_equation_order else 1
    for combo in itertools.product(*choices):
        vec = []
        for j, c in enumerate(combo):
            if j < n1:
                vec.append(c.real if isinstance(c, complex) else c)
            else:
                vec.extend((c.real, c.imag))
        coords = np.array(vec) @ minv
        for d in sorted({1, denom}):
            ys = [int(round(t * d)) for t in coords]
            if max(abs(t * d - y) for t, y in zip(coords, ys)) > 1e-4:
                continue
            y = FieldElement.make(order, ys, d)
            if not y.is_zero() and y ** ell == x:
                return y
    return None


def _saturate_units(order: OrderZ, gens: list, torsion: FieldElement, w: int, s: int) -> list:
    """Replace generators while some torsion * product of them is an ell-th power, ell <= 7."""
    gens = list(gens)
    changed = True
    while changed:
        changed = False
        values = [g.value() for g in gens]
        for ell in _small_primes():
            for combo in itertools.product(range(ell), repeat=len(gens)):
                if not any(combo):
                    continue
                for t in range(w if w % ell == 0 else 1):
                    x = torsion ** t if t else None
                    for v, c in zip(values, combo):
                        if c:
                            x = v ** c if x is None else x * v ** c
                    y = nth_root(x, ell)
                    if y is None:
                        continue
                    # swap in y for a generator with exponent prime to ell
                    i = next(i for i, c in enumerate(combo) if c % ell)
                    logs = float_logs(y)
                    gens[i] = SUnitGenerator(((y, 1),), (0,) * s, logs)
                    changed = True
                    break
                if changed:
                    break
            if changed:
                break
    return gens


# ---------------------------------------------------------------------------
# promise bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PromiseBounds:
    lambda1_lower: float
    vol_upper: float


def promise_bounds(order: OrderZ, S: Sequence[PrimeIdeal]) -> PromiseBounds:
    n = order.n
    if n < 2:
        raise ValueError("promise bounds need degree >= 2")
    n1, n2 = order.signature
    r = n1 + n2 - 1
    disc = abs(order.discriminant)
    big_p = max([P.norm for P in S], default=2)
    lam = math.log(n) / (6 * n ** 4)
    base = 300 * math.log(big_p) * math.sqrt(disc) * ((math.e / 2) * math.log(disc)) ** (n - 1)
    vol = (2 ** n1 / math.log(2) ** len(S)) * base ** (len(S) + r - n / 2)
    return PromiseBounds(lam, vol)


def _control_rows(group: SUnitGroup) -> tuple[np.ndarray, list[float]]:
    """Free generators as (u, v) rows: u = log|sigma_j| for j >= 1, v = valuations."""
    order = group.order
    w = _weights(order)
    rows = []
    for g in group.free_gens:
        u = (g.logs / w)[1:]
        rows.append(np.concatenate([u, np.array(g.vals, dtype=float)]))
    return np.array(rows), [math.log(P.norm) for P in group.S]


def lattice_lambda1(group: SUnitGroup, box: int = 3) -> dict:
    """First minimum of the S-unit lattice in G under the mixed norm and under l2.

    The mixed norm is sqrt(sum u^2) + sum |v| log N(P); torsion elements are
    measured by their phase distance in R/Z (sign bits count as 1/2).
    """
    rows, logn = _control_rows(group)
    k = rows.shape[1] - len(logn)
    best_mixed = math.inf
    best_l2 = math.inf
    m = rows.shape[0]
    for c in itertools.product(range(-box, box + 1), repeat=m):
        if not any(c):
            continue
        vec = np.array(c, dtype=float) @ rows
        u, v = vec[:k], vec[k:]
        mixed = math.sqrt(float(u @ u)) + float(np.abs(v) @ np.array(logn)) if logn else math.sqrt(float(u @ u))
        l2 = math.sqrt(float(vec @ vec))
        best_mixed = min(best_mixed, mixed)
        best_l2 = min(best_l2, l2)
    tors = 1.0 / group.torsion_order
    return {"mixed": min(best_mixed, tors), "l2": min(best_l2, tors),
            "free_mixed": best_mixed, "free_l2": best_l2}


def lattice_volume(group: SUnitGroup) -> float:
    rows, _ = _control_rows(group)
    if rows.shape[0] == 0:
        return 1.0
    return abs(float(np.linalg.det(rows)))


def verify_group(group: SUnitGroup, expand: bool = False) -> bool:
    """Exact checks of each generator's valuations and of the norm identity.

    By default these run factor by factor on the power product; with
    ``expand`` the generator is multiplied out first.
    """
    cache: dict = {}
    for g in group.free_gens:
        if expand:
            x = g.value()
            vals = tuple(valuation(x, P) for P in group.S)
            nrm = abs(x.norm())
        else:
            acc = [0] * len(group.S)
            nrm = Fraction(1)
            for x, e in g.factors:
                key = (x.coords, x.denom)
                if key not in cache:
                    cache[key] = ([valuation(x, P) for P in group.S], abs(x.norm()))
                xv, xn = cache[key]
                acc = [a + e * b for a, b in zip(acc, xv)]
                nrm *= xn ** e
            vals = tuple(acc)
        if vals != tuple(g.vals):
            return False
        if nrm != math.prod(Fraction(P.norm) ** v for P, v in zip(group.S, vals)):
            return False
    return True
