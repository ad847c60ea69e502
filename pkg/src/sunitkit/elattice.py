"""Lattices in E = R^n1 x C^n2 stable under the embedded order.

Vectors are stored in R^n as the n1 real components followed by
(Re, Im) pairs.  The Euclidean structure of E counts complex components
twice, which amounts to scaling the stored (Re, Im) pairs by sqrt(2);
``EIdeal.det`` reports determinants in that normalisation, so an ideal of
norm N has determinant N * sqrt|disc|.  Matrices act on row vectors, so ``diag_of(x)`` is the
matrix with ``v @ diag_of(x) == v * x`` componentwise; for a complex
component z = a + ib its 2x2 block is [[a, b], [-b, a]].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .bigfix import (
    DomainError,
    FixComplex,
    FixReal,
    PrecisionExhausted,
    fx,
    fx_exp,
    fx_exp_complex,
    fx_log,
    fx_log_complex,
    fx_sqrt,
)
from .ideals import FracIdeal
from .intlinalg import (
    ApproxBasis,
    basis_from_approx_generators,
    det_exact,
    inverse_exact,
    lll_int,
    matmul,
)
from .numfield import FieldElement, OrderZ, float_embedding_matrix

Component = Union[FixReal, FixComplex]
EPoint = list  # n1 FixReal followed by n2 FixComplex


# ---------------------------------------------------------------------------
# E-points and diag matrices
# ---------------------------------------------------------------------------

def epoint_to_vector(x: EPoint) -> list[FixReal]:
    out: list[FixReal] = []
    for c in x:
        if isinstance(c, FixComplex):
            out.extend((c.re, c.im))
        else:
            out.append(c)
    return out


def vector_to_epoint(v: Sequence[FixReal], n1: int) -> EPoint:
    out: EPoint = list(v[:n1])
    for i in range(n1, len(v), 2):
        out.append(FixComplex(v[i], v[i + 1]))
    return out


def h_norm_sq(x: EPoint) -> FixReal:
    """Squared norm counting each complex component twice."""
    acc = FixReal.exact(0)
    for c in x:
        acc = acc + (c.abs2().scale2(1) if isinstance(c, FixComplex) else c.square())
    return acc


def ep_mul(x: EPoint, y: EPoint) -> EPoint:
    return [a * b for a, b in zip(x, y)]


def diag_of(x: EPoint) -> list[list[FixReal]]:
    n = sum(2 if isinstance(c, FixComplex) else 1 for c in x)
    zero = FixReal.exact(0)
    m = [[zero] * n for _ in range(n)]
    i = 0
    for c in x:
        if isinstance(c, FixComplex):
            m[i][i] = c.re
            m[i][i + 1] = c.im
            m[i + 1][i] = -c.im
            m[i + 1][i + 1] = c.re
            i += 2
        else:
            m[i][i] = c
            i += 1
    return m


def ep_exp(x: EPoint, q: int) -> EPoint:
    return [fx_exp_complex(c, q) if isinstance(c, FixComplex) else fx_exp(c, q) for c in x]


def diag_exp(x: EPoint, q: int) -> list[list[FixReal]]:
    return diag_of(ep_exp(x, q))


def fix_matmul(a: Sequence[Sequence[FixReal]], b: Sequence[Sequence[FixReal]]) -> list[list[FixReal]]:
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = FixReal.exact(0)
            for t in range(k):
                acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def _frob_upper(m: Sequence[Sequence]) -> Fraction:
    """Upper bound of the Frobenius norm (entries FixReal or rational)."""
    s = Fraction(0)
    for row in m:
        for x in row:
            v = x.abs_upper() if isinstance(x, FixReal) else abs(Fraction(x))
            s += v * v
    return _sqrt_up(s)


def _sqrt_up(x: Fraction) -> Fraction:
    if x <= 0:
        return Fraction(0)
    shift = x.denominator.bit_length() // 2 + 64
    r = math.isqrt((x.numerator << (2 * shift)) // x.denominator) + 1
    return Fraction(r, 1 << shift)


def diag_log(w: Sequence[Sequence], n1: int, q: int) -> EPoint:
    """Inverse of diag_exp for a matrix of diag form within distance 1 of I."""
    n = len(w)
    wf = [[x if isinstance(x, FixReal) else fx(Fraction(x), q + 8) for x in row] for row in w]
    dev = [[wf[i][j] - int(i == j) for j in range(n)] for i in range(n)]
    if _frob_upper(dev) >= 1:
        raise DomainError("diag_log needs |W - I| < 1")
    out: EPoint = []
    for i in range(n1):
        out.append(fx_log(wf[i][i], q))
    for i in range(n1, n, 2):
        a = (wf[i][i] + wf[i + 1][i + 1]).scale2(-1)
        b = (wf[i][i + 1] - wf[i + 1][i]).scale2(-1)
        out.append(fx_log_complex(FixComplex(a, b), q))
    return out


# ---------------------------------------------------------------------------
# E-ideals
# ---------------------------------------------------------------------------

def _round_to_grid(x: FixReal, q: int) -> int:
    c = x.center() * (1 << q)
    return math.floor(c + Fraction(1, 2))


def _grid_from_fix(rows: Sequence[Sequence[FixReal]], q_cap: Optional[int]) -> tuple[list[list[int]], int]:
    errs = [x.err_q for r in rows for x in r if x.err_q is not None]
    q = (min(errs) if errs else 10 ** 6) - 1
    if q_cap is not None:
        q = min(q, q_cap)
    if q < 1:
        raise PrecisionExhausted("E-ideal entries too imprecise")
    return [[_round_to_grid(x, q) for x in r] for r in rows], q


@dataclass(frozen=True)
class EIdeal:
    """Rows of ``mant * 2**-q`` span the lattice; each entry is within 2**-q.

    ``norm`` is the determinant divided by sqrt|disc| (the ideal norm for
    embedded ideals, 1 for the unit-determinant ideals of the oracle).
    """

    order: OrderZ
    mant: tuple[tuple[int, ...], ...]
    q: int
    norm: float = 1.0
    provenance: str = "synthetic"
    ideal: Optional[FracIdeal] = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.order.n

    @property
    def n1(self) -> int:
        return self.order.signature[0]

    def rows_fix(self) -> list[list[FixReal]]:
        return [[FixReal(x, self.q, self.q) for x in r] for r in self.mant]

    def to_float(self) -> list[list[float]]:
        s = float(2 ** self.q)
        return [[x / s for x in r] for r in self.mant]

    def epoints(self) -> list[EPoint]:
        return [vector_to_epoint(r, self.n1) for r in self.rows_fix()]

    def approx_basis(self) -> ApproxBasis:
        return ApproxBasis([list(r) for r in self.mant], self.q, self.q, self.n)

    def det(self) -> FixReal:
        """Enclosure of |det| using a column-perturbation bound."""
        n = self.n
        center = Fraction(abs(det_exact(self.mant)), 1 << (n * self.q))
        eps = Fraction(1, 1 << self.q) * _sqrt_up(Fraction(n))
        norms = [_sqrt_up(Fraction(sum(x * x for x in r), 1 << (2 * self.q))) + eps for r in self.mant]
        # |det(M+E) - det(M)| <= sum_i |E_i| prod_{j != i} (|M_j| + |E_j|)
        bound = Fraction(0)
        for i in range(n):
            t = eps
            for j in range(n):
                if j != i:
                    t *= norms[j]
            bound += t
        scale = 1 << self.order.signature[1]
        return FixReal.from_interval(center * scale, bound * scale)

    def with_precision(self, q: int) -> "EIdeal":
        if q >= self.q:
            return self
        if q < 1:
            raise PrecisionExhausted("precision too low")
        s = self.q - q
        # old error 2**-self.q plus rounding 2**-(q+1) stays below 2**-q
        mant = tuple(tuple(_rshift_round(x, s) for x in r) for r in self.mant)
        return EIdeal(self.order, mant, q, self.norm, self.provenance, self.ideal)

    def to_json(self) -> dict:
        return {
            "rows": [[f"{x}*2^-{self.q}" for x in r] for r in self.mant],
            "err_q": self.q,
            "norm": self.norm,
            "provenance": self.provenance,
        }

    @staticmethod
    def from_json(order: OrderZ, data: dict) -> "EIdeal":
        q = int(data["err_q"])
        mant = []
        for r in data["rows"]:
            row = []
            for s in r:
                m, e = s.split("*2^-")
                if int(e) != q:
                    raise ValueError("row entries must share the stated grid")
                row.append(int(m))
            mant.append(tuple(row))
        return EIdeal(order, tuple(mant), q, float(data.get("norm", 1.0)), data.get("provenance", "synthetic"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _rshift_round(x: int, s: int) -> int:
    if s <= 0:
        return x << -s
    half = 1 << (s - 1)
    return (x + half) >> s if x >= 0 else -((-x + half) >> s)


def _canonical_signs(mant: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    out = []
    for r in mant:
        first = next((x for x in r if x), 0)
        out.append(tuple(-x for x in r) if first < 0 else tuple(r))
    return tuple(out)


def embed_element(x: FieldElement, q: int) -> list[FixReal]:
    table = x.order.embeddings(q)
    return epoint_to_vector(table.embed(x))


def _t2_reduced_rows(a: FracIdeal) -> list[list[int]]:
    """A basis of a.num that is LLL-reduced for the embedded norm (the change of basis is exact)."""
    num, _ = lll_int(a.num)
    b = np.array(num, dtype=np.float64) @ float_embedding_matrix(a.order)
    scale = 2.0 ** 40 / max(float(np.abs(b).max()), 1e-300)
    try:
        _, u = lll_int([[int(round(x * scale)) for x in row] for row in b])
    except ValueError:
        return num
    return matmul(u, num)


def embed_ideal(a: FracIdeal, q: int) -> EIdeal:
    """Embedding of the HNF basis of a, on a 2**-q grid."""
    order = a.order
    extra = max(max((abs(c).bit_length() for r in a.num for c in r), default=1) + 4, 8)
    table = order.embeddings(q + extra)
    rows = []
    for r in _t2_reduced_rows(a):
        e = table.embed(FieldElement.make(order, r, a.denom))
        rows.append(epoint_to_vector(e))
    mant, qq = _grid_from_fix(rows, q)
    if qq < q:
        raise PrecisionExhausted("embedding table too coarse")
    return EIdeal(order, tuple(tuple(r) for r in mant), q, float(a.norm()), "exact", a)


def unit_eideal(order: OrderZ, q: int) -> EIdeal:
    return embed_ideal(FracIdeal.unit(order), q)


def _abs_weighted_product(x: EPoint) -> float:
    s = 0.0
    for c in x:
        if isinstance(c, FixComplex):
            s += math.log(abs(complex(c)) ** 2)
        else:
            s += math.log(abs(float(c)))
    return math.exp(s)


def apply_diag(e: EIdeal, x: EPoint, q: Optional[int] = None) -> EIdeal:
    """The E-ideal with basis rows multiplied componentwise by x."""
    rows = [epoint_to_vector(ep_mul(r, x)) for r in e.epoints()]
    mant, qq = _grid_from_fix(rows, q if q is not None else e.q)
    return EIdeal(e.order, tuple(tuple(r) for r in mant), qq, e.norm * _abs_weighted_product(x), "synthetic")


def _cross_terms(a: EIdeal, b: EIdeal) -> tuple[list[list[int]], int, Fraction, float]:
    """Componentwise products of all basis pairs on the 2**-(qa+qb) grid."""
    n1 = a.n1
    n = a.n
    ea = Fraction(1, 1 << a.q)
    eb = Fraction(1, 1 << b.q)
    rows = []
    worst = Fraction(0)
    alpha = 0.0
    sa = 1 << a.q
    sb = 1 << b.q
    for ra in a.mant:
        for rb in b.mant:
            row = []
            for j in range(n1):
                row.append(ra[j] * rb[j])
                err = abs(Fraction(ra[j], sa)) * eb + abs(Fraction(rb[j], sb)) * ea + ea * eb
                worst = max(worst, err)
            for j in range(n1, n, 2):
                ar, ai, br, bi = ra[j], ra[j + 1], rb[j], rb[j + 1]
                row.append(ar * br - ai * bi)
                row.append(ar * bi + ai * br)
                za = Fraction(abs(ar) + abs(ai), sa)
                zb = Fraction(abs(br) + abs(bi), sb)
                err = za * 2 * eb + zb * 2 * ea + 4 * ea * eb
                worst = max(worst, err)
            rows.append(row)
            alpha = max(alpha, float(Fraction(math.isqrt(sum(x * x for x in row)) + 1, sa * sb)))
    return rows, a.q + b.q, worst, alpha


def _err_bits(x: Fraction) -> int:
    """Largest e with 2**-e >= x (x > 0)."""
    if x <= 0:
        return 10 ** 6
    e = x.denominator.bit_length() - x.numerator.bit_length()
    while Fraction(1, 1) / (Fraction(2) ** e) < x:
        e -= 1
    while Fraction(1, 1) / (Fraction(2) ** (e + 1)) >= x:
        e += 1
    return e


def lambda1_lower(order: OrderZ, norm: float) -> float:
    """Lower bound on the first minimum of an E-ideal of the given norm (stored layout)."""
    n = order.n
    factor = n if order.signature[1] == 0 else n / 2
    return math.sqrt(factor) * norm ** (1.0 / n)


def eideal_mul(a: EIdeal, b: EIdeal, q_out: Optional[int] = None) -> EIdeal:
    """Product lattice from the n^2 cross terms via approximate-generator reduction."""
    if a.order is not b.order:
        raise ValueError("E-ideals of different orders")
    order = a.order
    n = order.n
    rows, q0, worst, alpha = _cross_terms(a, b)
    # renormalise so the grid matches the error (rounding costs one bit)
    err_q = min(q0, _err_bits(worst)) - 1
    rows = [[_rshift_round(x, q0 - err_q) for x in r] for r in rows]
    norm = a.norm * b.norm
    mu = lambda1_lower(order, norm) * 0.999
    det = norm * math.sqrt(abs(order.discriminant)) / 2 ** order.signature[1] * 0.999
    basis = ApproxBasis(rows, err_q, err_q, n)
    _, red = basis_from_approx_generators(basis, alpha * 1.001 + 2.0 ** -err_q, mu, det)
    cap = q_out if q_out is not None else min(a.q, b.q)
    out = EIdeal(order, _canonical_signs(red.mant), red.q0, norm, "synthetic")
    if out.q > red.err_q:
        raise PrecisionExhausted("unexpected grid")
    return out.with_precision(cap) if out.q > cap else out


# ---------------------------------------------------------------------------
# matrix distance
# ---------------------------------------------------------------------------

@dataclass
class DistanceReport:
    distance: FixReal
    log_point: EPoint
    transform: list[list[int]]


def _frac_matrix(e: EIdeal) -> list[list[Fraction]]:
    s = 1 << e.q
    return [[Fraction(x, s) for x in r] for r in e.mant]


def matrix_distance_report(a: EIdeal, b: EIdeal, q: Optional[int] = None) -> Optional[DistanceReport]:
    order = a.order
    n = order.n
    n1 = order.signature[0]
    q = q if q is not None else min(a.q, b.q)
    ma = _frac_matrix(a)
    mb = _frac_matrix(b)
    ma_inv = inverse_exact(ma)
    coeffs = matmul(mb, ma_inv)
    v = [[math.floor(c + Fraction(1, 2)) for c in row] for row in coeffs]
    if abs(det_exact(v)) != 1:
        return None
    c = matmul(v, ma)
    c_inv = inverse_exact(c)
    w = matmul(c_inv, mb)
    dev = [[w[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    dev_norm = float(_frob_upper(dev))
    disc = abs(order.discriminant)
    if dev_norm >= 1.0 / (2 * math.sqrt(n) * disc):
        return None
    # first-order perturbation of W from the input errors
    ea = math.sqrt(n) * n * 2.0 ** -a.q
    eb = math.sqrt(n) * n * 2.0 ** -b.q
    ci = float(_frob_upper(c_inv))
    dc = float(_frob_upper(v)) * ea
    wn = float(_frob_upper(w))
    if ci * dc >= 0.5:
        raise PrecisionExhausted("matrix distance not certified at current precision")
    dw = 2 * ci * (eb + dc * wn)
    # projection onto diag form
    proj = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n1):
        proj[i][i] = w[i][i]
    for i in range(n1, n, 2):
        aa = (w[i][i] + w[i + 1][i + 1]) / 2
        bb = (w[i][i + 1] - w[i + 1][i]) / 2
        proj[i][i] = proj[i + 1][i + 1] = aa
        proj[i][i + 1] = bb
        proj[i + 1][i] = -bb
    resid = float(_frob_upper([[w[i][j] - proj[i][j] for j in range(n)] for i in range(n)]))
    logs = diag_log(proj, n1, q + 4)
    dist = FixReal.exact(0)
    for comp in logs:
        if isinstance(comp, FixComplex):
            mag = fx_sqrt(comp.abs2(), q + 4)
        else:
            mag = abs(comp)
        if mag.upper() > dist.upper():
            dist = mag
    # log is 2-Lipschitz on the disc of radius 1/2 around 1
    rad = Fraction(2 * (resid + dw))
    dist = dist + FixReal.from_interval(Fraction(0), _ceil_dyadic(rad, q + 8))
    return DistanceReport(dist, logs, v)


def _ceil_dyadic(x: Fraction, q: int) -> Fraction:
    s = 1 << q
    return Fraction(math.ceil(x * s) + 1, s)


def matrix_distance_near(a: EIdeal, b: EIdeal, q: Optional[int] = None) -> Optional[FixReal]:
    """Certified matrix distance when B = V A W with W near the identity, else None."""
    rep = matrix_distance_report(a, b, q)
    return None if rep is None else rep.distance


def eideal_equal_within(a: EIdeal, b: EIdeal, tol: float) -> bool:
    d = matrix_distance_near(a, b)
    return d is not None and float(d.upper()) <= tol


def norm_scale_factor(order: OrderZ, norm: Fraction, q: int) -> FixReal:
    """norm**(-1/n) as an enclosure."""
    lg = fx_log(fx(Fraction(norm), q + 8), q + 8)
    return fx_exp(-(lg * fx(Fraction(1, order.n), q + 8)), q)


def normalise_norm(e: EIdeal, norm: Fraction, q: Optional[int] = None) -> EIdeal:
    """Scale an embedded ideal of norm N by N**(-1/n) (determinant sqrt|disc|)."""
    q = q if q is not None else e.q
    s = norm_scale_factor(e.order, norm, q + 8)
    zero = FixReal.exact(0)
    x = [s] * e.n1 + [FixComplex(s, zero)] * e.order.signature[1]
    return apply_diag(e, x, q)
