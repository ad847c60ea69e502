"""Exact integer linear algebra and lattice reduction.

Matrices are plain lists of rows of Python ints.  Row-style conventions are
used throughout: ``hnf`` returns ``(H, U)`` with ``U @ M == H`` and ``snf``
returns ``(D, U, V)`` with ``U @ M @ V == D``.

Approximate bases (``ApproxBasis``) hold integer mantissas on a common
``2**-q0`` grid with a per-entry error of at most ``2**-err_q``.  Reduction of
approximate bases happens on the mantissas, which is exact integer LLL; the
error of every output vector is then bounded by the l1 norm of its row in the
transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .bigfix import FixReal, PrecisionExhausted

IntMatrix = list[list[int]]

DEFAULT_DELTA = Fraction(99, 100)


class PrecisionInsufficient(ArithmeticError):
    """Raised when a precision precondition fails; carries the bits required."""

    def __init__(self, required_q: int, message: str = ""):
        super().__init__(message or f"precision too low, need q >= {required_q}")
        self.required_q = required_q


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in zip(*a)]


def det_exact(m: Sequence[Sequence]) -> Union[int, Fraction]:
    """Determinant by fraction-free Gaussian elimination (Bareiss)."""
    n = len(m)
    if n == 0:
        return 1
    if any(isinstance(x, Fraction) for row in m for x in row):
        a = [[Fraction(x) for x in row] for row in m]
        det = Fraction(1)
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c] != 0), None)
            if p is None:
                return Fraction(0)
            if p != c:
                a[c], a[p] = a[p], a[c]
                det = -det
            det *= a[c][c]
            for r in range(c + 1, n):
                f = a[r][c] / a[c][c]
                if f:
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return det
    a = [list(row) for row in m]
    sign = 1
    prev = 1
    for c in range(n - 1):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        for r in range(c + 1, n):
            for k in range(c + 1, n):
                a[r][k] = (a[r][k] * a[c][c] - a[r][c] * a[c][k]) // prev
        prev = a[c][c]
    return sign * a[n - 1][n - 1]


def inverse_exact(m: Sequence[Sequence]) -> list[list[Fraction]]:
    """Inverse over the rationals (Gauss-Jordan)."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def is_unimodular(u: Sequence[Sequence[int]]) -> bool:
    return abs(det_exact(u)) == 1


def _round_frac(x: Fraction) -> int:
    # nearest integer, ties rounded up
    return math.floor(x + Fraction(1, 2))


# ---------------------------------------------------------------------------
# Hermite normal form
# ---------------------------------------------------------------------------

def hnf(m: Sequence[Sequence[int]], transform: bool = True) -> tuple[IntMatrix, Optional[IntMatrix]]:
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``U M = H``.  ``H`` is upper
    triangular in echelon form with positive pivots; entries above a pivot
    lie in ``[0, pivot)``.  Zero rows are kept at the bottom so ``H`` has the
    shape of ``M``.
    """
    a = [list(map(int, row)) for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    u = identity(rows) if transform else None
    piv_row = 0
    pivots = []
    for c in range(cols):
        if piv_row >= rows:
            break
        # Euclid on column c among rows piv_row.. until one nonzero remains
        while True:
            nz = [r for r in range(piv_row, rows) if a[r][c] != 0]
            if not nz:
                break
            best = min(nz, key=lambda r: abs(a[r][c]))
            if best != piv_row:
                a[piv_row], a[best] = a[best], a[piv_row]
                if u is not None:
                    u[piv_row], u[best] = u[best], u[piv_row]
            p = a[piv_row][c]
            done = True
            for r in range(piv_row + 1, rows):
                x = a[r][c]
                if x:
                    q = x // p
                    if q:
                        ar, ap = a[r], a[piv_row]
                        a[r] = [s - q * t for s, t in zip(ar, ap)]
                        if u is not None:
                            u[r] = [s - q * t for s, t in zip(u[r], u[piv_row])]
                    if a[r][c]:
                        done = False
            if done:
                break
        if all(a[r][c] == 0 for r in range(piv_row, rows)):
            continue
        if a[piv_row][c] < 0:
            a[piv_row] = [-x for x in a[piv_row]]
            if u is not None:
                u[piv_row] = [-x for x in u[piv_row]]
        p = a[piv_row][c]
        for r in range(piv_row):
            q = a[r][c] // p
            if q:
                a[r] = [s - q * t for s, t in zip(a[r], a[piv_row])]
                if u is not None:
                    u[r] = [s - q * t for s, t in zip(u[r], u[piv_row])]
        pivots.append(c)
        piv_row += 1
    return a, u


def hnf_basis(m: Sequence[Sequence[int]]) -> IntMatrix:
    """Nonzero rows of the HNF (a basis of the row lattice)."""
    h, _ = hnf(m, transform=False)
    return [row for row in h if any(row)]


def hnf_square_mod(m: Sequence[Sequence[int]], modulus: int) -> IntMatrix:
    """n x n HNF of the row lattice of m, which must contain modulus * Z^n.

    Since every ``modulus * e_j`` lies in the lattice, entries right of the
    current column can be reduced modulo ``modulus`` at every step.
    """
    n = len(m[0])
    dmod = abs(int(modulus))
    if dmod == 0:
        raise ValueError("modulus must be nonzero")
    rows = [[x % dmod for x in r] for r in m]
    rows = [r for r in rows if any(r)]
    out: IntMatrix = []
    for c in range(n):
        cand = rows + [[dmod if j == c else 0 for j in range(n)]]
        while True:
            piv = min((r for r in cand if r[c]), key=lambda r: abs(r[c]))
            rest = []
            done = True
            for r in cand:
                if r is piv:
                    continue
                if r[c]:
                    qt = r[c] // piv[c]
                    r = [x - qt * y for x, y in zip(r, piv)]
                    if r[c]:
                        done = False
                rest.append(r)
            cand = [piv] + rest
            if done:
                break
        piv = cand[0]
        if piv[c] < 0:
            piv = [-x for x in piv]
        piv = [x % dmod if j > c else x for j, x in enumerate(piv)]
        out.append(piv)
        rows = [[x % dmod if j > c else x for j, x in enumerate(r)] for r in cand[1:]]
        rows = [r for r in rows if any(r)]
    for c in range(n):
        p = out[c][c]
        for r in range(c):
            qt = out[r][c] // p
            if qt:
                out[r] = [x - qt * y for x, y in zip(out[r], out[c])]
    return out


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def snf(m: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: returns ``(D, U, V)`` with ``U M V = D``, d1 | d2 | ... and d_i >= 0."""
    a = [list(map(int, row)) for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row dst -= q row src
        a[dst] = [x - q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x - q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):  # col dst -= q col src
        for row in a:
            row[dst] -= q * row[src]
        for row in v:
            row[dst] -= q * row[src]

    t = 0
    while t < min(rows, cols):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            changed = False
            p = a[t][t]
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, a[i][t] // p)
                    if a[i][t]:
                        swap_rows(t, i)
                        changed = True
                        break
            if changed:
                continue
            p = a[t][t]
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, a[t][j] // p)
                    if a[t][j]:
                        swap_cols(t, j)
                        changed = True
                        break
            if changed:
                continue
            # row and column cleared; enforce divisibility of the rest
            p = a[t][t]
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], -1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return a, u, v


def invariant_factors(m: Sequence[Sequence[int]]) -> list[int]:
    d, _, _ = snf(m)
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


# ---------------------------------------------------------------------------
# LLL
# ---------------------------------------------------------------------------

def lll_int(basis: Sequence[Sequence[int]], delta: Fraction = DEFAULT_DELTA) -> tuple[IntMatrix, IntMatrix]:
    """Integral LLL (all Gram-Schmidt data kept as exact integers).

    Rows must be linearly independent.  Returns ``(B', U)`` with ``U B = B'``.
    """
    b = [list(map(int, r)) for r in basis]
    n = len(b)
    u = identity(n)
    if n <= 1:
        if n == 1 and not any(b[0]):
            raise ValueError("lll_int: zero vector")
        return b, u
    delta = Fraction(delta)
    dn, dd = delta.numerator, delta.denominator
    d = [0] * (n + 1)
    d[0] = 1
    lam = [[0] * n for _ in range(n)]

    def dot(x, y):
        return sum(p * q for p, q in zip(x, y))

    def gram_row(k):
        for j in range(k + 1):
            s = dot(b[k], b[j])
            for i in range(j):
                s = (d[i + 1] * s - lam[k][i] * lam[j][i]) // d[i]
            if j < k:
                lam[k][j] = s
            else:
                if s == 0:
                    raise ValueError("lll_int: vectors are linearly dependent")
                d[k + 1] = s

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            u[k] = [x - q * y for x, y in zip(u[k], u[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        u[k], u[k - 1] = u[k - 1], u[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        bb = (d[k - 1] * d[k + 1] + lm * lm) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lm * t) // d[k]
            lam[i][k - 1] = (bb * t + lm * lam[i][k]) // d[k + 1]
        d[k] = bb

    gram_row(0)
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            gram_row(k)
        red(k, k - 1)
        if dd * d[k + 1] * d[k - 1] < dn * d[k] * d[k] - dd * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b, u


def gram_schmidt(b: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[list[Fraction]], list[Fraction]]:
    """Exact Gram-Schmidt: (b*, mu, |b*|^2)."""
    n = len(b)
    bs: list[list[Fraction]] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    norms: list[Fraction] = []
    for i in range(n):
        v = [Fraction(x) for x in b[i]]
        for j in range(i):
            if norms[j] == 0:
                continue
            mu[i][j] = sum(Fraction(x) * y for x, y in zip(b[i], bs[j])) / norms[j]
            v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
        bs.append(v)
        norms.append(sum(x * x for x in v))
    return bs, mu, norms


def is_lll_reduced(b: Sequence[Sequence], delta: Fraction = DEFAULT_DELTA) -> bool:
    _, mu, norms = gram_schmidt(b)
    n = len(b)
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for k in range(1, n):
        if norms[k] < (Fraction(delta) - mu[k][k - 1] ** 2) * norms[k - 1]:
            return False
    return True


# ---------------------------------------------------------------------------
# Approximate bases
# ---------------------------------------------------------------------------

@dataclass
class ApproxBasis:
    """Integer mantissas on a shared 2**-q0 grid, each entry within 2**-err_q."""

    mant: IntMatrix
    q0: int
    err_q: int
    rank: Optional[int] = None
    transform: Optional[IntMatrix] = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.mant)

    @property
    def m(self) -> int:
        return len(self.mant[0]) if self.mant else 0

    def entry(self, i: int, j: int) -> FixReal:
        return FixReal(self.mant[i][j], self.q0, self.err_q)

    def rows_fix(self) -> list[list[FixReal]]:
        return [[self.entry(i, j) for j in range(self.m)] for i in range(self.k)]

    def to_float(self) -> list[list[float]]:
        s = 1 << self.q0 if self.q0 >= 0 else None
        if s is None:
            return [[float(x << -self.q0) for x in row] for row in self.mant]
        return [[x / s for x in row] for row in self.mant]

    @staticmethod
    def from_fix_rows(rows: Sequence[Sequence[FixReal]], rank: Optional[int] = None) -> "ApproxBasis":
        """Put FixReal entries on their finest common grid (no rounding)."""
        q0 = max(max(x.scale_q0 for row in rows for x in row), 0)
        errs = [x.err_q for row in rows for x in row if x.err_q is not None]
        err = min(errs) if errs else q0
        err = min(err, q0)
        mant = [[x.mantissa << (q0 - x.scale_q0) for x in row] for row in rows]
        return ApproxBasis(mant, q0, err, rank)

    @staticmethod
    def from_rationals(rows: Sequence[Sequence], q: int, rank: Optional[int] = None) -> "ApproxBasis":
        mant = [[_round_frac(Fraction(x) * (1 << q)) for x in row] for row in rows]
        return ApproxBasis(mant, q, q, rank)


def _round_shift(x: int, s: int) -> int:
    half = 1 << (s - 1)
    return (x + half) >> s if x >= 0 else -((-x + half) >> s)


def _l1(row: Sequence[int]) -> int:
    return sum(abs(x) for x in row)


def combine(basis: ApproxBasis, coeffs: Sequence[Sequence[int]]) -> ApproxBasis:
    """Integer combinations of approximate vectors, renormalised (q0 = err_q)."""
    mant = [[sum(c * basis.mant[l][j] for l, c in enumerate(row) if c) for j in range(basis.m)] for row in coeffs]
    worst = max((_l1(row) for row in coeffs), default=1)
    # entry error <= worst * 2**-err_q, plus half an ulp after rounding
    loss = max(worst, 1).bit_length() + 1
    new_err = basis.err_q - loss
    shift = basis.q0 - new_err
    if shift > 0:
        mant = [[_round_shift(x, shift) for x in row] for row in mant]
        q0 = new_err
    else:
        q0 = basis.q0
    return ApproxBasis(mant, q0, new_err, basis.rank)


def lll(b: Union[ApproxBasis, Sequence[Sequence[int]]], delta: Fraction = DEFAULT_DELTA):
    """LLL-reduce an exact integer basis or an approximate basis.

    Exact input returns ``(B', U)``.  Approximate input returns
    ``(ApproxBasis, U)``; the reduction is run on the mantissas and then
    checked against the perturbation allowed by ``err_q``.  If a Lovasz or
    size condition holds by a margin smaller than that perturbation,
    ``PrecisionExhausted`` is raised.
    """
    if not isinstance(b, ApproxBasis):
        return lll_int(b, delta)
    red, u = lll_int(b.mant, delta)
    out = combine(b, u)
    _certify_reduced(red, u, b, delta)
    return out, u


def _certify_reduced(red: IntMatrix, u: IntMatrix, b: ApproxBasis, delta: Fraction) -> None:
    # perturbation of each reduced vector (in mantissa units): |E| <= l1(u_i) sqrt(m) 2**(q0-err_q)
    scale = 1 << max(b.q0 - b.err_q, 0)
    eps = [math.isqrt(b.m) + 1 for _ in red]
    eps = [e * _l1(row) * scale for e, row in zip(eps, u)]
    _, mu, norms = gram_schmidt(red)
    n = len(red)
    nmax = max(math.isqrt(int(sum(x * x for x in r))) + 1 for r in red)
    for k in range(1, n):
        slack = norms[k] - (Fraction(delta) - mu[k][k - 1] ** 2) * norms[k - 1]
        # first-order bound on how far the perturbation can move the slack
        wiggle = 8 * (n + 1) * nmax * (eps[k] + eps[k - 1])
        if slack < wiggle:
            raise PrecisionExhausted("LLL condition not certified at current precision")


def babai_nearest(b: Union[ApproxBasis, Sequence[Sequence]], t: Sequence, certify: bool = True) -> list[int]:
    """Nearest-plane coefficients of a lattice point close to t.

    ``b`` should be LLL-reduced.  ``t`` entries may be ints, Fractions or
    FixReal.  With an approximate basis the rounding decisions are checked
    against the error radius; an ambiguous rounding raises
    ``PrecisionExhausted``.
    """
    if isinstance(b, ApproxBasis):
        rows = [[Fraction(x, 1 << b.q0) for x in r] for r in b.mant]
        err = Fraction(1, 1 << b.err_q) if b.err_q >= 0 else Fraction(1 << -b.err_q)
    else:
        rows = [[Fraction(x) for x in r] for r in b]
        err = Fraction(0)
    tv = []
    for x in t:
        if isinstance(x, FixReal):
            tv.append(x.center())
            err = max(err, x.radius())
        else:
            tv.append(Fraction(x))
    bs, _, norms = gram_schmidt(rows)
    n = len(rows)
    coeffs = [0] * n
    cur = tv[:]
    tnorm = math.sqrt(float(sum(x * x for x in tv))) + 1.0
    for j in range(n - 1, -1, -1):
        c = sum(x * y for x, y in zip(cur, bs[j])) / norms[j]
        r = _round_frac(c)
        if certify and err:
            frac = abs(c - r)
            bnorm = math.sqrt(float(norms[j]))
            slack = Fraction(1, 2) - frac
            wig = Fraction(len(tv) * 4 * (n + 1)) * err * Fraction(tnorm + 1) / Fraction(max(bnorm, 1e-300))
            if slack < wig:
                raise PrecisionExhausted("Babai rounding not certified")
        coeffs[j] = r
        if r:
            cur = [x - r * y for x, y in zip(cur, rows[j])]
    return coeffs


# ---------------------------------------------------------------------------
# Basis from approximate generators
# ---------------------------------------------------------------------------

def bk_required_q(k: int, m: int, r: int, q0_minus_q: int, alpha: float, mu: float, det: float) -> int:
    """Smallest q meeting 2**q > (sqrt(mk)+1) lam 2**((k-1)/2) / mu."""
    log_lam = math.log2(k * math.sqrt(m) * 2.0 ** q0_minus_q + math.sqrt(k)) + r * math.log2(alpha) - math.log2(det)
    rhs = math.log2(math.sqrt(m * k) + 1) + log_lam + (k - 1) / 2 - math.log2(mu)
    return max(1, math.floor(rhs) + 1)


def bk_norm_bound(k: int, m: int, q0_minus_q: int, lam_j: float) -> float:
    """Upper bound on |b_j| returned by the reduction of approximate generators."""
    return (math.sqrt(k * m) + 1) * 2.0 ** ((k - 1) / 2 + 1 + q0_minus_q) * lam_j


def _upper_float(x) -> float:
    if isinstance(x, FixReal):
        return float(x.upper())
    return float(x)


def _lower_float(x) -> float:
    if isinstance(x, FixReal):
        return float(x.lower())
    return float(x)


def _reduce_mod_relations(m: list[int], relations: IntMatrix) -> list[int]:
    c = babai_nearest(relations, m, certify=False)
    if not any(c):
        return m
    shift = [sum(ci * r[j] for ci, r in zip(c, relations)) for j in range(len(m))]
    return [x - y for x, y in zip(m, shift)]


def basis_from_approx_generators(a: ApproxBasis, alpha_bound, mu_bound, det_bound,
                                 delta: Fraction = DEFAULT_DELTA) -> tuple[IntMatrix, ApproxBasis]:
    """Relations and a reduced basis of the lattice spanned by approximate vectors.

    ``alpha_bound`` bounds the generator lengths from above, ``mu_bound``
    bounds the first minimum from below and ``det_bound`` bounds the lattice
    determinant from below.  The returned basis carries ``transform``, the
    integer coefficients of each basis vector in terms of the generators.
    """
    k, m = a.k, a.m
    r = a.rank if a.rank is not None else min(k, m)
    alpha = max(_upper_float(alpha_bound), 1e-300)
    mu = _lower_float(mu_bound)
    det = _lower_float(det_bound)
    if mu <= 0 or det <= 0:
        raise ValueError("mu_bound and det_bound must be positive")
    q = a.err_q
    need = bk_required_q(k, m, r, a.q0 - q, alpha, mu, det)
    if q < need:
        raise PrecisionInsufficient(need)
    ext = [[int(i == j) for j in range(k)] + list(a.mant[i]) for i in range(k)]
    red, _ = lll_int(ext, delta)
    coeff_rows = [row[:k] for row in red]
    # a non-relation row with coefficients c has |c| + |c M| >= mu 2**q0 / (1 + sqrt(k m)) even
    # when noise amplified by a large c cancels most of the mantissa, so test the whole row
    thresh_sq = Fraction(mu) ** 2 * Fraction(4) ** a.q0 / (1 + math.isqrt(k * m) + 1) ** 2
    n_rel = 0
    for row in red:
        if sum(x * x for x in row) < thresh_sq:
            n_rel += 1
        else:
            break
    if a.rank is not None and n_rel != k - r:
        raise PrecisionInsufficient(q + 16, "relation count does not match the claimed rank")
    r = k - n_rel
    relations = coeff_rows[:n_rel]
    gens = coeff_rows[n_rel:]
    if relations:
        # relations are exact, so coefficient vectors may be reduced modulo
        # them; this keeps the error factor l1(m) small
        relations, _ = lll_int(relations, delta)
        gens = [_reduce_mod_relations(g, relations) for g in gens]
    first = combine(ApproxBasis(a.mant, a.q0, a.err_q, r), gens)
    if r == 0:
        first.transform = []
        return relations, first
    # second pass on the rank-r lattice, after re-checking the precondition
    alpha2 = max(float(Fraction(math.isqrt(sum(x * x for x in row)) + 1, 1 << first.q0)) for row in first.mant)
    alpha2 += 2.0 ** -first.err_q
    need2 = bk_required_q(r, m, r, first.q0 - first.err_q, alpha2, mu, det)
    if first.err_q < need2:
        raise PrecisionInsufficient(q + (need2 - first.err_q) + 1)
    exact_rows = [[sum(c * a.mant[l][j] for l, c in enumerate(g)) for j in range(m)] for g in gens]
    _, u2 = lll_int(exact_rows, delta)
    total = matmul(u2, gens)
    out = combine(ApproxBasis(a.mant, a.q0, a.err_q, r), total)
    out.transform = total
    return relations, out


def exhaustive_minima(basis: Sequence[Sequence[float]], box: int = 6) -> list[float]:
    """Successive minima by brute force over a coefficient box (small ranks only)."""
    import itertools
    import numpy as np

    b = np.array(basis, dtype=float)
    r = b.shape[0]
    vecs = []
    for c in itertools.product(range(-box, box + 1), repeat=r):
        if any(c):
            v = np.array(c) @ b
            vecs.append((float(np.linalg.norm(v)), v))
    vecs.sort(key=lambda t: t[0])
    chosen: list = []
    mins = []
    for nrm, v in vecs:
        trial = np.array(chosen + [v])
        if np.linalg.matrix_rank(trial, tol=1e-9 * max(1.0, nrm)) > len(chosen):
            chosen.append(v)
            mins.append(nrm)
            if len(chosen) == r:
                break
    return mins
