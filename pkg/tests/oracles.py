"""Reference computations used as independent oracles by the tests.

None of these call into sunitkit.  They favour obviously-correct brute
force over speed: naive row reduction, determinantal divisors, continued
fractions, exhaustive lattice search and mpmath at high precision.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import reduce

import mpmath
import numpy as np
import sympy


# ---------------------------------------------------------------------------
# integer matrices
# ---------------------------------------------------------------------------

def naive_hnf(rows):
    """Row-style upper triangular HNF by repeated Euclid steps; zero rows dropped."""
    m = [list(map(int, r)) for r in rows]
    if not m:
        return []
    ncols = len(m[0])
    out = []
    pivot_row = 0
    for col in range(ncols):
        # bring the column gcd into row pivot_row
        while True:
            nz = [i for i in range(pivot_row, len(m)) if m[i][col] != 0]
            if not nz:
                break
            i_min = min(nz, key=lambda i: abs(m[i][col]))
            m[pivot_row], m[i_min] = m[i_min], m[pivot_row]
            done = True
            for i in range(pivot_row + 1, len(m)):
                if m[i][col]:
                    f = m[i][col] // m[pivot_row][col]
                    m[i] = [a - f * b for a, b in zip(m[i], m[pivot_row])]
                    if m[i][col]:
                        done = False
            if done:
                break
        if pivot_row < len(m) and m[pivot_row][col] != 0:
            if m[pivot_row][col] < 0:
                m[pivot_row] = [-a for a in m[pivot_row]]
            p = m[pivot_row][col]
            for i in range(pivot_row):
                f = m[i][col] // p
                m[i] = [a - f * b for a, b in zip(m[i], m[pivot_row])]
            pivot_row += 1
    out = [r for r in m if any(r)]
    return out


def determinantal_invariants(rows):
    """Invariant factors d_k = D_k / D_{k-1} with D_k the gcd of k x k minors."""
    mat = sympy.Matrix(rows)
    r, c = mat.shape
    divisors = [1]
    for k in range(1, min(r, c) + 1):
        g = 0
        for ri in itertools.combinations(range(r), k):
            for ci in itertools.combinations(range(c), k):
                g = math.gcd(g, int(mat.extract(list(ri), list(ci)).det()))
                if g == 1:
                    break
            if g == 1:
                break
        if g == 0:
            break
        divisors.append(g)
    return [divisors[k] // divisors[k - 1] for k in range(1, len(divisors))]


def naive_snf_diagonal(rows):
    """Smith diagonal by plain row and column elimination (no transforms kept)."""
    m = [list(map(int, r)) for r in rows]
    nr, nc = len(m), len(m[0]) if m else 0
    diag = []
    t = 0
    while t < min(nr, nc):
        nz = [(abs(m[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if m[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        m[t], m[i] = m[i], m[t]
        for row in m:
            row[t], row[j] = row[j], row[t]
        p = m[t][t]
        dirty = False
        for i in range(t + 1, nr):
            f = m[i][t] // p
            m[i] = [a - f * b for a, b in zip(m[i], m[t])]
            dirty |= m[i][t] != 0
        for j in range(t + 1, nc):
            f = m[t][j] // p
            for row in m:
                row[j] -= f * row[t]
            dirty |= m[t][j] != 0
        if dirty:
            continue
        # the pivot must divide the rest of the block; otherwise fold a row in
        bad = [i for i in range(t + 1, nr) for j in range(t + 1, nc) if m[i][j] % p]
        if bad:
            m[t] = [a + b for a, b in zip(m[t], m[bad[0]])]
            continue
        diag.append(abs(p))
        t += 1
    return diag


def exact_det(rows):
    return int(sympy.Matrix(rows).det())


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------

def brute_minima(basis, box=5):
    """Successive minima by scanning integer combinations in a box."""
    b = np.array(basis, dtype=float)
    r = b.shape[0]
    cands = []
    for c in itertools.product(range(-box, box + 1), repeat=r):
        if any(c):
            v = np.array(c, dtype=float) @ b
            cands.append((float(np.linalg.norm(v)), v))
    cands.sort(key=lambda t: t[0])
    chosen, mins = [], []
    for nrm, v in cands:
        if np.linalg.matrix_rank(np.array(chosen + [v]), tol=1e-9 * max(1.0, nrm)) > len(chosen):
            chosen.append(v)
            mins.append(nrm)
            if len(chosen) == r:
                break
    return mins


def brute_cvp(basis, target, box=6):
    b = np.array(basis, dtype=float)
    t = np.array(target, dtype=float)
    best = math.inf
    for c in itertools.product(range(-box, box + 1), repeat=b.shape[0]):
        best = min(best, float(np.linalg.norm(np.array(c) @ b - t)))
    return best


# ---------------------------------------------------------------------------
# number theory
# ---------------------------------------------------------------------------

def pell_fundamental_unit(d: int):
    """Smallest x + y sqrt(d) > 1 with x^2 - d y^2 = +-1 (continued fraction of sqrt d)."""
    a0 = math.isqrt(d)
    m, den, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    while p * p - d * q * q not in (1, -1):
        m = den * a - m
        den = (d - m * m) // den
        a = (a0 + m) // den
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q


def resultant_norm(power_coeffs, poly_high_first):
    """N(sum c_k theta^k) as Res(f, g) for monic f."""
    x = sympy.Symbol("x")
    f = sympy.Poly(poly_high_first, x)
    g = sympy.Poly(list(reversed([sympy.Rational(str(c)) for c in power_coeffs])) or [0], x)
    return sympy.Rational(sympy.resultant(f.as_expr(), g.as_expr(), x))


def poly_disc(poly_high_first):
    x = sympy.Symbol("x")
    return int(sympy.discriminant(sympy.Poly(poly_high_first, x)))


def mp_exp(x, dps=60):
    with mpmath.workdps(dps):
        return mpmath.exp(mpmath.mpf(x))


def mp_log(x, dps=60):
    with mpmath.workdps(dps):
        return mpmath.log(mpmath.mpf(x))


def series_expm(m, terms=60):
    """Truncated exponential series sum A^k/k! with mpmath matrices."""
    with mpmath.workdps(50):
        a = mpmath.matrix(m)
        acc = mpmath.eye(a.rows)
        term = mpmath.eye(a.rows)
        for k in range(1, terms):
            term = term * a / k
            acc += term
        return [[float(acc[i, j]) for j in range(a.cols)] for i in range(a.rows)]


def series_expm_mp(m, dps=60, terms=160):
    """Like series_expm but returns an mpmath matrix at the working precision."""
    with mpmath.workdps(dps):
        a = mpmath.matrix(m)
        acc = mpmath.eye(a.rows)
        term = mpmath.eye(a.rows)
        for k in range(1, terms):
            term = term * a / k
            acc += term
        return acc


def product(xs):
    return reduce(lambda a, b: a * b, xs, 1)


def dyadic_contains(lo: Fraction, hi: Fraction, value) -> bool:
    return lo <= Fraction(value) <= hi
