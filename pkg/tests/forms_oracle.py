"""Independent class-group oracle for imaginary quadratic discriminants.

Uses reduced positive definite binary quadratic forms (a, b, c) with
b^2 - 4ac = D, Gauss composition, and reads the abelian invariants off the
number of elements killed by each prime power.  Nothing here touches the
ideal or lattice code of the package.
"""

from __future__ import annotations

import math
from functools import lru_cache

from sympy import factorint


def is_fundamental(d: int) -> bool:
    if d >= 0 or d == 1:
        return False
    if d % 4 == 1:
        return all(e == 1 for e in factorint(-d).values())
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and all(e == 1 for e in factorint(-m).values())
    return False


def fundamental_discriminants(bound: int) -> list[int]:
    return [d for d in range(-3, -bound - 1, -1) if is_fundamental(d)]


def reduce_form(f):
    a, b, c = f
    while True:
        if -a < b <= a:
            pass
        else:
            # shift b into (-a, a]
            k = (a - b) // (2 * a)
            b, c = b + 2 * k * a, a * k * k + b * k + c
            continue
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return a, b, c


def reduced_forms(d: int) -> list[tuple[int, int, int]]:
    out = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append((a, b, c))
        a += 1
    return out


def compose(f, g):
    """Dirichlet composition followed by reduction."""
    a1, b1, c1 = f
    a2, b2, c2 = g
    d = b1 * b1 - 4 * a1 * c1
    beta = (b1 + b2) // 2
    e, x, y = _ext_gcd(a1, a2)
    e2, u, v = _ext_gcd(e, beta)
    # u (x a1 + y a2) + v beta = e2
    a3 = a1 * a2 // (e2 * e2)
    b3 = (b2 + 2 * a2 // e2 * (u * y * (b1 - b2) // 2 - v * c2)) % (2 * a3)
    c3 = (b3 * b3 - d) // (4 * a3)
    return reduce_form((a3, b3, c3))


def _ext_gcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def _power(f, k, identity):
    result, base = identity, f
    while k:
        if k & 1:
            result = compose(result, base)
        base = compose(base, base)
        k >>= 1
    return result


@lru_cache(maxsize=None)
def class_group_invariants(d: int) -> tuple[int, ...]:
    """Invariant factors (d1 | d2 | ...) of the form class group, 1's dropped."""
    forms = reduced_forms(d)
    h = len(forms)
    identity = reduce_form((1, d % 2, (d % 2 - d) // 4))
    elementary: dict[int, list[int]] = {}
    for p, e in factorint(h).items():
        # |G[p^k]| = p^(sum_i min(k, e_i)); successive differences give the multiplicities
        counts = [sum(1 for f in forms if _power(f, p ** k, identity) == identity) for k in range(e + 1)]
        logs = [round(math.log(c, p)) for c in counts]
        ranks = [logs[k] - logs[k - 1] for k in range(1, e + 1)]  # number of e_i >= k
        exps = []
        for k in range(1, e + 1):
            nxt = ranks[k] if k < e else 0
            exps += [k] * (ranks[k - 1] - nxt)
        elementary[p] = sorted(exps, reverse=True)
    width = max((len(v) for v in elementary.values()), default=0)
    out = [1] * width
    for p, exps in elementary.items():
        for i, k in enumerate(exps):
            out[i] *= p ** k
    return tuple(sorted(x for x in out if x > 1))
