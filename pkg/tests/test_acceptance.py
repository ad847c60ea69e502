"""Acceptance criteria, one test per criterion.

Each criterion is a plain function returning (passed, detail) so the file
can also be run directly: ``python3 tests/test_acceptance.py [numbers]``.
Under pytest the outcome of every criterion is collected and printed as one
line per criterion in the terminal summary.
"""

from __future__ import annotations

import math
import os
import random
import sys
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy

sys.path.insert(0, os.path.dirname(__file__))

from conftest import ACCEPTANCE, order_of  # noqa: E402
from forms_oracle import class_group_invariants, compose, fundamental_discriminants, reduce_form  # noqa: E402
from oracles import brute_minima, naive_hnf, naive_snf_diagonal, series_expm_mp  # noqa: E402
from sunitkit.apps import (NotPrincipal, arch_data, class_group, compact_rep_of, gamma_bit_bound, pip,  # noqa: E402
                           quadratic_order)
from sunitkit.bigfix import FixComplex, FixReal, fx  # noqa: E402
from sunitkit.elattice import (diag_exp, diag_of, eideal_mul, embed_ideal, ep_mul, fix_matmul,  # noqa: E402
                               matrix_distance_near, normalise_norm)
from sunitkit.ideals import FracIdeal, minkowski_bound, parse_ideal, prime_decompose, valuation  # noqa: E402
from sunitkit.intlinalg import (ApproxBasis, basis_from_approx_generators, bk_norm_bound, hnf,  # noqa: E402
                                is_unimodular, matmul, snf)
from sunitkit.numfield import FieldElement  # noqa: E402
from sunitkit.oracle import ControlPoint, OracleParams, eval_oracle_auto, to_control  # noqa: E402
from sunitkit.qsim import (GaussParams, HspParams, hsp_scan, lattice_lambda1 as float_lambda1,  # noqa: E402
                           realize, rm_oracle_params, width_threshold)
from sunitkit.elattice import unit_eideal  # noqa: E402
from sunitkit.sunits import (enumerate_sunits, expand_product, lattice_lambda1, lattice_volume,  # noqa: E402
                             promise_bounds)

TEST_FIELDS = ["gauss", "zsqrt2", "zsqrtm5", "zm23"]

# S for the per-field checks, as rational primes
FIELD_S = {
    "gauss": [2, 5],
    "zsqrt2": [7],
    "zsqrtm5": [2, 3],
    "zm23": [2, 3],
    "cubic": [2, 5],
}


def s_set(name):
    order = order_of(name)
    return [P for p in FIELD_S[name] for P in prime_decompose(p, order)]


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (ok, detail)
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)


def random_element(order, rng, height):
    while True:
        x = FieldElement.make(order, [rng.randint(-height, height) for _ in range(order.n)])
        if not x.is_zero():
            return x


# ---------------------------------------------------------------------------
# 1. class groups of imaginary quadratic fields against binary forms
# ---------------------------------------------------------------------------

def criterion_1(bound: int = 5000, time_limit: float = 600.0):
    t0 = time.time()
    discs = fundamental_discriminants(bound)
    bad = []
    for d in discs:
        order = quadratic_order(d)
        cg = class_group(order, prime_bound_override=minkowski_bound(order))
        if tuple(cg.invariants) != class_group_invariants(d):
            bad.append(d)
    dt = time.time() - t0
    ok = not bad and dt <= time_limit
    return ok, f"{len(discs)} discriminants, {len(bad)} mismatches {bad[:5]}, {dt:.1f} s (limit {time_limit:.0f} s)"


# ---------------------------------------------------------------------------
# 2. principal ideal problem
# ---------------------------------------------------------------------------

def _ideal_form(order, P):
    """Binary form of a degree-one prime <p, w - r> of a quadratic order x^2 + s x + t."""
    _, s, t = order.field.poly_high_first
    p = P.p
    for r in range(p):
        if (r * r + s * r + t) % p == 0 and parse_ideal(order, f"gens:{p},w-{r}") == P.ideal:
            return reduce_form((p, 2 * r + s, (r * r + s * r + t) // p))
    raise AssertionError("no form for prime")


def non_principal_ideals(count: int = 20):
    """Ideals whose class is nontrivial according to binary-form composition alone."""
    out = []
    for name, disc in (("zsqrtm5", -20), ("zm23", -23)):
        order = order_of(name)
        identity = reduce_form((1, disc % 2, (disc % 2 - disc) // 4))
        primes = [P for p in sympy.primerange(2, 60) for P in prime_decompose(p, order) if P.f == 1]
        forms = [(P, _ideal_form(order, P)) for P in primes]
        for P, f in forms:
            if f != identity:
                out.append((name, P.ideal))
        for (P, f), (Q, g) in zip(forms, forms[1:]):
            if compose(f, g) != identity:
                out.append((name, P.ideal * Q.ideal))
    rng = random.Random(5)
    rng.shuffle(out)
    return out[:count]


def criterion_2(per_field: int = 100, height: int = 20):
    rng = random.Random(2)
    errors = []
    done = 0
    for name in TEST_FIELDS:
        order = order_of(name)
        for i in range(per_field):
            x = random_element(order, rng, height)
            a = FracIdeal.principal(x)
            try:
                g = pip(order, a, seed=i)
                if FracIdeal.principal(g) != a:
                    errors.append((name, str(x), "wrong generator"))
            except Exception as e:  # every failure counts as an error
                errors.append((name, str(x), repr(e)))
            done += 1
    nonp = non_principal_ideals(20)
    wrong = 0
    for name, a in nonp:
        try:
            pip(order_of(name), a)
            wrong += 1
        except NotPrincipal:
            pass
    ok = not errors and wrong == 0 and len(nonp) == 20
    return ok, (f"{done} principal ideals, {len(errors)} errors {errors[:3]}; "
                f"{len(nonp)} non-principal, {wrong} misreported")


# ---------------------------------------------------------------------------
# 3. E-ideal multiplication accuracy
# ---------------------------------------------------------------------------

def _normalised_principal(x, q):
    a = FracIdeal.principal(x)
    return normalise_norm(embed_ideal(a, q + 16), a.norm(), q)


def criterion_3(pairs: int = 200, height: int = 20):
    rng = random.Random(3)
    lines = []
    ok = True
    for q in (64, 128, 256):
        worst = 0.0
        failures = 0
        for k in range(pairs):
            order = order_of(TEST_FIELDS[k % len(TEST_FIELDS)])
            x, y = random_element(order, rng, height), random_element(order, rng, height)
            prod = eideal_mul(_normalised_principal(x, q), _normalised_principal(y, q))
            ref = _normalised_principal(x * y, q)
            d = matrix_distance_near(prod, ref)
            val = math.inf if d is None else float(d.upper())
            worst = max(worst, val)
            failures += val > 2.0 ** (-q / 2)
        ok &= failures == 0
        lines.append(f"q={q}: worst {worst:.2e} vs {2.0 ** (-q / 2):.2e}, {failures} over")
    return ok, f"{pairs} pairs per precision; " + "; ".join(lines)


# ---------------------------------------------------------------------------
# 4. basis from approximate generators
# ---------------------------------------------------------------------------

def _random_lattice(rng):
    rank = rng.randint(1, 4)
    while True:
        basis = [[rng.randint(-6, 6) for _ in range(rank)] for _ in range(rank)]
        if abs(round(np.linalg.det(np.array(basis, dtype=float)))) >= 1:
            break
    k = rng.randint(rank, 8)
    gens = [list(r) for r in basis]
    while len(gens) < k:
        c = [rng.randint(-2, 2) for _ in range(rank)]
        gens.append([sum(ci * b[j] for ci, b in zip(c, basis)) for j in range(rank)])
    rng.shuffle(gens)
    return basis, gens


def criterion_4(count: int = 50, q: int = 128):
    rng = random.Random(4)
    hnf_ok = 0
    bound_ok = 0
    for _ in range(count):
        basis, gens = _random_lattice(rng)
        k, m = len(gens), len(gens[0])
        mant = [[x * (1 << q) + rng.randint(-1, 1) for x in row] for row in gens]  # noise within 2**-q
        ab = ApproxBasis(mant, q, q, m)
        lam = brute_minima(basis, box=4)
        alpha = max(math.sqrt(sum(x * x for x in r)) for r in gens) + 1e-9
        det = abs(float(np.linalg.det(np.array(basis, dtype=float))))
        _, out = basis_from_approx_generators(ab, alpha, lam[0] * 0.999, det * 0.999)
        rounded = [[round(x) for x in r] for r in out.to_float()]
        if naive_hnf(rounded) == naive_hnf(gens):
            hnf_ok += 1
        norms = [math.sqrt(sum(x * x for x in r)) for r in out.to_float()]
        if all(nb <= bk_norm_bound(k, m, ab.q0 - ab.err_q, lam[j]) for j, nb in enumerate(norms)):
            bound_ok += 1
    return hnf_ok == count and bound_ok == count, f"{hnf_ok}/{count} HNF match, {bound_ok}/{count} within norm bound"


# ---------------------------------------------------------------------------
# 5. oracle periodicity
# ---------------------------------------------------------------------------

def _random_point(order, s, rng):
    n1, n2 = order.signature
    u = tuple(Fraction(rng.randint(-2000, 2000), 1000) for _ in range(n1 + n2 - 1))
    mu = tuple(rng.randint(0, 1) for _ in range(n1))
    theta = tuple(Fraction(rng.randint(0, 999), 1000) for _ in range(n2))
    v = tuple(rng.randint(-3, 3) for _ in range(s))
    return ControlPoint(u, mu, theta, v)


def criterion_5(points: int = 20, q: int = 128, fields=("gauss", "zsqrt2", "zsqrtm5", "zm23", "cubic")):
    rng = random.Random(5)
    tol = 2.0 ** (-q / 4)
    worst = 0.0
    checks = 0
    failures = 0
    for name in fields:
        order = order_of(name)
        S = s_set(name)
        group = enumerate_sunits(order, S)
        shifts = [to_control(g, S, q + 32) for g in [group.torsion] + [x.element for x in group.free_gens]]
        params = OracleParams(order, S, q)
        for _ in range(points):
            x = _random_point(order, len(S), rng)
            base = eval_oracle_auto(x, params)
            for c in shifts:
                d = matrix_distance_near(eval_oracle_auto(x + c, params), base)
                val = math.inf if d is None else float(d.upper())
                worst = max(worst, val)
                failures += val > tol
                checks += 1
    return failures == 0, f"{checks} shifts over {len(fields)} fields at q={q}: worst {worst:.2e} (tolerance {tol:.2e})"


# ---------------------------------------------------------------------------
# 6 and 7. pseudoinjectivity and Lipschitz scans in Z[i]
# ---------------------------------------------------------------------------

_SCAN: dict = {}


def gauss_scan(samples: int = 200, width: float = 290.0, nu: float = 0.05) -> HspParams:
    key = (samples, width, nu)
    if key not in _SCAN:
        order = order_of("gauss")
        S = prime_decompose(2, order)
        group = enumerate_sunits(order, S)
        units = [to_control(g, S, 64) for g in [group.torsion] + [x.element for x in group.free_gens]]
        _SCAN[key] = hsp_scan(order, S, units, samples, GaussParams(width, nu), q=64, seed=6)
    return _SCAN[key]


def criterion_6(samples: int = 200, width: float = 290.0):
    order = order_of("gauss")
    basis = realize(unit_eideal(order, 64))
    threshold = width_threshold(order.n, abs(float(np.linalg.det(basis))), float_lambda1(basis))
    res = gauss_scan(samples, width).report
    r = math.pi / (2 * abs(order.discriminant))
    ok = (width >= threshold and res["pairs_far"] == samples and res["pseudoinjectivity_failures"] == 0
          and abs(res["r"] - r) < 1e-15)
    return ok, (f"s={width} (threshold {threshold:.1f}), {res['pairs_far']} pairs at d >= {r:.4f}: "
                f"max overlap {res['max_overlap']:.4f}, {res['pseudoinjectivity_failures']} above 0.77")


def criterion_7(samples: int = 200, width: float = 290.0):
    out = gauss_scan(samples, width)
    ok = math.isfinite(out.a) and out.a > 0 and out.report["straddle_violations"] == 0
    return ok, f"max ratio |state diff|/d = {out.a:.4g}; straddle bound violations {out.report['straddle_violations']}"


# ---------------------------------------------------------------------------
# 8. compact representation
# ---------------------------------------------------------------------------

def _random_sunits(name, count, rng):
    order = order_of(name)
    S = s_set(name)
    group = enumerate_sunits(order, S)
    gens = [group.torsion] + [g.element for g in group.free_gens]
    out = []
    if name == "zsqrt2":
        eps = order.parse_element("1+w")
        out += [eps ** k for k in (1, 2, 5, 8, 13, 16)]
    while len(out) < count:
        exps = [rng.randint(-6, 6) for _ in gens]
        if not any(exps[1:]):
            continue
        out.append(expand_product([(order.parse_element("1"), 1)] + list(zip(gens, exps))))
    return order, S, out


def _logs_enclose(rep, alpha, q: int = 100) -> bool:
    """sum_k l**k log|sigma(gamma_k)| encloses log|sigma(alpha)| at 2**-q, without expanding."""
    want = arch_data(alpha, q).logs
    acc = [FixReal.exact(0)] * len(want)
    for k, g in enumerate(rep.gammas):
        acc = [a + lg * (rep.l ** k) for a, lg in zip(acc, arch_data(g, q + 16 + 2 * k).logs)]
    return all(a.intersects(w) and float(abs(a - w).upper()) <= 2.0 ** -q * (2 ** (len(rep.gammas) + 2))
               for a, w in zip(acc, want))


def criterion_8(per_field: int = 20):
    rng = random.Random(8)
    total = 0
    bad = []
    worst_ratio = 0.0
    for name in TEST_FIELDS:
        order, S, alphas = _random_sunits(name, per_field, rng)
        for i, alpha in enumerate(alphas):
            l = 2 if i % 2 == 0 else 3
            rep = compact_rep_of(alpha, S, l=l, q=128)
            bound = gamma_bit_bound(order, S, l)
            worst_ratio = max(worst_ratio, rep.max_bits() / bound)
            ok = (rep.valuations(S) == [valuation(alpha, P) for P in S] and _logs_enclose(rep, alpha)
                  and rep.max_bits() <= bound and rep.expand() == alpha)
            total += 1
            if not ok:
                bad.append((name, i))
    return not bad, f"{total} S-units, {len(bad)} failures {bad[:3]}; largest gamma uses {worst_ratio:.1%} of the bit bound"


# ---------------------------------------------------------------------------
# 9. diag algebra
# ---------------------------------------------------------------------------

def _dyadic(rng, bits=20, scale=2):
    return FixReal.exact(Fraction(rng.randint(-scale << bits, scale << bits), 1 << bits))


def _random_epoint(rng, n1, n2):
    return [_dyadic(rng) for _ in range(n1)] + [FixComplex(_dyadic(rng), _dyadic(rng)) for _ in range(n2)]


def _exact_equal(m1, m2) -> bool:
    return all(a.is_exact and b.is_exact and a.center() == b.center()
               for r1, r2 in zip(m1, m2) for a, b in zip(r1, r2))


def criterion_9(count: int = 100, q: int = 100):
    rng = random.Random(9)
    add_ok = mul_ok = exp_ok = 0
    worst = 0.0
    for i in range(count):
        n1, n2 = [(1, 1), (2, 1), (0, 2), (3, 0)][i % 4]
        x, y = _random_epoint(rng, n1, n2), _random_epoint(rng, n1, n2)
        dx, dy = diag_of(x), diag_of(y)
        add_ok += _exact_equal(diag_of([a + b for a, b in zip(x, y)]),
                               [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(dx, dy)])
        mul_ok += _exact_equal(diag_of(ep_mul(x, y)), fix_matmul(dx, dy))
        got = diag_exp(x, q)
        with mpmath.workdps(60):
            ref = series_expm_mp([[mpmath.mpf(e.center().numerator) / e.center().denominator for e in row]
                                  for row in dx])
            good = True
            for a in range(len(got)):
                for b in range(len(got)):
                    c = got[a][b].center()
                    diff = abs(mpmath.mpf(c.numerator) / c.denominator - ref[a, b])
                    rad = mpmath.mpf(got[a][b].radius().numerator) / got[a][b].radius().denominator
                    good &= diff <= rad
                    worst = max(worst, float(diff))
        exp_ok += good
    ok = add_ok == mul_ok == exp_ok == count
    return ok, (f"{count} points: additivity {add_ok}, multiplicativity {mul_ok} exact; "
                f"exponential enclosed {exp_ok} (largest deviation {worst:.1e})")


# ---------------------------------------------------------------------------
# 10. promise bounds and the R^l extension
# ---------------------------------------------------------------------------

# (a, r, l, nu, lambda_grid) -> (a', r'), computed independently with mpmath at 30 digits
RM_CASES = [
    ((2.0, 0.3, 1, 0.05, 1.0), (33.047297699208354, 0.31622776601683793)),
    ((1610.0, 0.3927, 2, 0.05, 0.5), (1612.7011474795201, 0.39901540070528606)),
    ((10.0, 1.0, 3, 0.1, 2.0), (17.997684569124852, 1.2165525060596439)),
    ((0.5, 0.1, 1, 0.01, 0.25), (634.60191299904713, 0.10012492197250393)),
    ((100.0, 0.05, 4, 0.2, 3.0), (100.19719765344916, 2.4005207768315608)),
]


def criterion_10():
    rows = []
    ok = True
    for name in FIELD_S:
        order = order_of(name)
        S = s_set(name)
        group = enumerate_sunits(order, S)
        pb = promise_bounds(order, S)
        lam = lattice_lambda1(group)["mixed"]
        vol = lattice_volume(group)
        good = lam >= pb.lambda1_lower and vol <= pb.vol_upper
        ok &= good
        rows.append(f"{name}: lambda1 {lam:.3g} >= {pb.lambda1_lower:.3g}, vol {vol:.3g} <= {pb.vol_upper:.3g}")
    rm_ok = 0
    for (a, r, l, nu, lam), (a_ref, r_ref) in RM_CASES:
        out = rm_oracle_params(HspParams(a, r, 0.75), l, nu, lam)
        rm_ok += math.isclose(out.a, a_ref, rel_tol=1e-12) and math.isclose(out.r, r_ref, rel_tol=1e-12)
    ok &= rm_ok == len(RM_CASES)
    return ok, "; ".join(rows) + f"; rm_oracle_params {rm_ok}/{len(RM_CASES)}"


# ---------------------------------------------------------------------------
# 11. HNF and SNF
# ---------------------------------------------------------------------------

def criterion_11(count: int = 200):
    rng = random.Random(11)
    h_ok = s_ok = 0
    for _ in range(count):
        m = [[rng.randint(-10, 10) for _ in range(5)] for _ in range(5)]
        h, u = hnf(m)
        h_ok += [r for r in h if any(r)] == naive_hnf(m) and matmul(u, m) == h and is_unimodular(u)
        d, u, v = snf(m)
        diag = [d[i][i] for i in range(5) if d[i][i]]
        s_ok += (diag == naive_snf_diagonal(m) and matmul(matmul(u, m), v) == d
                 and is_unimodular(u) and is_unimodular(v))
    return h_ok == s_ok == count, f"{count} matrices: HNF {h_ok}, SNF {s_ok} agree with the elimination oracle"


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, detail = CRITERIA[number]()
    record(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    chosen = [int(a) for a in sys.argv[1:]] or sorted(CRITERIA)
    for k in chosen:
        t = time.time()
        ok, detail = CRITERIA[k]()
        record(k, ok, f"{detail} [{time.time() - t:.1f} s]")
