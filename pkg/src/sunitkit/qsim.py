"""Classical simulation of the lattice-state encoding and the HSP property harness.

A lattice L in R^n is encoded as the superposition of straddle-encoded
points weighted by a Gaussian, truncated to a ball.  States are kept in
factored form (grid cell, in-cell offset, weight per lattice point) and
inner products are computed by the overlap kernel.
"""

from __future__ import annotations

import itertools
import math
import os
import random
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .elattice import EIdeal
from .intlinalg import hnf, lll_int
from .oracle import ControlPoint, OracleParams, eval_oracle_auto

try:
    if os.environ.get("SUNITKIT_KERNELS") == "python":
        raise ImportError("pure-Python kernels requested")
    from . import _kernels as _kern

    KERNEL_BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build
    from . import _kernels_py as _kern

    KERNEL_BACKEND = "python"

from . import _kernels_py

DEFAULT_BUDGET = 4_000_000


class EnumerationBudgetExceeded(RuntimeError):
    pass


class GridTooCoarse(ValueError):
    pass


def enumeration_budget() -> int:
    return int(os.environ.get("SUNITKIT_BUDGET", DEFAULT_BUDGET))


def kernels(backend: Optional[str] = None):
    if backend == "python":
        return _kernels_py
    return _kern


# ---------------------------------------------------------------------------
# straddle encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SparseState:
    """Explicit state: grid-index tuples mapped to amplitudes."""

    n: int
    amps: dict

    def inner(self, other: "SparseState") -> complex:
        small, big = (self, other) if len(self.amps) <= len(other.amps) else (other, self)
        s = sum(a.conjugate() * big.amps.get(k, 0) for k, a in small.amps.items())
        return s if small is self else s.conjugate()

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amps.values()))

    def distance(self, other: "SparseState") -> float:
        keys = set(self.amps) | set(other.amps)
        return math.sqrt(sum(abs(self.amps.get(k, 0) - other.amps.get(k, 0)) ** 2 for k in keys))


def _cell(x: float, nu: float) -> tuple[int, float]:
    y = x / nu
    k = math.floor(y)
    return k, y - k


def straddle(x: float, nu: float) -> SparseState:
    """cos(pi t/2)|k> + sin(pi t/2)|k+1> for x = (k + t) nu."""
    k, t = _cell(x, nu)
    if t == 0:
        return SparseState(1, {(k,): 1.0})
    return SparseState(1, {(k,): math.cos(math.pi / 2 * t), (k + 1,): math.sin(math.pi / 2 * t)})


def straddle_n(v: Sequence[float], nu: float) -> SparseState:
    amps = {(): 1.0}
    for x in v:
        one = straddle(x, nu).amps
        amps = {k + j: a * b for k, a in amps.items() for j, b in one.items()}
    return SparseState(len(v), amps)


def straddle_lipschitz_bound(n: int, nu: float) -> float:
    return math.pi * math.sqrt(n) / (2 * nu)


# ---------------------------------------------------------------------------
# Gaussian lattice states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussParams:
    s: float
    nu: float
    R: Optional[float] = None
    budget: Optional[int] = None

    def radius(self, n: int) -> float:
        return self.R if self.R is not None else math.sqrt(n) * self.s

    def max_points(self) -> int:
        return self.budget if self.budget is not None else enumeration_budget()


@dataclass
class LatticeState:
    """Factored Gaussian state: one (cell, offset, weight) triple per enumerated point."""

    n: int
    nu: float
    coeffs: np.ndarray
    points: np.ndarray
    cells: np.ndarray
    offsets: np.ndarray
    weights: np.ndarray
    dropped_mass: float = 0.0

    def __len__(self) -> int:
        return self.points.shape[0]

    def inner(self, other: "LatticeState", backend: Optional[str] = None) -> float:
        if abs(self.nu - other.nu) > 1e-15:
            raise ValueError("states on different grids")
        k = kernels(backend)
        return float(k.straddle_overlap(self.cells, self.offsets, self.weights,
                                        other.cells, other.offsets, other.weights))

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self), 0.0))

    def distance(self, other: "LatticeState") -> float:
        return math.sqrt(max(2.0 - 2.0 * self.inner(other), 0.0))

    def to_sparse(self) -> SparseState:
        amps: dict = {}
        for p, w in zip(self.points, self.weights):
            for k, a in straddle_n(p, self.nu).amps.items():
                amps[k] = amps.get(k, 0.0) + w * a
        return SparseState(self.n, amps)


def realize(e: EIdeal) -> np.ndarray:
    """Float basis of an E-ideal in R^n with the complex coordinates scaled by sqrt 2."""
    m = np.array(e.to_float(), dtype=np.float64)
    m[:, e.n1:] *= math.sqrt(2.0)
    return m


def _reduced(basis: np.ndarray) -> np.ndarray:
    scale = 2.0 ** 40
    ints = [[int(round(x * scale)) for x in row] for row in basis]
    _, u = lll_int(ints)
    return np.array(u, dtype=np.float64) @ basis


def gaussian_weight(points: np.ndarray, s: float) -> np.ndarray:
    return np.exp(-math.pi * np.einsum("ij,ij->i", points, points) / (s * s))


def lattice_lambda1(basis: np.ndarray) -> float:
    b = _reduced(np.asarray(basis, dtype=np.float64))
    r = float(np.min(np.linalg.norm(b, axis=1)))
    coeffs = _kern.enum_ball(b, r, 10 ** 6)
    pts = coeffs @ b
    norms = np.linalg.norm(pts, axis=1)
    norms = norms[norms > 1e-9]
    return float(norms.min()) if len(norms) else r


def gauss_state(lattice, p: GaussParams, backend: Optional[str] = None, check: bool = True) -> LatticeState:
    """Gaussian state of a lattice (EIdeal or float basis rows), truncated to the ball of radius R."""
    basis = realize(lattice) if isinstance(lattice, EIdeal) else np.atleast_2d(np.asarray(lattice, dtype=np.float64))
    n = basis.shape[1]
    if check:
        lam = lattice_lambda1(basis)
        if lam <= 2 * math.sqrt(n) * p.nu:
            raise GridTooCoarse(f"lambda_1 = {lam:.4g} <= 2 sqrt(n) nu = {2 * math.sqrt(n) * p.nu:.4g}")
    red = _reduced(basis)
    R = p.radius(n)
    k = kernels(backend)
    coeffs = k.enum_ball(red, R, p.max_points())
    if coeffs is None:
        raise EnumerationBudgetExceeded(f"more than {p.max_points()} candidate points in radius {R:.4g}")
    pts = coeffs.astype(np.float64) @ red
    w = gaussian_weight(pts, p.s)
    mass = float(np.sum(w * w))
    # D5: renormalise over the truncated support (truncation_mass measures the tail)
    w = w / math.sqrt(mass)
    scaled = pts / p.nu
    cells = np.floor(scaled).astype(np.int64)
    offs = scaled - cells
    return LatticeState(n, p.nu, coeffs, pts, cells, offs, w)


def truncation_mass(lattice, p: GaussParams, widen: float = 1.5) -> float:
    """Share of the squared Gaussian mass outside radius R, from a wider enumeration."""
    basis = realize(lattice) if isinstance(lattice, EIdeal) else np.asarray(lattice, dtype=np.float64)
    n = basis.shape[1]
    red = _reduced(basis)
    R = p.radius(n)
    coeffs = _kern.enum_ball(red, R * widen, p.max_points())
    if coeffs is None:
        raise EnumerationBudgetExceeded("widened enumeration over budget")
    pts = coeffs.astype(np.float64) @ red
    w2 = gaussian_weight(pts, p.s) ** 2
    inside = np.einsum("ij,ij->i", pts, pts) <= R * R
    total = float(w2.sum())
    return float(w2[~inside].sum()) / total


# ---------------------------------------------------------------------------
# intersecting sublattices
# ---------------------------------------------------------------------------

@dataclass
class OverlapReport:
    distance: Optional[float]
    overlap: float
    proper: bool
    pairs: int
    sublattice_hnf: list
    stretch: float = 0.0
    beta_bound: float = math.inf
    flags: dict = field(default_factory=dict)


def _ball(basis: np.ndarray, R: float, budget: int) -> tuple[np.ndarray, np.ndarray]:
    coeffs = _kern.enum_ball(basis, R, budget)
    if coeffs is None:
        raise EnumerationBudgetExceeded(f"ball of radius {R:.4g} over budget")
    return coeffs, coeffs.astype(np.float64) @ basis


def _close_pairs(a: np.ndarray, b: np.ndarray, delta: float) -> list[tuple[int, int]]:
    n = a.shape[1]
    cells = {}
    for j, row in enumerate(np.floor(b / delta).astype(np.int64)):
        cells.setdefault(tuple(row), []).append(j)
    out = []
    for i, row in enumerate(np.floor(a / delta).astype(np.int64)):
        for off in itertools.product((-1, 0, 1), repeat=n):
            for j in cells.get(tuple(int(r) + o for r, o in zip(row, off)), ()):
                if np.linalg.norm(a[i] - b[j]) <= delta:
                    out.append((i, j))
    return out


def intersecting_sublattice(L, Lp, delta: float, p: GaussParams) -> OverlapReport:
    """Sublattice of L generated by the points within delta of a point of L', inside radius R."""
    ba = realize(L) if isinstance(L, EIdeal) else np.asarray(L, dtype=np.float64)
    bb = realize(Lp) if isinstance(Lp, EIdeal) else np.asarray(Lp, dtype=np.float64)
    ra, rb = _reduced(ba), _reduced(bb)
    # coefficients relative to the reduced bases; map back to the given bases
    ua = np.rint(ra @ np.linalg.inv(ba)).astype(np.int64)
    n = ba.shape[1]
    R = p.radius(n)
    ca, pa = _ball(ra, R, p.max_points())
    cb, pb = _ball(rb, R, p.max_points())
    pairs = _close_pairs(pa, pb, delta)
    gens = [[int(x) for x in (ca[i] @ ua)] for i, _ in pairs if np.any(ca[i])]
    if gens:
        h, _ = hnf(gens)
        h = [row for row in h if any(row)]
    else:
        h = []
    proper = len(h) < n or abs(round(float(np.linalg.det(np.array(h, dtype=float))))) != 1
    stretch = 0.0
    xs = np.array([pa[i] for i, _ in pairs]) if pairs else np.zeros((0, n))
    ys = np.array([pb[j] for _, j in pairs]) if pairs else np.zeros((0, n))
    if len(pairs) >= n and np.linalg.matrix_rank(xs) == n:
        t, *_ = np.linalg.lstsq(xs, ys, rcond=None)
        stretch = float(np.linalg.norm(t - np.eye(n), 2))
    lam = min(lattice_lambda1(ba), lattice_lambda1(bb))
    beta = n * (math.sqrt(n) * R / lam) ** n * delta / R
    return OverlapReport(None, 0.0, proper, len(pairs), h, stretch, beta,
                         {"matched": len(pairs), "points_L": len(pa), "points_Lp": len(pb)})


# ---------------------------------------------------------------------------
# control-group geometry
# ---------------------------------------------------------------------------

def control_metric(order, S) -> np.ndarray:
    """Per-coordinate weights: u as is, sign bits as pi, phases in radians, valuations by log N(P)."""
    n1, n2 = order.signature
    w = [1.0] * (n1 + n2 - 1) + [math.pi] * n1 + [2 * math.pi] * n2 + [math.log(P.norm) for P in S]
    return np.array(w)


def control_vector(x: ControlPoint) -> list[Fraction]:
    return [Fraction(t) for t in x.u] + [Fraction(b) for b in x.mu] + list(x.theta) + [Fraction(v) for v in x.v]


class QuotientMetric:
    """Distance on G modulo the lattice spanned by known S-unit control points."""

    def __init__(self, order, S, unit_controls: Sequence[ControlPoint], denom_bits: int = 60):
        n1, n2 = order.signature
        k = n1 + n2 - 1
        dim = k + n1 + n2 + len(S)
        self.metric = control_metric(order, S)
        scale = 1 << denom_bits
        gens = []
        for c in unit_controls:
            gens.append([math.floor(x * scale + Fraction(1, 2)) for x in control_vector(c)])
        # the torsion of G itself: sign bits mod 2, phases mod 1
        for j in range(n1):
            row = [0] * dim
            row[k + j] = 2 * scale
            gens.append(row)
        for j in range(n2):
            row = [0] * dim
            row[k + n1 + j] = scale
            gens.append(row)
        h, _ = hnf(gens)
        h = [r for r in h if any(r)]
        if len(h) != dim:
            raise ValueError("known S-units do not span a full-rank lattice in G")
        # the HNF of the scaled generators is very skewed; reduce exactly before going to floats
        h, _ = lll_int(h)
        basis = np.array([[x / scale for x in r] for r in h], dtype=np.float64) * self.metric
        ints = [[int(round(x * 2 ** 30)) for x in r] for r in basis]
        _, u = lll_int(ints)
        self.basis = np.array(u, dtype=np.float64) @ basis
        self.inv = np.linalg.inv(self.basis)
        self.dim = dim

    def reduce(self, diff: np.ndarray) -> np.ndarray:
        c = np.rint(diff @ self.inv)
        best = diff - c @ self.basis
        bestn = np.linalg.norm(best)
        # search the surrounding box of three fundamental domains per direction
        for off in itertools.product((-1, 0, 1), repeat=self.dim):
            cand = best - np.array(off, dtype=np.float64) @ self.basis
            nn = np.linalg.norm(cand)
            if nn < bestn - 1e-15:
                best, bestn = cand, nn
        return best

    def distance(self, x: ControlPoint, y: ControlPoint) -> float:
        d = np.array([float(a - b) for a, b in zip(control_vector(x), control_vector(y))]) * self.metric
        return float(np.linalg.norm(self.reduce(d)))


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

@dataclass
class HspParams:
    a: float
    r: float
    eps: float
    lambda1_lower: Optional[float] = None
    volume_upper: Optional[float] = None
    report: dict = field(default_factory=dict)


def width_threshold(n: int, det: float, lam: float) -> float:
    """Minimal Gaussian width for the pseudoinjectivity argument."""
    return 4 * math.pi * n ** (n / 2 + 3) * det / lam ** (n - 1)


def _random_control(order, S, rng: random.Random, vmax: int = 2, umax: float = 2.0) -> ControlPoint:
    n1, n2 = order.signature
    q = 1 << 30
    u = tuple(Fraction(rng.randint(-int(umax * q), int(umax * q)), q) for _ in range(n1 + n2 - 1))
    mu = tuple(rng.randint(0, 1) for _ in range(n1))
    theta = tuple(Fraction(rng.randint(0, q - 1), q) for _ in range(n2))
    v = tuple(rng.randint(-vmax, vmax) for _ in S)
    return ControlPoint(u, mu, theta, v)


def _small_step(order, s: int, rng: random.Random, scale: float) -> ControlPoint:
    n1, n2 = order.signature
    q = 1 << 40
    k = int(scale * q)
    u = tuple(Fraction(rng.randint(-k, k), q) for _ in range(n1 + n2 - 1))
    theta = tuple(Fraction(rng.randint(-k, k), q) for _ in range(n2))
    return ControlPoint(u, (0,) * n1, theta, (0,) * s)


class StateCache:
    """Small LRU of prepared states; wide Gaussians hold hundreds of thousands of points each."""

    def __init__(self, params: OracleParams, gp: GaussParams, backend: Optional[str] = None, size: int = 8):
        self.params = params
        self.gp = gp
        self.backend = backend
        self.size = size
        self._cache: OrderedDict = OrderedDict()
        self._checked = False

    def __call__(self, x: ControlPoint) -> LatticeState:
        if x in self._cache:
            self._cache.move_to_end(x)
            return self._cache[x]
        e = eval_oracle_auto(x, self.params)
        st = gauss_state(e, self.gp, self.backend, check=not self._checked)
        self._checked = True
        self._cache[x] = st
        if len(self._cache) > self.size:
            self._cache.popitem(last=False)
        return st


def hsp_scan(order, S, unit_controls: Sequence[ControlPoint], samples: int, gp: GaussParams,
             q: int = 64, seed: int = 0, eps_slack: float = 0.02, lipschitz_scale: float = 1e-3,
             backend: Optional[str] = None) -> HspParams:
    """Empirical pseudoinjectivity and Lipschitz scan over random control-point pairs."""
    rng = random.Random(seed)
    params = OracleParams(order, S, q)
    metric = QuotientMetric(order, S, unit_controls)
    states = StateCache(params, gp, backend)
    disc = abs(order.discriminant)
    r = math.pi / (2 * disc)
    eps = 0.75
    n = order.n
    worst_overlap = 0.0
    fails = 0
    far = 0
    tried = 0
    while far < samples:
        tried += 1
        if tried > 50 * samples:
            break
        x = _random_control(order, S, rng)
        y = _random_control(order, S, rng)
        d = metric.distance(x, y)
        if d < r:
            continue
        ov = abs(states(x).inner(states(y), backend))
        worst_overlap = max(worst_overlap, ov)
        if ov > eps + eps_slack:
            fails += 1
        far += 1
    # Lipschitz: small perturbations of random points
    max_ratio = 0.0
    straddle_violations = 0
    for _ in range(samples):
        x = _random_control(order, S, rng)
        step = _small_step(order, len(S), rng, lipschitz_scale)
        y = x + step
        d = metric.distance(x, y)
        if d == 0:
            continue
        sx, sy = states(x), states(y)
        max_ratio = max(max_ratio, sx.distance(sy) / d)
        straddle_violations += straddle_check(sx, sy, gp.nu, rng)
    report = {
        "pairs_far": far,
        "pseudoinjectivity_failures": fails,
        "max_overlap": worst_overlap,
        "eps_slack": eps_slack,
        "straddle_violations": straddle_violations,
        "backend": backend or KERNEL_BACKEND,
        "r": r,
        "s": gp.s,
        "nu": gp.nu,
        "n": n,
    }
    return HspParams(max_ratio, r, eps, report=report)


def straddle_check(a: LatticeState, b: LatticeState, nu: float, rng: random.Random, count: int = 16) -> int:
    """Count violations of the straddle Lipschitz bound on sampled point pairs of two states."""
    n = a.n
    bound = straddle_lipschitz_bound(n, nu)
    m = min(len(a), len(b))
    bad = 0
    for _ in range(count):
        i = rng.randrange(m)
        v = a.points[i] if rng.random() < 0.5 else b.points[i]
        w = v + np.array([rng.uniform(-2, 2) * nu for _ in range(n)])
        dist = straddle_n(v, nu).distance(straddle_n(w, nu))
        if dist > bound * float(np.linalg.norm(v - w)) + 1e-12:
            bad += 1
    return bad


def rm_oracle_params(at: HspParams, l: int, nu: float, lambda_grid: float) -> HspParams:
    """Parameters of the extension of an oracle on G to G x R^l."""
    a2 = at.a ** 2 + l * (math.pi * (1 + nu) / (2 * nu * lambda_grid)) ** 2
    r2 = at.r ** 2 + l * (2 * nu * lambda_grid) ** 2
    return HspParams(math.sqrt(a2), math.sqrt(r2), at.eps, at.lambda1_lower, at.volume_upper, dict(at.report))
