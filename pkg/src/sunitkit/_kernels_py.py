"""Numpy versions of the lattice-state kernels (used when the extension is absent)."""

from __future__ import annotations

import itertools

import numpy as np


def enum_ball(basis: np.ndarray, radius: float, budget: int) -> np.ndarray:
    """Integer coefficient rows c with ||c @ basis|| <= radius.

    Scans the box |c_i| <= radius * ||column i of basis^-1||; returns None
    when that box exceeds ``budget`` candidates.
    """
    basis = np.asarray(basis, dtype=np.float64)
    n = basis.shape[0]
    inv = np.linalg.inv(basis)
    bounds = np.floor(radius * np.linalg.norm(inv, axis=0) + 1e-9).astype(np.int64)
    total = int(np.prod(2 * bounds + 1))
    if total > budget:
        return None
    ranges = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    # chunk over the first coordinate to keep memory flat
    out = []
    rest = np.array(list(itertools.product(*ranges[1:])), dtype=np.int64).reshape(-1, n - 1) if n > 1 else None
    r2 = radius * radius * (1.0 + 1e-12)
    for c0 in ranges[0]:
        if n == 1:
            coeffs = np.array([[c0]], dtype=np.int64)
        else:
            coeffs = np.hstack([np.full((rest.shape[0], 1), c0, dtype=np.int64), rest])
        pts = coeffs @ basis
        keep = np.einsum("ij,ij->i", pts, pts) <= r2
        if keep.any():
            out.append(coeffs[keep])
    if not out:
        return np.zeros((0, n), dtype=np.int64)
    return np.vstack(out)


def _encode(cells: np.ndarray, lo: np.ndarray, radix: np.ndarray) -> np.ndarray:
    key = np.zeros(cells.shape[0], dtype=np.int64)
    for j in range(cells.shape[1]):
        key = key * radix[j] + (cells[:, j] - lo[j])
    return key


def straddle_overlap(cells_a, t_a, w_a, cells_b, t_b, w_b) -> float:
    """sum_{a,b} w_a w_b <str(a)|str(b)> for points given by grid cell and offset.

    Each grid cell of ``b`` must hold at most one point.
    """
    n = cells_a.shape[1]
    if cells_a.shape[0] == 0 or cells_b.shape[0] == 0:
        return 0.0
    lo = np.minimum(cells_a.min(axis=0), cells_b.min(axis=0)) - 2
    hi = np.maximum(cells_a.max(axis=0), cells_b.max(axis=0)) + 2
    radix = (hi - lo + 1).astype(np.int64)
    keys_b = _encode(cells_b, lo, radix)
    order = np.argsort(keys_b, kind="stable")
    sorted_keys = keys_b[order]
    ca = np.cos(np.pi / 2 * t_a)
    sa = np.sin(np.pi / 2 * t_a)
    cb = np.cos(np.pi / 2 * t_b)
    sb = np.sin(np.pi / 2 * t_b)
    total = 0.0
    for off in itertools.product((-1, 0, 1), repeat=n):
        off_arr = np.array(off, dtype=np.int64)
        keys = _encode(cells_a + off_arr, lo, radix)
        pos = np.searchsorted(sorted_keys, keys)
        pos = np.minimum(pos, len(sorted_keys) - 1)
        hit = sorted_keys[pos] == keys
        if not hit.any():
            continue
        ia = np.nonzero(hit)[0]
        ib = order[pos[hit]]
        prod = w_a[ia] * w_b[ib]
        for j, o in enumerate(off):
            if o == 0:
                # same cell: cos a cos b + sin a sin b
                f = ca[ia, j] * cb[ib, j] + sa[ia, j] * sb[ib, j]
            elif o == 1:
                # b's lower corner is a's upper corner
                f = sa[ia, j] * cb[ib, j]
            else:
                f = ca[ia, j] * sb[ib, j]
            prod = prod * f
        total += float(prod.sum())
    return total
