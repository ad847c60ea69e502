# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice-state kernels: ball enumeration and straddle overlaps."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, ceil, M_PI

cnp.import_array()


def enum_ball(basis, double radius, long budget):
    """Fincke-Pohst enumeration of coefficient rows c with ||c @ basis|| <= radius."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.ascontiguousarray(basis, dtype=np.float64)
    cdef int n = b.shape[0]
    # Gram-Schmidt on rows: b_i = sum_{j<=i} mu[i,j] b*_j with mu[i,i] = 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mu = np.zeros((n, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bstar2 = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bs = b.copy()
    cdef int i, j, k
    cdef double dot
    for i in range(n):
        for j in range(i):
            dot = 0.0
            for k in range(n):
                dot += b[i, k] * bs[j, k]
            mu[i, j] = dot / bstar2[j]
            for k in range(n):
                bs[i, k] -= mu[i, j] * bs[j, k]
        mu[i, i] = 1.0
        dot = 0.0
        for k in range(n):
            dot += bs[i, k] * bs[i, k]
        bstar2[i] = dot
    cdef double r2 = radius * radius * (1.0 + 1e-12)
    cdef long[:] c = np.zeros(n, dtype=np.int64)
    cdef double[:] partial = np.zeros(n + 1)
    cdef double[:] center = np.zeros(n)
    cdef long[:] upper = np.zeros(n, dtype=np.int64)
    cdef long count = 0
    cdef double rem, s, width
    # depth-first from the last coordinate down; partial[i] = sum_{j>=i} contribution
    i = n - 1
    partial[n] = 0.0
    center[i] = 0.0
    rem = r2
    width = sqrt(rem / bstar2[i])
    c[i] = <long>ceil(center[i] - width)
    upper[i] = <long>floor(center[i] + width)
    cdef long cap = 1024
    buf_np = np.empty((cap, n), dtype=np.int64)
    cdef long[:, :] buf = buf_np
    while True:
        if c[i] > upper[i]:
            i += 1
            if i >= n:
                break
            c[i] += 1
            continue
        s = c[i] - center[i]
        partial[i] = partial[i + 1] + s * s * bstar2[i]
        if partial[i] > r2:
            c[i] += 1
            continue
        if i == 0:
            if count >= budget:
                return None
            if count == cap:
                cap *= 2
                buf_np = np.resize(buf_np, (cap, n))
                buf = buf_np
            for k in range(n):
                buf[count, k] = c[k]
            count += 1
            c[0] += 1
            continue
        i -= 1
        s = 0.0
        for j in range(i + 1, n):
            s -= c[j] * mu[j, i]
        center[i] = s
        rem = r2 - partial[i + 1]
        if rem < 0:
            rem = 0
        width = sqrt(rem / bstar2[i])
        c[i] = <long>ceil(center[i] - width)
        upper[i] = <long>floor(center[i] + width)
    return buf_np[:count].copy()


cdef long[:] _keys(long[:, :] cells, long[:] lo, long[:] radix):
    cdef long m = cells.shape[0], p, key
    cdef int j, n = cells.shape[1]
    out = np.empty(m, dtype=np.int64)
    cdef long[:] k = out
    for p in range(m):
        key = 0
        for j in range(n):
            key = key * radix[j] + (cells[p, j] - lo[j])
        k[p] = key
    return out


def straddle_overlap(cells_a, t_a, w_a, cells_b, t_b, w_b):
    """sum_{a,b} w_a w_b <str(a)|str(b)>; cells of b hold at most one point each.

    Keys are linear in the cell index, so each neighbour offset is a constant
    key shift and the matching is a merge of two sorted key lists.
    """
    cdef long[:, :] ca = np.ascontiguousarray(cells_a, dtype=np.int64)
    cdef long[:, :] cb = np.ascontiguousarray(cells_b, dtype=np.int64)
    cdef long na = ca.shape[0], nb = cb.shape[0]
    cdef int n = ca.shape[1]
    if na == 0 or nb == 0:
        return 0.0
    ta_np = np.ascontiguousarray(t_a, dtype=np.float64) * (M_PI / 2)
    tb_np = np.ascontiguousarray(t_b, dtype=np.float64) * (M_PI / 2)
    cdef double[:, :] cos_a = np.cos(ta_np)
    cdef double[:, :] sin_a = np.sin(ta_np)
    cdef double[:, :] cos_b = np.cos(tb_np)
    cdef double[:, :] sin_b = np.sin(tb_np)
    cdef double[:] wa = np.ascontiguousarray(w_a, dtype=np.float64)
    cdef double[:] wb = np.ascontiguousarray(w_b, dtype=np.float64)
    lo_np = np.minimum(np.min(cells_a, axis=0), np.min(cells_b, axis=0)) - 2
    hi_np = np.maximum(np.max(cells_a, axis=0), np.max(cells_b, axis=0)) + 2
    cdef long[:] lo = np.ascontiguousarray(lo_np, dtype=np.int64)
    cdef long[:] radix = np.ascontiguousarray(hi_np - lo_np + 1, dtype=np.int64)
    ka_np = np.asarray(_keys(ca, lo, radix))
    kb_np = np.asarray(_keys(cb, lo, radix))
    oa_np = np.argsort(ka_np, kind="stable").astype(np.int64)
    ob_np = np.argsort(kb_np, kind="stable").astype(np.int64)
    cdef long[:] ka = ka_np[oa_np]
    cdef long[:] kb = kb_np[ob_np]
    cdef long[:] oa = oa_np
    cdef long[:] ob = ob_np
    cdef long[:] stride = np.ones(n, dtype=np.int64)
    cdef int j, o, rem, d, noff = 1
    for j in range(n - 2, -1, -1):
        stride[j] = stride[j + 1] * radix[j + 1]
    for j in range(n):
        noff *= 3
    cdef int[:] offs = np.zeros(n, dtype=np.int32)
    cdef long shift, ia, ib, p, q, target
    cdef double total = 0.0, prod
    for o in range(noff):
        rem = o
        shift = 0
        for j in range(n):
            d = rem % 3 - 1
            rem //= 3
            offs[j] = d
            shift += d * stride[j]
        ia = 0
        ib = 0
        while ia < na and ib < nb:
            target = ka[ia] + shift
            if target < kb[ib]:
                ia += 1
            elif target > kb[ib]:
                ib += 1
            else:
                p = oa[ia]
                q = ob[ib]
                prod = wa[p] * wb[q]
                for j in range(n):
                    if offs[j] == 0:
                        prod *= cos_a[p, j] * cos_b[q, j] + sin_a[p, j] * sin_b[q, j]
                    elif offs[j] == 1:
                        prod *= sin_a[p, j] * cos_b[q, j]
                    else:
                        prod *= cos_a[p, j] * sin_b[q, j]
                total += prod
                ia += 1
    return total
