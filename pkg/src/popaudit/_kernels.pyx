# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the recommenders.

Every loop accumulates in the same order as the numpy fallback in
``_fallback.py`` (items ascending, neighbours in ranked order) so both
backends return bit-identical KNN results.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef cnp.int64_t idx_t


def corated_cosine(const idx_t[::1] indptr, const idx_t[::1] indices,
                   const double[::1] data, const idx_t[::1] col_indptr,
                   const idx_t[::1] col_indices, const double[::1] col_data,
                   Py_ssize_t n_users):
    """Dense user x user cosine similarity restricted to co-rated items."""
    out = np.zeros((n_users, n_users), dtype=np.float64)
    cdef double[:, ::1] sim = out
    cdef double[::1] num = np.zeros(n_users)
    cdef double[::1] su = np.zeros(n_users)
    cdef double[::1] sv = np.zeros(n_users)
    cdef idx_t[::1] touched = np.empty(n_users, dtype=np.int64)
    cdef cnp.int8_t[::1] seen = np.zeros(n_users, dtype=np.int8)
    cdef Py_ssize_t u, v, jj, kk, i, nt, t
    cdef double rui, rvi, d, s
    with nogil:
        for u in range(n_users):
            nt = 0
            for jj in range(indptr[u], indptr[u + 1]):
                i = indices[jj]
                rui = data[jj]
                for kk in range(col_indptr[i], col_indptr[i + 1]):
                    v = col_indices[kk]
                    rvi = col_data[kk]
                    if not seen[v]:
                        seen[v] = 1
                        touched[nt] = v
                        nt += 1
                    num[v] += rui * rvi
                    su[v] += rui * rui
                    sv[v] += rvi * rvi
            for t in range(nt):
                v = touched[t]
                d = su[v] * sv[v]
                if v != u and d > 0.0:
                    s = num[v] / sqrt(d)
                    if s > 1.0:
                        s = 1.0
                    elif s < -1.0:
                        s = -1.0
                    sim[u, v] = s
                num[v] = 0.0
                su[v] = 0.0
                sv[v] = 0.0
                seen[v] = 0
    return out


def knn_accumulate(const idx_t[::1] neighbors, const double[::1] weights,
                   const idx_t[::1] indptr, const idx_t[::1] indices,
                   const double[::1] data, const double[::1] means,
                   Py_ssize_t k, Py_ssize_t n_items):
    """Weighted mean-centred sums over the first ``k`` raters of each item.

    ``neighbors`` must already be in rank order (best first) with positive
    ``weights``. Returns (numerator, denominator, count) arrays over items.
    """
    num_a = np.zeros(n_items)
    den_a = np.zeros(n_items)
    cnt_a = np.zeros(n_items, dtype=np.int64)
    cdef double[::1] num = num_a
    cdef double[::1] den = den_a
    cdef idx_t[::1] cnt = cnt_a
    cdef Py_ssize_t t, jj, i, v
    cdef double w, mv
    with nogil:
        for t in range(neighbors.shape[0]):
            v = neighbors[t]
            w = weights[t]
            mv = means[v]
            for jj in range(indptr[v], indptr[v + 1]):
                i = indices[jj]
                if cnt[i] < k:
                    num[i] += w * (data[jj] - mv)
                    den[i] += w
                    cnt[i] += 1
    return num_a, den_a, cnt_a


def sampled_dot(const idx_t[::1] rows, const idx_t[::1] cols,
                const double[:, ::1] A, const double[:, ::1] B):
    """out[e] = A[rows[e]] . B[cols[e]]"""
    cdef Py_ssize_t n = rows.shape[0], f = A.shape[1], e, q, r, c
    cdef double acc
    out_a = np.empty(n)
    cdef double[::1] out = out_a
    with nogil:
        for e in range(n):
            r = rows[e]
            c = cols[e]
            acc = 0.0
            for q in range(f):
                acc = acc + A[r, q] * B[c, q]
            out[e] = acc
    return out_a


def sparse_dense(const idx_t[::1] indptr, const idx_t[::1] indices,
                 const double[::1] vals, const double[:, ::1] B):
    """out[r] = sum_e vals[e] * B[indices[e]] over row r's entries."""
    cdef Py_ssize_t n = indptr.shape[0] - 1, f = B.shape[1], r, jj, q, c
    cdef double x
    out_a = np.zeros((n, f))
    cdef double[:, ::1] out = out_a
    with nogil:
        for r in range(n):
            for jj in range(indptr[r], indptr[r + 1]):
                c = indices[jj]
                x = vals[jj]
                for q in range(f):
                    out[r, q] += x * B[c, q]
    return out_a
