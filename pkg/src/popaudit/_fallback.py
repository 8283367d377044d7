"""Pure numpy/scipy versions of the compiled kernels in ``_kernels.pyx``.

Signatures and results match; KNN results are bit-identical because the
summation order is the same (items ascending within a user, neighbours in
rank order).
"""
import numpy as np
import scipy.sparse as sp


def corated_cosine(indptr, indices, data, col_indptr, col_indices, col_data, n_users):
    n_items = int(col_indptr.size - 1)
    R = sp.csr_matrix((data, indices, indptr), shape=(n_users, n_items))
    B = sp.csr_matrix((np.ones_like(data), indices, indptr), shape=(n_users, n_items))
    Rsq = sp.csr_matrix((data * data, indices, indptr), shape=(n_users, n_items))
    # csr @ csr accumulates each output cell over the left row in stored
    # (ascending item) order, matching the compiled loop
    num = (R @ R.T.tocsr()).toarray()
    norm = (Rsq @ B.T.tocsr()).toarray()
    d = norm * norm.T
    out = np.zeros((n_users, n_users))
    ok = d > 0
    out[ok] = num[ok] / np.sqrt(d[ok])
    np.clip(out, -1.0, 1.0, out=out)
    np.fill_diagonal(out, 0.0)
    return out


def knn_accumulate(neighbors, weights, indptr, indices, data, means, k, n_items):
    neighbors = np.asarray(neighbors, dtype=np.int64)
    starts, ends = indptr[neighbors], indptr[neighbors + 1]
    lens = ends - starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros(n_items), np.zeros(n_items), np.zeros(n_items, dtype=np.int64)
    # entries of the neighbour rows, concatenated in neighbour rank order
    owner = np.repeat(np.arange(neighbors.size), lens)
    offs = np.arange(total) - np.repeat(np.cumsum(lens) - lens, lens)
    pos = starts[owner] + offs
    items = indices[pos]
    # rank of each entry among the raters of its item, in neighbour order
    order = np.argsort(items, kind="stable")
    sorted_items = items[order]
    first = np.searchsorted(sorted_items, sorted_items, side="left")
    rank = np.empty(total, dtype=np.int64)
    rank[order] = np.arange(total) - first
    keep = rank < k
    w = weights[owner[keep]]
    dev = data[pos[keep]] - means[neighbors[owner[keep]]]
    it = items[keep]
    # bincount adds sequentially in input order
    num = np.bincount(it, weights=w * dev, minlength=n_items)
    den = np.bincount(it, weights=w, minlength=n_items)
    cnt = np.bincount(it, minlength=n_items).astype(np.int64)
    return num, den, cnt


def sampled_dot(rows, cols, A, B):
    return np.einsum("ij,ij->i", A[rows], B[cols])


def sparse_dense(indptr, indices, vals, B):
    n = indptr.size - 1
    M = sp.csr_matrix((vals, indices, indptr), shape=(n, B.shape[0]))
    return np.asarray(M @ B)
