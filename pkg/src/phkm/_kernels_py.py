"""Pure-Python kernels; the reference semantics for ``_kernels.pyx``.

Both modules expose the same three functions:

``rips_cliques(adj, max_size)``
    ``adj`` is an (n, n) uint8 adjacency matrix. Returns a list whose entry
    ``s - 1`` is an int64 array of shape (N_s, s) holding every clique of
    ``s`` vertices (s = 1 .. max_size), vertices ascending, rows in
    lexicographic order.

``reduce_boundary(indptr, indices, col_dim)``
    Z/2 column reduction of a boundary matrix in CSR-by-column form (rows of
    each column sorted ascending, rows and columns both in filtration order).
    Columns are processed by decreasing dimension so that pivots of the
    higher dimension clear columns of the lower one. Returns an int64 array
    ``low`` with the pivot row of each reduced column, or -1 for zero columns.

``anti_transpose(indptr, indices, n)``
    Transpose of an n x n compressed-column matrix with both axes reversed:
    entry (i, j) moves to (n-1-j, n-1-i). Rows stay ascending per column.
"""

import numpy as np


def rips_cliques(adj, max_size):
    adj = np.asarray(adj, dtype=np.uint8)
    n = adj.shape[0]
    upper = [set(np.nonzero(adj[v, v + 1:])[0] + v + 1) for v in range(n)]
    out = [[] for _ in range(max_size)]

    def expand(simplex, cands):
        out[len(simplex) - 1].append(simplex)
        if len(simplex) == max_size:
            return
        for w in cands:
            expand(simplex + (w,), [u for u in cands if u > w and u in upper[w]])

    for v in range(n):
        expand((v,), sorted(upper[v]))
    return [
        np.array(rows, dtype=np.int64).reshape(len(rows), s + 1)
        for s, rows in enumerate(out)
    ]


def reduce_boundary(indptr, indices, col_dim):
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    col_dim = np.asarray(col_dim, dtype=np.int64)
    ncols = len(col_dim)
    low = np.full(ncols, -1, dtype=np.int64)
    pivot_col = {}
    reduced = {}
    cleared = np.zeros(ncols, dtype=bool)
    if ncols == 0:
        return low
    for d in range(int(col_dim.max()), 0, -1):
        for j in np.nonzero(col_dim == d)[0]:
            if cleared[j]:
                continue
            col = set(indices[indptr[j]:indptr[j + 1]].tolist())
            while col:
                piv = max(col)
                other = pivot_col.get(piv)
                if other is None:
                    break
                col ^= reduced[other]
            if col:
                piv = max(col)
                low[j] = piv
                pivot_col[piv] = j
                reduced[j] = col
                cleared[piv] = True
    return low


def anti_transpose(indptr, indices, n):
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    cols = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    new_cols = n - 1 - indices[::-1]
    new_rows = n - 1 - cols[::-1]
    order = np.argsort(new_cols, kind="stable")
    co_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(new_cols, minlength=n), out=co_indptr[1:])
    return co_indptr, new_rows[order]
