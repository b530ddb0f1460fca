# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels: Rips cliques, matrix anti-transpose, Z/2 column reduction.

Semantics match ``phkm._kernels_py`` exactly; see that module for the
contracts.
"""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()


cdef void _expand(const unsigned char[:, ::1] adj, vector[int]& simplex,
                  vector[int]& cands, int max_size,
                  vector[vector[int]]& out) noexcept nogil:
    cdef int s = <int>simplex.size()
    cdef size_t a, b
    cdef int w
    cdef vector[int] nxt
    for a in range(simplex.size()):
        out[s - 1].push_back(simplex[a])
    if s == max_size:
        return
    for a in range(cands.size()):
        w = cands[a]
        nxt.clear()
        for b in range(a + 1, cands.size()):
            if adj[w, cands[b]]:
                nxt.push_back(cands[b])
        simplex.push_back(w)
        _expand(adj, simplex, nxt, max_size, out)
        simplex.pop_back()


def rips_cliques(adj, int max_size):
    cdef const unsigned char[:, ::1] A = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef int n = A.shape[0]
    cdef int v, u
    cdef vector[vector[int]] out
    cdef vector[int] simplex
    cdef vector[int] cands
    out.resize(max_size)
    with nogil:
        for v in range(n):
            cands.clear()
            for u in range(v + 1, n):
                if A[v, u]:
                    cands.push_back(u)
            simplex.clear()
            simplex.push_back(v)
            _expand(A, simplex, cands, max_size, out)
    result = []
    cdef int s
    cdef cnp.int64_t[::1] view
    cdef size_t i
    for s in range(max_size):
        arr = np.empty(out[s].size(), dtype=np.int64)
        view = arr
        for i in range(out[s].size()):
            view[i] = out[s][i]
        result.append(arr.reshape(-1, s + 1))
    return result


cdef inline void _sym_diff(vector[cnp.int64_t]& acc, vector[cnp.int64_t]& other,
                           vector[cnp.int64_t]& tmp) noexcept nogil:
    # acc <- acc xor other, both sorted ascending
    cdef size_t i = 0, j = 0
    tmp.clear()
    while i < acc.size() and j < other.size():
        if acc[i] < other[j]:
            tmp.push_back(acc[i]); i += 1
        elif acc[i] > other[j]:
            tmp.push_back(other[j]); j += 1
        else:
            i += 1; j += 1
    while i < acc.size():
        tmp.push_back(acc[i]); i += 1
    while j < other.size():
        tmp.push_back(other[j]); j += 1
    acc.swap(tmp)


def reduce_boundary(indptr, indices, col_dim):
    cdef const cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const cnp.int64_t[::1] dims = np.ascontiguousarray(col_dim, dtype=np.int64)
    cdef Py_ssize_t ncols = dims.shape[0]
    low_arr = np.full(ncols, -1, dtype=np.int64)
    if ncols == 0:
        return low_arr
    cdef cnp.int64_t[::1] low = low_arr
    cdef vector[cnp.int64_t] pivot_col
    cdef vector[vector[cnp.int64_t]] reduced
    cdef vector[char] cleared
    cdef vector[cnp.int64_t] col, tmp
    cdef Py_ssize_t j, k
    cdef cnp.int64_t piv, other
    cdef int d, top = <int>np.max(col_dim)
    pivot_col.assign(ncols, -1)
    reduced.resize(ncols)
    cleared.assign(ncols, 0)
    with nogil:
        for d in range(top, 0, -1):
            for j in range(ncols):
                if dims[j] != d or cleared[j]:
                    continue
                col.clear()
                for k in range(ptr[j], ptr[j + 1]):
                    col.push_back(idx[k])
                while col.size() > 0:
                    piv = col.back()
                    other = pivot_col[piv]
                    if other < 0:
                        break
                    _sym_diff(col, reduced[other], tmp)
                if col.size() > 0:
                    piv = col.back()
                    low[j] = piv
                    pivot_col[piv] = j
                    reduced[j].swap(col)
                    cleared[piv] = 1
    return low_arr


def anti_transpose(indptr, indices, Py_ssize_t n):
    cdef const cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    co_ptr_arr = np.zeros(n + 1, dtype=np.int64)
    co_idx_arr = np.empty(idx.shape[0], dtype=np.int64)
    cdef cnp.int64_t[::1] co_ptr = co_ptr_arr
    cdef cnp.int64_t[::1] co_idx = co_idx_arr
    cdef vector[cnp.int64_t] fill
    cdef Py_ssize_t j, k, r
    with nogil:
        for k in range(idx.shape[0]):
            co_ptr[n - idx[k]] += 1
        for r in range(n):
            co_ptr[r + 1] += co_ptr[r]
        fill.assign(n, 0)
        # columns from last to first so each new column gets ascending rows
        for j in range(n - 1, -1, -1):
            for k in range(ptr[j], ptr[j + 1]):
                r = n - 1 - idx[k]
                co_idx[co_ptr[r] + fill[r]] = n - 1 - j
                fill[r] += 1
    return co_ptr_arr, co_idx_arr
