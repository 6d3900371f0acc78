# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled canonical code; same contract as ``_kernels_py.canonical_code``."""

from cpython.bytes cimport PyBytes_FromStringAndSize
from libc.stdlib cimport malloc, free
from libc.stdint cimport int32_t


cdef int _code_from(int root, int n, int D, int32_t* labels, int32_t* masks, int32_t* adj,
                    int32_t* pos, int32_t* order, int32_t* out, int32_t* best, int have_best) nogil:
    """Write the code of ``root`` into ``out``; stop early once it exceeds ``best``.

    Returns -1 if smaller than best, 0 if equal, 1 if larger (abandoned).
    """
    cdef int i, v, d, w, k = 0, cnt = 1, cmp = 0, val
    for i in range(n):
        pos[i] = -1
    pos[root] = 0
    order[0] = root
    i = 0
    while i < cnt:
        v = order[i]
        i += 1
        for d in range(D + 2):
            if d == 0:
                val = labels[v]
            elif d == 1:
                val = masks[v]
            else:
                w = adj[v * D + d - 2]
                if w < 0:
                    val = -1
                else:
                    if pos[w] < 0:
                        pos[w] = cnt
                        order[cnt] = w
                        cnt += 1
                    val = pos[w]
            out[k] = val
            if have_best and cmp == 0:
                if val < best[k]:
                    cmp = -1
                elif val > best[k]:
                    return 1
            k += 1
    if not have_best:
        return -1
    return cmp


def canonical_code(int n, int D, labels, masks, adj):
    cdef int total = n * (D + 2)
    cdef int32_t* lab = <int32_t*> malloc(max(n, 1) * sizeof(int32_t))
    cdef int32_t* msk = <int32_t*> malloc(max(n, 1) * sizeof(int32_t))
    cdef int32_t* ad = <int32_t*> malloc(max(n * D, 1) * sizeof(int32_t))
    cdef int32_t* pos = <int32_t*> malloc(max(n, 1) * sizeof(int32_t))
    cdef int32_t* order = <int32_t*> malloc(max(n, 1) * sizeof(int32_t))
    cdef int32_t* out = <int32_t*> malloc(max(total, 1) * sizeof(int32_t))
    cdef int32_t* best = <int32_t*> malloc(max(total, 1) * sizeof(int32_t))
    cdef int i, r, res, have = 0
    try:
        for i in range(n):
            lab[i] = labels[i]
            msk[i] = masks[i]
        for i in range(n * D):
            ad[i] = adj[i]
        with nogil:
            for r in range(n):
                res = _code_from(r, n, D, lab, msk, ad, pos, order, out, best, have)
                if res < 0:
                    for i in range(total):
                        best[i] = out[i]
                    have = 1
        return PyBytes_FromStringAndSize(<char*> best, total * sizeof(int32_t))
    finally:
        free(lab); free(msk); free(ad); free(pos); free(order); free(out); free(best)
