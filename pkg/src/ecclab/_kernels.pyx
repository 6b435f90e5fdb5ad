# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled peeling decoder."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def peel_residual(const cnp.int64_t[:, ::1] vn_cn, Py_ssize_t n_cn, const cnp.uint8_t[::1] erased):
    """Residual erasure mask after peeling (the maximal stopping set inside ``erased``).

    Each CN tracks how many erased edges it holds and the XOR of their VN
    indices; with a count of one the XOR names the recoverable VN.
    """
    cdef Py_ssize_t n = vn_cn.shape[0], dv = vn_cn.shape[1]
    cdef Py_ssize_t v, k, c, top = 0
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] res_arr = np.array(erased, dtype=np.uint8)
    cdef cnp.uint8_t[::1] res = res_arr
    cdef cnp.int64_t[::1] cnt = np.zeros(n_cn, dtype=np.int64)
    cdef cnp.int64_t[::1] acc = np.zeros(n_cn, dtype=np.int64)
    cdef cnp.int64_t[::1] stack = np.empty(n * dv + 1, dtype=np.int64)
    for v in range(n):
        if res[v]:
            for k in range(dv):
                c = vn_cn[v, k]
                cnt[c] += 1
                acc[c] ^= v
    for v in range(n):
        if res[v]:
            for k in range(dv):
                c = vn_cn[v, k]
                if cnt[c] == 1:
                    stack[top] = c
                    top += 1
    while top > 0:
        top -= 1
        c = stack[top]
        if cnt[c] != 1:
            continue
        v = acc[c]
        res[v] = 0
        for k in range(dv):
            c = vn_cn[v, k]
            cnt[c] -= 1
            acc[c] ^= v
            if cnt[c] == 1:
                stack[top] = c
                top += 1
    return res_arr
