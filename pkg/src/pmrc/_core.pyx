# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(q) kernels. Inputs are C-contiguous int64 arrays reduced mod q, q < 2**31."""

import numpy as np

ctypedef long long i64


cdef inline i64 _inv(i64 a, i64 q) except -1:
    cdef i64 r0 = q, r1 = a % q, s0 = 0, s1 = 1, quot, tmp
    if r1 == 0:
        raise ZeroDivisionError("0 has no inverse")
    while r1 != 0:
        quot = r0 // r1
        tmp = r0 - quot * r1
        r0 = r1
        r1 = tmp
        tmp = s0 - quot * s1
        s0 = s1
        s1 = tmp
    s0 %= q
    if s0 < 0:
        s0 += q
    return s0


def matmul(const i64[:, ::1] a, const i64[:, ::1] b, i64 q):
    cdef Py_ssize_t n = a.shape[0], inner = a.shape[1], m = b.shape[1]
    cdef Py_ssize_t i, t, j
    cdef i64 ait
    out = np.zeros((n, m), dtype=np.int64)
    cdef i64[:, ::1] o = out
    for i in range(n):
        for t in range(inner):
            ait = a[i, t]
            if ait == 0:
                continue
            for j in range(m):
                o[i, j] = (o[i, j] + ait * b[t, j]) % q
    return out


cdef Py_ssize_t _eliminate(i64[:, ::1] a, i64 q, bint full, list pivots) except -1:
    cdef Py_ssize_t rows = a.shape[0], cols = a.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, p, start
    cdef i64 inv, f, tmp
    for c in range(cols):
        if r == rows:
            break
        p = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(c, cols):
                tmp = a[p, j]
                a[p, j] = a[r, j]
                a[r, j] = tmp
        inv = _inv(a[r, c], q)
        if inv != 1:
            for j in range(c, cols):
                a[r, j] = a[r, j] * inv % q
        start = 0 if full else r + 1
        for i in range(start, rows):
            if i == r or a[i, c] == 0:
                continue
            f = q - a[i, c]
            for j in range(c, cols):
                a[i, j] = (a[i, j] + f * a[r, j]) % q
        if pivots is not None:
            pivots.append(c)
        r += 1
    return r


def rref(a, i64 q):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    out = np.array(a, dtype=np.int64, order="C", copy=True)
    pivots = []
    if out.size:
        _eliminate(out, q, True, pivots)
    return out, pivots


def rank(a, i64 q):
    out = np.array(a, dtype=np.int64, order="C", copy=True)
    if out.size == 0:
        return 0
    return _eliminate(out, q, False, None)
