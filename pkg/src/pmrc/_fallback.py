"""Pure-Python (numpy row operation) versions of the kernels in ``_core.pyx``."""

import numpy as np

from .gf import egcd_inverse

_I64_LIMIT = 1 << 62


def matmul(a, b, q):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    inner = a.shape[1]
    if inner == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    if (q - 1) ** 2 * inner < _I64_LIMIT:
        return (a @ b) % q
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for t in range(inner):
        out = (out + np.outer(a[:, t], b[t, :]) % q) % q
    return out


def _eliminate(a, q, full, pivots):
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            a[[p, r], c:] = a[[r, p], c:]
        inv = egcd_inverse(int(a[r, c]), q)
        a[r, c:] = a[r, c:] * inv % q
        targets = np.arange(rows) if full else np.arange(r + 1, rows)
        targets = targets[(targets != r) & (a[targets, c] != 0)] if targets.size else targets
        if targets.size:
            f = (q - a[targets, c])[:, None]
            a[targets, c:] = (a[targets, c:] + f * a[r, c:][None, :]) % q
        if pivots is not None:
            pivots.append(c)
        r += 1
    return r


def rref(a, q):
    out = np.array(a, dtype=np.int64, copy=True)
    pivots = []
    if out.size:
        _eliminate(out, q, True, pivots)
    return out, pivots


def rank(a, q):
    out = np.array(a, dtype=np.int64, copy=True)
    if out.size == 0:
        return 0
    return _eliminate(out, q, False, None)
