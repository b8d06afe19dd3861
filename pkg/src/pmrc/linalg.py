"""Dense matrices over GF(q): products, elimination, rank, inverse, solve, Vandermonde."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DuplicatePoint, ModulusMismatch, NoSolution, ShapeError, SingularMatrix
from .gf import GF, FieldElement


class MatrixFq:
    """Row-major matrix of GF(q) entries backed by an int64 array.

    Instances are treated as immutable; every operation returns a new matrix.
    Zero-row or zero-column matrices are allowed (empty observation sets).
    """

    __slots__ = ("data", "field")

    def __init__(self, data, field: GF):
        if field.q >= kernels.MAX_MODULUS:
            raise ValueError(f"matrix kernels need q < 2**31, got {field.q}")
        arr = np.array(data, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
        if arr.ndim != 2:
            raise ShapeError(f"expected a 2-d array, got shape {arr.shape}")
        arr %= field.q
        arr.setflags(write=False)
        self.data = arr
        self.field = field

    @classmethod
    def _wrap(cls, arr, field):
        m = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        arr.setflags(write=False)
        m.data = arr
        m.field = field
        return m

    # -- constructors --------------------------------------------------------

    @classmethod
    def zeros(cls, rows, cols, field):
        return cls._wrap(np.zeros((rows, cols), dtype=np.int64), field)

    @classmethod
    def identity(cls, n, field):
        return cls._wrap(np.eye(n, dtype=np.int64), field)

    # -- shape & access ------------------------------------------------------

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    @property
    def T(self) -> MatrixFq:
        return MatrixFq._wrap(self.data.T, self.field)

    def __getitem__(self, key):
        out = self.data[key]
        if np.ndim(out) == 0:
            return int(out)
        if np.ndim(out) == 1:
            # keep 2-d shape: a row slice stays a row, a column slice a column
            if isinstance(key, tuple) and len(key) == 2 and isinstance(key[1], (int, np.integer)):
                out = out.reshape(-1, 1)
            else:
                out = out.reshape(1, -1)
        return MatrixFq._wrap(out, self.field)

    def element(self, i, j) -> FieldElement:
        return FieldElement(int(self.data[i, j]), self.field)

    def take_rows(self, idx) -> MatrixFq:
        return MatrixFq._wrap(self.data[list(idx), :], self.field)

    def take_cols(self, idx) -> MatrixFq:
        return MatrixFq._wrap(self.data[:, list(idx)], self.field)

    def tolist(self):
        return self.data.tolist()

    def __repr__(self):
        return f"MatrixFq(GF({self.field.q}), {self.data.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, MatrixFq):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and bool(np.all(self.data == other.data))

    __hash__ = None

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, MatrixFq):
            raise TypeError(f"expected MatrixFq, got {type(other).__name__}")
        if other.field.q != self.field.q:
            raise ModulusMismatch(f"GF({self.field.q}) vs GF({other.field.q})")

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return MatrixFq._wrap((self.data + other.data) % self.field.q, self.field)

    def __sub__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"cannot subtract {self.shape} and {other.shape}")
        return MatrixFq._wrap((self.data - other.data) % self.field.q, self.field)

    def __neg__(self):
        return MatrixFq._wrap((-self.data) % self.field.q, self.field)

    def scale(self, c) -> MatrixFq:
        return MatrixFq._wrap(self.data * (int(c) % self.field.q) % self.field.q, self.field)

    def __matmul__(self, other):
        return matmul(self, other)

    def rank(self) -> int:
        return rank(self)

    def inv(self) -> MatrixFq:
        return invert(self)


def hstack(*mats: MatrixFq) -> MatrixFq:
    field = mats[0].field
    return MatrixFq._wrap(np.hstack([m.data for m in mats]), field)


def vstack(*mats: MatrixFq) -> MatrixFq:
    field = mats[0].field
    cols = {m.cols for m in mats if m.rows}
    if len(cols) > 1:
        raise ShapeError(f"cannot stack matrices with column counts {sorted(cols)}")
    width = cols.pop() if cols else mats[0].cols
    parts = [m.data if m.rows else np.zeros((0, width), dtype=np.int64) for m in mats]
    return MatrixFq._wrap(np.vstack(parts), field)


def matmul(a: MatrixFq, b: MatrixFq) -> MatrixFq:
    a._check(b)
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return MatrixFq._wrap(kernels.matmul(a.data, b.data, a.field.q), a.field)


def rref(a: MatrixFq) -> tuple[MatrixFq, list[int]]:
    out, pivots = kernels.rref(a.data, a.field.q)
    return MatrixFq._wrap(out, a.field), list(pivots)


def rank(a: MatrixFq) -> int:
    return kernels.rank(a.data, a.field.q)


def invert(a: MatrixFq) -> MatrixFq:
    if a.rows != a.cols:
        raise ShapeError(f"cannot invert non-square {a.shape}")
    n = a.rows
    aug = np.hstack([a.data, np.eye(n, dtype=np.int64)])
    red, pivots = kernels.rref(aug, a.field.q)
    if list(pivots[:n]) != list(range(n)) or len(pivots) < n:
        raise SingularMatrix(f"{n}x{n} matrix is singular over GF({a.field.q})")
    return MatrixFq._wrap(red[:, n:], a.field)


class Solution(NamedTuple):
    x: MatrixFq
    nullity: int


def solve(a: MatrixFq, rhs: MatrixFq) -> Solution:
    """One solution of ``a @ x = rhs`` plus the dimension of the solution space.

    Free variables are set to zero, so the result is deterministic.
    """
    a._check(rhs)
    if a.rows != rhs.rows:
        raise ShapeError(f"system {a.shape} with right-hand side {rhs.shape}")
    n = a.cols
    red, pivots = kernels.rref(np.hstack([a.data, rhs.data]), a.field.q)
    if any(p >= n for p in pivots):
        raise NoSolution("inconsistent linear system")
    x = np.zeros((n, rhs.cols), dtype=np.int64)
    for row, col in enumerate(pivots):
        x[col] = red[row, n:]
    return Solution(MatrixFq._wrap(x, a.field), n - len(pivots))


def vandermonde(points, cols: int, field: GF | None = None) -> MatrixFq:
    """Rows ``[1, x, x**2, ..., x**(cols-1)]`` for each evaluation point."""
    if field is None:
        field = points[0].field
    vals = [int(p) % field.q for p in points]
    if not vals:
        raise ShapeError("need at least one point")
    if len(set(vals)) != len(vals):
        raise DuplicatePoint(f"evaluation points must be distinct: {vals}")
    data = np.ones((len(vals), cols), dtype=np.int64)
    for j in range(1, cols):
        data[:, j] = data[:, j - 1] * np.array(vals, dtype=np.int64) % field.q
    return MatrixFq._wrap(data, field)
