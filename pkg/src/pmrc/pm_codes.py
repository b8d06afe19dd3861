"""Product-Matrix MBR and MSR codecs.

Node ``i`` stores ``psi_i^T M`` where ``psi_i`` is row ``i`` of a Vandermonde encoding
matrix and ``M`` a symmetric-structured message matrix:

* MBR: ``M = [[S, T], [T^T, 0]]`` (d x d), ``S`` symmetric k x k.
* MSR (d = 2k - 2): ``M = [S1; S2]`` (d x alpha), both alpha x alpha symmetric, and
  ``psi_i = [phi_i, lambda_i phi_i]`` with ``lambda_i = x_i**alpha``.

Node ids are 1-based everywhere in the public API.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from math import comb
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DuplicateShare,
    FieldTooSmall,
    InvalidHelper,
    LengthMismatch,
    NotEnoughHelpers,
    NotEnoughShares,
    PaddingError,
    PointSelectionFailed,
    ShapeError,
    UnsupportedRegime,
)
from .gf import GF
from .linalg import MatrixFq, invert, matmul, rank, vandermonde
from .params import CodeParams, Mode, SecrecyParams

_SUBSET_CHECK_LIMIT = 20_000


class Role(str, Enum):
    MESSAGE = "message"
    RANDOM = "random"
    DERIVED = "derived"  # fixed by shortening constraints


# -- slot layout --------------------------------------------------------------


def canonical_slots(mode: Mode, k: int, d: int, alpha: int) -> list[tuple[int, int]]:
    """Canonical (row, col) positions of the independent entries of ``M``.

    MBR: upper triangle of S row-major, then T row-major.
    MSR: upper triangle of S1 row-major, then upper triangle of S2 (rows offset by alpha).
    """
    if Mode(mode) is Mode.MBR:
        s_part = [(i, j) for i in range(k) for j in range(i, k)]
        t_part = [(i, j) for i in range(k) for j in range(k, d)]
        return s_part + t_part
    upper = [(i, j) for i in range(alpha) for j in range(i, alpha)]
    return upper + [(alpha + i, j) for i, j in upper]


def slot_cells(mode: Mode, alpha: int, slot: tuple[int, int]) -> tuple[tuple[int, int], ...]:
    """Every cell of ``M`` holding the symbol of ``slot`` (the slot and its mirror)."""
    r, c = slot
    if Mode(mode) is Mode.MBR:
        return ((r, c),) if r == c else ((r, c), (c, r))
    base, i = divmod(r, alpha)
    if i == c:
        return ((r, c),)
    return ((r, c), (base * alpha + c, i))


def message_shape(mode: Mode, d: int, alpha: int) -> tuple[int, int]:
    return (d, d) if Mode(mode) is Mode.MBR else (2 * alpha, alpha)


def matrix_from_slots(mode, k, d, alpha, values, field: GF) -> MatrixFq:
    slots = canonical_slots(mode, k, d, alpha)
    if len(values) != len(slots):
        raise LengthMismatch(f"expected {len(slots)} slot values, got {len(values)}")
    m = np.zeros(message_shape(mode, d, alpha), dtype=np.int64)
    for slot, v in zip(slots, values):
        for cell in slot_cells(mode, alpha, slot):
            m[cell] = int(v) % field.q
    return MatrixFq(m, field)


# -- domain types -------------------------------------------------------------


@dataclass(frozen=True)
class EncodingMatrix:
    psi: MatrixFq
    mode: Mode
    k: int
    alpha: int
    points: tuple[int, ...]
    lambdas: tuple[int, ...] | None = None

    @property
    def n(self) -> int:
        return self.psi.rows

    @property
    def d(self) -> int:
        return self.psi.cols

    @property
    def field(self) -> GF:
        return self.psi.field

    @property
    def phi(self) -> MatrixFq:
        width = self.k if self.mode is Mode.MBR else self.alpha
        return self.psi.take_cols(range(width))

    @property
    def delta(self) -> MatrixFq | None:
        if self.mode is not Mode.MBR:
            return None
        return self.psi.take_cols(range(self.k, self.d))

    def psi_row(self, node: int) -> np.ndarray:
        return self.psi.data[node - 1]

    def phi_row(self, node: int) -> np.ndarray:
        return self.psi.data[node - 1, : self.alpha if self.mode is Mode.MSR else self.k]

    def repair_vector(self, node: int) -> np.ndarray:
        """Vector a helper multiplies its share by when ``node`` is being repaired."""
        if self.mode is Mode.MBR:
            return self.psi.data[node - 1]
        return self.psi.data[node - 1, : self.alpha]


@dataclass(frozen=True)
class MessageMatrix:
    m: MatrixFq
    mode: Mode
    slots: tuple[tuple[int, int], ...]
    roles: tuple[Role, ...]

    def slot_values(self) -> list[int]:
        return [self.m[r, c] for r, c in self.slots]


@dataclass(frozen=True)
class NodeShare:
    node_id: int
    symbols: tuple[int, ...]


@dataclass(frozen=True)
class RepairSymbol:
    helper_id: int
    failed_id: int
    value: int


# -- construction -------------------------------------------------------------


def select_points(mode: Mode, q: int, n: int, alpha: int) -> list[int]:
    """``n`` distinct evaluation points; for MSR their alpha-th powers are distinct too.

    Candidates are scanned 1, 2, ..., q-1 and then 0, so MBR codes over a field larger
    than ``n`` use the points 1..n.
    """
    if q < n:
        raise FieldTooSmall(f"GF({q}) has fewer than {n} elements")
    chosen, powers = [], set()
    for x in list(range(1, q)) + [0]:
        if len(chosen) == n:
            break
        if Mode(mode) is Mode.MSR:
            lam = pow(x, alpha, q)
            if lam in powers:
                continue
            powers.add(lam)
        chosen.append(x)
    if len(chosen) < n:
        raise PointSelectionFailed(
            f"GF({q}) has only {len(chosen)} points with distinct {alpha}-th powers, need {n}"
        )
    return chosen


def _all_subsets_independent(mat: MatrixFq, size: int, cols: int) -> bool:
    n = mat.rows
    if comb(n, size) > _SUBSET_CHECK_LIMIT:
        return True  # distinct Vandermonde points already guarantee it
    sub = mat.take_cols(range(cols))
    return all(rank(sub.take_rows(rows)) == size for rows in combinations(range(n), size))


def build_encoding(p: CodeParams, q: int, points: Sequence[int] | None = None) -> EncodingMatrix:
    """Vandermonde encoding matrix for a native code (MSR requires d = 2k - 2)."""
    field = GF(q)
    if p.mode is Mode.MSR and p.d != 2 * p.k - 2:
        raise UnsupportedRegime(f"native PM-MSR needs d = 2k-2; shorten a larger code for d={p.d}")
    alpha = p.alpha // p.beta
    if points is None:
        points = select_points(p.mode, q, p.n, alpha)
    points = [int(x) % q for x in points]
    if len(points) != p.n:
        raise ShapeError(f"need {p.n} points, got {len(points)}")
    psi = vandermonde(points, p.d, field)
    lambdas = None
    if p.mode is Mode.MSR:
        lambdas = tuple(pow(x, alpha, q) for x in points)
        if len(set(lambdas)) != len(lambdas):
            raise PointSelectionFailed(f"{alpha}-th powers of {points} collide in GF({q})")
    enc = EncodingMatrix(psi, p.mode, p.k, alpha, tuple(points), lambdas)
    width = p.k if p.mode is Mode.MBR else alpha
    if not _all_subsets_independent(psi, p.d, p.d) or not _all_subsets_independent(enc.phi, width, width):
        raise PointSelectionFailed("encoding matrix fails the subset independence checks")
    return enc


def share_coefficients(enc: EncodingMatrix, node: int) -> np.ndarray:
    """alpha x B matrix expressing ``psi_node^T M`` in the canonical slot basis."""
    slots = canonical_slots(enc.mode, enc.k, enc.d, enc.alpha)
    psi = enc.psi_row(node)
    out = np.zeros((enc.alpha, len(slots)), dtype=np.int64)
    for s, slot in enumerate(slots):
        for r, c in slot_cells(enc.mode, enc.alpha, slot):
            out[c, s] += psi[r]
    return out % enc.field.q


def repair_coefficients(enc: EncodingMatrix, node: int) -> np.ndarray:
    """d x B matrix expressing ``M v`` (v = the repair vector of ``node``) in the slot basis.

    This is everything a replacement for ``node`` learns from any d helpers.
    """
    slots = canonical_slots(enc.mode, enc.k, enc.d, enc.alpha)
    v = enc.repair_vector(node)
    out = np.zeros((enc.d, len(slots)), dtype=np.int64)
    for s, slot in enumerate(slots):
        for r, c in slot_cells(enc.mode, enc.alpha, slot):
            out[r, s] += v[c]
    return out % enc.field.q


# -- packing & encoding -------------------------------------------------------


def pack_message(p: CodeParams, secrecy: SecrecyParams | None, message, randomness=None,
                 field: GF | None = None) -> MessageMatrix:
    """Place ``message`` into the canonical slots of ``M``.

    With a secrecy setting that has random symbols, the placement and the random draw
    are handled by :func:`pmrc.secure.secure_pack`.
    """
    if field is None:
        raise ValueError("a field is required to pack symbols")
    if secrecy is not None and secrecy.R > 0:
        from .secure import secure_pack

        return secure_pack(p, secrecy, message, randomness, field)
    alpha = p.alpha // p.beta
    slots = canonical_slots(p.mode, p.k, p.d, alpha)
    if len(message) != len(slots):
        raise LengthMismatch(f"expected {len(slots)} message symbols, got {len(message)}")
    m = matrix_from_slots(p.mode, p.k, p.d, alpha, list(message), field)
    return MessageMatrix(m, p.mode, tuple(slots), (Role.MESSAGE,) * len(slots))


def encode(enc: EncodingMatrix, m: MessageMatrix) -> list[NodeShare]:
    if m.m.rows != enc.d:
        raise ShapeError(f"message matrix has {m.m.rows} rows, encoding expects {enc.d}")
    c = matmul(enc.psi, m.m)
    return [NodeShare(i + 1, tuple(c.data[i].tolist())) for i in range(enc.n)]


def helper_symbol(enc: EncodingMatrix, share: NodeShare, failed: int) -> RepairSymbol:
    """What helper ``share.node_id`` sends toward the repair of ``failed``."""
    q = enc.field.q
    v = int(np.dot(np.asarray(share.symbols, dtype=np.int64) % q, enc.repair_vector(failed)) % q)
    return RepairSymbol(share.node_id, failed, v)


def _check_shares(shares: Sequence[NodeShare], k: int, n: int) -> list[NodeShare]:
    ids = [s.node_id for s in shares]
    if len(set(ids)) != len(ids):
        raise DuplicateShare(f"duplicate node ids in {ids}")
    if len(shares) < k:
        raise NotEnoughShares(f"need {k} shares, got {len(shares)}")
    if any(not 1 <= i <= n for i in ids):
        raise NotEnoughShares(f"node ids must be in 1..{n}, got {ids}")
    return list(shares[:k])


def _check_helpers(symbols: Sequence[RepairSymbol], failed: int, d: int, n: int) -> list[RepairSymbol]:
    ids = [s.helper_id for s in symbols]
    if failed in ids:
        raise InvalidHelper(f"failed node {failed} cannot help its own repair")
    if any(s.failed_id != failed for s in symbols):
        raise InvalidHelper(f"repair symbols were computed for a different failed node than {failed}")
    if len(set(ids)) != len(ids):
        raise InvalidHelper(f"duplicate helper ids in {ids}")
    if len(symbols) != d:
        raise NotEnoughHelpers(f"repair needs exactly {d} helpers, got {len(symbols)}")
    if any(not 1 <= i <= n for i in ids) or not 1 <= failed <= n:
        raise InvalidHelper(f"node ids must be in 1..{n}")
    return list(symbols)


def _share_matrix(shares, field) -> MatrixFq:
    return MatrixFq([list(s.symbols) for s in shares], field)


def mbr_reconstruct(enc: EncodingMatrix, shares: Sequence[NodeShare]) -> list[int]:
    """Slot values (canonical order) from any k shares of a PM-MBR code."""
    k, d, field = enc.k, enc.d, enc.field
    shares = _check_shares(shares, k, enc.n)
    rows = [s.node_id - 1 for s in shares]
    stored = _share_matrix(shares, field)
    phi_inv = invert(enc.phi.take_rows(rows))
    x = matmul(phi_inv, stored)  # [S + Phi^-1 Delta T^T | T]
    t = x.take_cols(range(k, d))
    s = x.take_cols(range(k))
    if d > k:
        s = s - matmul(matmul(phi_inv, enc.delta.take_rows(rows)), t.T)
    out = []
    for r, c in canonical_slots(Mode.MBR, k, d, d):
        out.append(s[r, c] if c < k else t[r, c - k])
    return out


def mbr_repair(enc: EncodingMatrix, failed: int, symbols: Sequence[RepairSymbol]) -> NodeShare:
    symbols = _check_helpers(symbols, failed, enc.d, enc.n)
    field = enc.field
    psi_rep = enc.psi.take_rows([s.helper_id - 1 for s in symbols])
    col = matmul(invert(psi_rep), MatrixFq([[s.value] for s in symbols], field))  # M psi_f
    return NodeShare(failed, tuple(col.data[:, 0].tolist()))


def msr_reconstruct(enc: EncodingMatrix, shares: Sequence[NodeShare]) -> list[int]:
    """Slot values (canonical order) from any k shares of a PM-MSR code with d = 2k - 2."""
    k, alpha, field = enc.k, enc.alpha, enc.field
    q = field.q
    shares = _check_shares(shares, k, enc.n)
    rows = [s.node_id - 1 for s in shares]
    phi = enc.phi.take_rows(rows)
    lam = [enc.lambdas[r] for r in rows]
    y = matmul(_share_matrix(shares, field), phi.T).data  # y_ij = P_ij + lambda_i Q_ij
    p = np.zeros((k, k), dtype=np.int64)
    qm = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            qij = (y[i, j] - y[j, i]) * field.inv(lam[i] - lam[j]) % q
            pij = (y[i, j] - lam[i] * qij) % q
            p[i, j] = p[j, i] = pij
            qm[i, j] = qm[j, i] = qij
    # column i of A holds S1 phi_i, recovered from the k-1 = alpha off-diagonal entries
    a = np.zeros((alpha, k), dtype=np.int64)
    b = np.zeros((alpha, k), dtype=np.int64)
    for i in range(k):
        others = [j for j in range(k) if j != i]
        inv_phi = invert(phi.take_rows(others))
        a[:, i] = matmul(inv_phi, MatrixFq(p[others, i].reshape(-1, 1), field)).data[:, 0]
        b[:, i] = matmul(inv_phi, MatrixFq(qm[others, i].reshape(-1, 1), field)).data[:, 0]
    basis_inv = invert(phi.take_rows(range(alpha)).T)
    s1 = matmul(MatrixFq(a[:, :alpha], field), basis_inv)
    s2 = matmul(MatrixFq(b[:, :alpha], field), basis_inv)
    out = []
    for r, c in canonical_slots(Mode.MSR, k, enc.d, alpha):
        out.append(s1[r, c] if r < alpha else s2[r - alpha, c])
    return out


def msr_repair(enc: EncodingMatrix, failed: int, symbols: Sequence[RepairSymbol]) -> NodeShare:
    symbols = _check_helpers(symbols, failed, enc.d, enc.n)
    field, alpha = enc.field, enc.alpha
    psi_rep = enc.psi.take_rows([s.helper_id - 1 for s in symbols])
    col = matmul(invert(psi_rep), MatrixFq([[s.value] for s in symbols], field)).data[:, 0]
    share = (col[:alpha] + enc.lambdas[failed - 1] * col[alpha:]) % field.q
    return NodeShare(failed, tuple(share.tolist()))


def reconstruct(enc: EncodingMatrix, shares: Sequence[NodeShare]) -> list[int]:
    if enc.mode is Mode.MBR:
        return mbr_reconstruct(enc, shares)
    return msr_reconstruct(enc, shares)


def repair(enc: EncodingMatrix, failed: int, symbols: Sequence[RepairSymbol]) -> NodeShare:
    if enc.mode is Mode.MBR:
        return mbr_repair(enc, failed, symbols)
    return msr_repair(enc, failed, symbols)


# -- striping -----------------------------------------------------------------


class Padding(NamedTuple):
    length: int
    stripes: int
    stripe_size: int


def stripe(symbols: Sequence[int], stripe_size: int, pad: int = 0) -> tuple[list[list[int]], Padding]:
    """Cut ``symbols`` into stripes of ``stripe_size``; the last one is padded with ``pad``.

    An empty input still yields one (all-padding) stripe.
    """
    if stripe_size < 1:
        raise ValueError("stripe size must be positive")
    symbols = list(symbols)
    count = max(1, -(-len(symbols) // stripe_size))
    padded = symbols + [pad] * (count * stripe_size - len(symbols))
    out = [padded[i * stripe_size:(i + 1) * stripe_size] for i in range(count)]
    return out, Padding(len(symbols), count, stripe_size)


def unstripe(stripes: Sequence[Sequence[int]], padding: Padding) -> list[int]:
    if len(stripes) != padding.stripes or any(len(s) != padding.stripe_size for s in stripes):
        raise PaddingError("stripe layout does not match the padding descriptor")
    lowest = (padding.stripes - 1) * padding.stripe_size + (1 if padding.stripes > 1 else 0)
    if not lowest <= padding.length <= padding.stripes * padding.stripe_size:
        raise PaddingError(f"length {padding.length} impossible for {padding.stripes} stripes")
    flat = [x for s in stripes for x in s]
    return flat[: padding.length]
