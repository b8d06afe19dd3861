"""Secure product-matrix codes: random-symbol placement, secure packing, MSR shortening.

A :class:`SecureCode` is the object the audit, the simulator and the CLI work with. It
wraps a native PM code (MBR, or MSR with d = 2k - 2) together with a linear *embedding*
that maps the free symbols ``z = [u; r]`` (message symbols, then random symbols) to the
canonical slots of the native message matrix. For unshortened codes the embedding is a
permutation; each shortening step adds linear constraints that pin one virtual node's
share to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from math import comb
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    DuplicateShare,
    InvalidHelper,
    InvalidParams,
    LengthMismatch,
    NotEnoughHelpers,
    NotEnoughShares,
    PMRCError,
)
from .gf import GF, RandomnessSource, SystemSource, uniform_vector
from .linalg import MatrixFq, invert
from .params import (
    CodeParams,
    Mode,
    SecrecyParams,
    check_modulus,
    make_params,
    msr_params,
    secure_counts,
    select_modulus,
)
from .pm_codes import (
    EncodingMatrix,
    MessageMatrix,
    NodeShare,
    RepairSymbol,
    Role,
    build_encoding,
    canonical_slots,
    encode,
    helper_symbol,
    matrix_from_slots,
    reconstruct as pm_reconstruct,
    repair as pm_repair,
    repair_coefficients,
    share_coefficients,
)


@dataclass(frozen=True)
class PlacementMap:
    """Canonical slots of ``M`` that carry random symbols, in canonical slot order."""

    random_slots: tuple[tuple[int, int], ...]
    slot_indices: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.random_slots)


def _placement(p: CodeParams, chosen: set[tuple[int, int]]) -> PlacementMap:
    slots = canonical_slots(p.mode, p.k, p.d, p.alpha // p.beta)
    idx = tuple(i for i, s in enumerate(slots) if s in chosen)
    return PlacementMap(tuple(slots[i] for i in idx), idx)


def mbr_placement(p: CodeParams, ell: int) -> PlacementMap:
    """All slots in the first ``ell`` rows (hence columns) of the symmetric MBR matrix."""
    if p.mode is not Mode.MBR:
        raise InvalidParams("mbr_placement needs MBR parameters")
    if not 0 <= ell < p.k:
        raise InvalidParams(f"need 0 <= ell < k, got ell={ell}, k={p.k}")
    slots = canonical_slots(p.mode, p.k, p.d, p.d)
    return _placement(p, {s for s in slots if s[0] < ell})


def msr_placement(p: CodeParams, ell: int, ell_prime: int) -> PlacementMap:
    """Three groups of random slots for a native PM-MSR code.

    1. the first ``ell`` rows of S1;
    2. the top-left (ell-1) x (ell-1) corner of S2;
    3. whatever else lies in the first ``ell_prime`` rows of S2.
    """
    if p.mode is not Mode.MSR or p.d != 2 * p.k - 2:
        raise InvalidParams("msr_placement needs native MSR parameters (d = 2k-2)")
    if not 0 <= ell < p.k or not 0 <= ell_prime <= ell:
        raise InvalidParams(f"need 0 <= ell' <= ell < k, got ell={ell}, ell'={ell_prime}, k={p.k}")
    a = p.alpha // p.beta
    upper = [(i, j) for i in range(a) for j in range(i, a)]
    group1 = {(i, j) for i, j in upper if i < ell}
    group2 = {(a + i, j) for i, j in upper if j < ell - 1}
    group3 = {(a + i, j) for i, j in upper if i < ell_prime} - group2
    assert not (group1 & group2) and len(group1) == ell * a - comb(ell, 2)
    assert len(group2) == comb(ell, 2) and len(group3) == (p.k - ell) * ell_prime
    return _placement(p, group1 | group2 | group3)


def placement_for(p: CodeParams, secrecy: SecrecyParams) -> PlacementMap:
    if p.mode is Mode.MBR:
        return mbr_placement(p, secrecy.ell)
    return msr_placement(p, secrecy.ell, secrecy.ell_prime)


def secure_pack(p: CodeParams, secrecy: SecrecyParams, message, randomness: RandomnessSource | None,
                field: GF) -> MessageMatrix:
    """Fill the placement slots with fresh uniform symbols and the rest with ``message``."""
    if len(message) != secrecy.B_s:
        raise LengthMismatch(f"expected {secrecy.B_s} message symbols, got {len(message)}")
    placement = placement_for(p, secrecy)
    alpha = p.alpha // p.beta
    slots = canonical_slots(p.mode, p.k, p.d, alpha)
    if randomness is None:
        randomness = SystemSource()
    rand = uniform_vector(randomness, field, placement.count) if placement.count else []
    values = [0] * len(slots)
    roles = [Role.MESSAGE] * len(slots)
    for idx, r in zip(placement.slot_indices, rand):
        values[idx] = int(r)
        roles[idx] = Role.RANDOM
    msg = iter(message)
    for idx in range(len(slots)):
        if roles[idx] is Role.MESSAGE:
            values[idx] = int(next(msg)) % field.q
    m = matrix_from_slots(p.mode, p.k, p.d, alpha, values, field)
    return MessageMatrix(m, p.mode, tuple(slots), tuple(roles))


# -- code instances -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SecureCode:
    params: CodeParams          # target parameters (beta = 1)
    secrecy: SecrecyParams      # target secrecy counts
    encoding: EncodingMatrix    # of the native (base) code
    base: CodeParams            # native parameters
    placement: PlacementMap     # random slots of the native code
    n_virtual: int
    embedding: np.ndarray       # B_base x (B_s + R), maps z = [u; r] to slot values
    free_slots: tuple[int, ...]  # base slot index pinned to each column of z
    roles: tuple[Role, ...]     # per base slot
    _cache: dict = dc_field(default_factory=dict, repr=False, compare=False)

    # -- shape ------------------------------------------------------------

    @property
    def field(self) -> GF:
        return self.encoding.field

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def mode(self) -> Mode:
        return self.params.mode

    n = property(lambda self: self.params.n)
    k = property(lambda self: self.params.k)
    d = property(lambda self: self.params.d)
    alpha = property(lambda self: self.params.alpha)

    @property
    def free_count(self) -> int:
        return self.secrecy.B_s + self.secrecy.R

    @property
    def virtual_nodes(self) -> list[int]:
        return list(range(self.n + 1, self.n + self.n_virtual + 1))

    @property
    def is_secure(self) -> bool:
        return self.secrecy.R > 0

    def describe(self) -> str:
        kind = "secure " if self.is_secure else ""
        text = (f"{kind}PM-{self.mode.value.upper()} [n={self.n}, k={self.k}, d={self.d}] "
                f"ell={self.secrecy.ell} ell'={self.secrecy.ell_prime} over GF({self.q})")
        if self.n_virtual:
            text += f", shortened from [{self.base.n}, {self.base.k}, {self.base.d}]"
        return text

    # -- per-stripe codec -------------------------------------------------

    def pack_free(self, z) -> MessageMatrix:
        z = np.asarray(z, dtype=np.int64) % self.q
        if z.shape != (self.free_count,):
            raise LengthMismatch(f"expected {self.free_count} free symbols, got shape {z.shape}")
        w = kernels.matmul(self.embedding, z.reshape(-1, 1), self.q)[:, 0]
        enc = self.encoding
        m = matrix_from_slots(enc.mode, enc.k, enc.d, enc.alpha, w.tolist(), self.field)
        slots = canonical_slots(enc.mode, enc.k, enc.d, enc.alpha)
        return MessageMatrix(m, enc.mode, tuple(slots), self.roles)

    def pack(self, message, source: RandomnessSource | None = None) -> MessageMatrix:
        if len(message) != self.secrecy.B_s:
            raise LengthMismatch(f"expected {self.secrecy.B_s} message symbols, got {len(message)}")
        rand = np.zeros(0, dtype=np.int64)
        if self.secrecy.R:
            rand = uniform_vector(source or SystemSource(), self.field, self.secrecy.R)
        return self.pack_free(np.concatenate([np.asarray(message, dtype=np.int64) % self.q, rand]))

    def encode(self, mm: MessageMatrix) -> list[NodeShare]:
        return encode(self.encoding, mm)[: self.n]

    def encode_message(self, message, source=None) -> list[NodeShare]:
        return self.encode(self.pack(message, source))

    def _virtual_shares(self) -> list[NodeShare]:
        return [NodeShare(v, (0,) * self.alpha) for v in self.virtual_nodes]

    def reconstruct_free(self, shares: Sequence[NodeShare]) -> list[int]:
        """All free symbols ``[u; r]`` from any k real shares."""
        ids = [s.node_id for s in shares]
        if any(not 1 <= i <= self.n for i in ids):
            raise NotEnoughShares(f"share ids must be real nodes 1..{self.n}, got {ids}")
        if len(shares) < self.k:
            raise NotEnoughShares(f"need {self.k} shares, got {len(shares)}")
        if len(set(ids)) != len(ids):
            raise DuplicateShare(f"duplicate node ids in {ids}")
        w = pm_reconstruct(self.encoding, list(shares[: self.k]) + self._virtual_shares())
        return [w[i] for i in self.free_slots]

    def reconstruct(self, shares: Sequence[NodeShare]) -> list[int]:
        return self.reconstruct_free(shares)[: self.secrecy.B_s]

    def helper_symbol(self, share: NodeShare, failed: int) -> RepairSymbol:
        return helper_symbol(self.encoding, share, failed)

    def repair(self, failed: int, symbols: Sequence[RepairSymbol]) -> NodeShare:
        if any(not 1 <= s.helper_id <= self.n for s in symbols) or not 1 <= failed <= self.n:
            raise InvalidHelper(f"helpers and the failed node must be real nodes 1..{self.n}")
        if len(symbols) != self.d:
            raise NotEnoughHelpers(f"repair needs exactly {self.d} helpers, got {len(symbols)}")
        virtual = [RepairSymbol(v, failed, 0) for v in self.virtual_nodes]
        return pm_repair(self.encoding, failed, list(symbols) + virtual)

    # -- coefficient views (slot basis composed with the embedding) -------

    def storage_coefficients(self, node: int) -> np.ndarray:
        """alpha x (B_s + R): the stored share of ``node`` as a function of ``[u; r]``."""
        return kernels.matmul(share_coefficients(self.encoding, node), self.embedding, self.q)

    def repair_coefficients(self, node: int) -> np.ndarray:
        """d_base x (B_s + R): the column ``M v_node`` a replacement node learns."""
        return kernels.matmul(repair_coefficients(self.encoding, node), self.embedding, self.q)

    # -- batched linear maps (derived from the per-stripe procedures) ------

    def generator(self) -> np.ndarray:
        """(n*alpha) x F matrix; shares of all real nodes, stacked node-major."""
        if "gen" not in self._cache:
            cols = []
            for j in range(self.free_count):
                unit = np.zeros(self.free_count, dtype=np.int64)
                unit[j] = 1
                shares = self.encode(self.pack_free(unit))
                cols.append([x for s in shares for x in s.symbols])
            self._cache["gen"] = np.array(cols, dtype=np.int64).T.reshape(self.n * self.alpha, self.free_count)
        return self._cache["gen"]

    def decoder(self, node_ids: Sequence[int]) -> np.ndarray:
        """F x (k*alpha) matrix taking the stacked shares of ``node_ids`` to ``[u; r]``."""
        key = ("dec", tuple(node_ids))
        if key not in self._cache:
            width = len(node_ids) * self.alpha
            cols = []
            for j in range(width):
                flat = np.zeros(width, dtype=np.int64)
                flat[j] = 1
                shares = [NodeShare(i, tuple(flat[t * self.alpha:(t + 1) * self.alpha].tolist()))
                          for t, i in enumerate(node_ids)]
                cols.append(self.reconstruct_free(shares))
            self._cache[key] = np.array(cols, dtype=np.int64).T.reshape(self.free_count, width)
        return self._cache[key]

    def repairer(self, failed: int, helper_ids: Sequence[int]) -> np.ndarray:
        """alpha x d matrix taking helper symbols (in ``helper_ids`` order) to the share."""
        key = ("rep", failed, tuple(helper_ids))
        if key not in self._cache:
            cols = []
            for j in range(len(helper_ids)):
                syms = [RepairSymbol(h, failed, int(t == j)) for t, h in enumerate(helper_ids)]
                cols.append(self.repair(failed, syms).symbols)
            self._cache[key] = np.array(cols, dtype=np.int64).T.reshape(self.alpha, len(helper_ids))
        return self._cache[key]

    def encode_batch(self, z: np.ndarray) -> np.ndarray:
        """Shares for many stripes: ``z`` is F x S, the result n x alpha x S."""
        out = kernels.matmul(self.generator(), z % self.q, self.q)
        return out.reshape(self.n, self.alpha, -1)

    def decode_batch(self, node_ids: Sequence[int], shares: np.ndarray) -> np.ndarray:
        """``shares`` is k x alpha x S for ``node_ids``; returns the F x S free symbols."""
        ids = list(node_ids)[: self.k]
        flat = np.asarray(shares[: self.k], dtype=np.int64).reshape(self.k * self.alpha, -1)
        return kernels.matmul(self.decoder(ids), flat, self.q)

    def helper_batch(self, share: np.ndarray, failed: int) -> np.ndarray:
        """Helper symbols for every stripe; ``share`` is alpha x S."""
        v = self.encoding.repair_vector(failed).reshape(1, -1)
        return kernels.matmul(v, np.asarray(share, dtype=np.int64), self.q)[0]

    def repair_batch(self, failed: int, helper_ids: Sequence[int], symbols: np.ndarray) -> np.ndarray:
        """``symbols`` is d x S (rows follow ``helper_ids``); returns alpha x S."""
        return kernels.matmul(self.repairer(failed, list(helper_ids)), np.asarray(symbols, dtype=np.int64), self.q)

    def draw_free(self, message: np.ndarray, source: RandomnessSource | None) -> np.ndarray:
        """Stack a B_s x S message block with fresh randomness into F x S."""
        message = np.asarray(message, dtype=np.int64) % self.q
        stripes = message.shape[1]
        rand = np.zeros((self.secrecy.R, stripes), dtype=np.int64)
        if self.secrecy.R:
            flat = uniform_vector(source or SystemSource(), self.field, self.secrecy.R * stripes)
            rand = flat.reshape(stripes, self.secrecy.R).T
        return np.vstack([message, rand])


def _native_code(base: CodeParams, ell: int, ell_prime: int, encoding: EncodingMatrix) -> SecureCode:
    secrecy = secure_counts(base, ell, ell_prime)
    placement = placement_for(base, secrecy)
    total = base.B
    random_idx = list(placement.slot_indices)
    message_idx = [i for i in range(total) if i not in set(random_idx)]
    free = tuple(message_idx + random_idx)
    emb = np.zeros((total, total), dtype=np.int64)
    for col, slot in enumerate(free):
        emb[slot, col] = 1
    roles = [Role.MESSAGE] * total
    for i in random_idx:
        roles[i] = Role.RANDOM
    return SecureCode(base, secrecy, encoding, base, placement, 0, emb, free, tuple(roles))


def shorten_msr(parent: SecureCode) -> SecureCode:
    """One shortening step: [n+1, k+1, d+1, ell+1, ell'] -> [n, k, d, ell, ell'].

    The highest-indexed real node of ``parent`` becomes virtual: its share is forced to
    zero by solving alpha of the parent's random symbols (the lexicographically first
    ones whose constraint columns are independent) in terms of everything else.
    """
    p = parent.params
    if p.mode is not Mode.MSR:
        raise InvalidParams("only MSR codes are shortened")
    if p.k < 2 or parent.secrecy.ell < 1:
        raise InvalidParams("parent must have k >= 2 and ell >= 1 to be shortened")
    child_params = msr_params(p.n - 1, p.k - 1, p.d - 1)
    child_secrecy = secure_counts(child_params, parent.secrecy.ell - 1, parent.secrecy.ell_prime)
    q = parent.q
    virtual = p.n
    constraint = parent.storage_coefficients(virtual)  # alpha x F_parent
    b_s = parent.secrecy.B_s
    rand_cols = list(range(b_s, parent.free_count))
    _, pivots = kernels.rref(constraint[:, rand_cols], q)
    if len(pivots) < p.alpha:
        raise PMRCError("shortening constraints are not independent on the random symbols")
    absorbed = [rand_cols[i] for i in pivots]
    keep = [c for c in range(parent.free_count) if c not in set(absorbed)]
    c_abs = MatrixFq(constraint[:, absorbed], parent.field)
    # z_abs = -C_abs^{-1} C_keep z_keep
    solved = kernels.matmul(invert(c_abs).data, constraint[:, keep], q)
    step = np.zeros((parent.free_count, len(keep)), dtype=np.int64)
    for j, c in enumerate(keep):
        step[c, j] = 1
    for t, c in enumerate(absorbed):
        step[c, :] = (-solved[t]) % q
    embedding = kernels.matmul(parent.embedding, step, q)
    roles = list(parent.roles)
    for c in absorbed:
        roles[parent.free_slots[c]] = Role.DERIVED
    assert len(keep) == child_secrecy.B_s + child_secrecy.R
    return replace(
        parent,
        params=child_params,
        secrecy=child_secrecy,
        n_virtual=parent.n_virtual + 1,
        embedding=embedding,
        free_slots=tuple(parent.free_slots[c] for c in keep),
        roles=tuple(roles),
        _cache={},
    )


def build_code(mode, n: int, k: int, d: int, ell: int = 0, ell_prime: int = 0,
               q: int | None = None, points: Sequence[int] | None = None) -> SecureCode:
    """A (possibly secure, possibly shortened) PM code for the given parameters.

    ``ell = 0`` gives the plain code. MSR codes with d > 2k - 2 are obtained by
    shortening the native code [n+s, k+s, d+s] secured at ell + s, with s = d - (2k - 2).
    """
    target = make_params(mode, n, k, d)
    secure_counts(target, ell, ell_prime)  # validates the target before any search
    s = target.shortening
    base = msr_params(n + s, k + s, d + s) if s else target
    if q is None:
        q = select_modulus(target.mode, base.n, base.alpha)
    check_modulus(q, base.n)
    encoding = build_encoding(base, q, points)
    code = _native_code(base, ell + s, ell_prime if target.mode is Mode.MSR else 0, encoding)
    for _ in range(s):
        code = shorten_msr(code)
    return code
