import itertools
from math import comb

import numpy as np
import pytest

from pmrc.errors import (DegenerateSecrecy, DuplicateShare, InvalidParams, LengthMismatch, NotEnoughHelpers,
                         NotEnoughShares, InvalidHelper)
from pmrc.gf import GF, FixedSource, SeededSource
from pmrc.params import Mode, mbr_params, msr_params, secure_counts
from pmrc.pm_codes import Role, build_encoding, canonical_slots, encode, pack_message
from pmrc.secure import build_code, mbr_placement, msr_placement, secure_pack
from conftest import subsets


def test_secure_mbr634_placement():
    pm = mbr_placement(mbr_params(6, 3, 4), 1)
    assert pm.random_slots == ((0, 0), (0, 1), (0, 2), (0, 3))
    assert pm.slot_indices == (0, 1, 2, 6)  # u1, u2, u3, u7
    assert mbr_placement(mbr_params(6, 3, 4), 0).count == 0
    assert mbr_placement(mbr_params(6, 3, 4), 2).count == 7


def test_secure_mbr634_message_matrix():
    p = mbr_params(6, 3, 4)
    s = secure_counts(p, 1)
    # randoms r1, r2, r3, r7 = 1, 2, 3, 6; message u4, u5, u6, u8, u9 = 4, 5, 6, 1, 2
    mm = secure_pack(p, s, [4, 5, 6, 1, 2], FixedSource([1, 2, 3, 6]), GF(7))
    assert mm.m.tolist() == [[1, 2, 3, 6], [2, 4, 5, 1], [3, 5, 6, 2], [6, 1, 2, 0]]
    assert [r is Role.RANDOM for r in mm.roles] == [True, True, True, False, False, False, True, False, False]


def test_secure_pack_length():
    p = mbr_params(6, 3, 4)
    with pytest.raises(LengthMismatch):
        secure_pack(p, secure_counts(p, 1), [1, 2], SeededSource(0), GF(7))


def test_seeded_pack_is_reproducible(secure_mbr634):
    a = secure_mbr634.pack([1, 2, 3, 4, 5], SeededSource(9))
    b = secure_mbr634.pack([1, 2, 3, 4, 5], SeededSource(9))
    assert a.m == b.m


@pytest.mark.parametrize("ell,ellp,slots", [(1, 0, [(0, 0), (0, 1)]), (1, 1, [(0, 0), (0, 1), (2, 0), (2, 1)]),
                                           (0, 0, []), (2, 1, [(0, 0), (0, 1), (1, 1), (2, 0), (2, 1)])])
def test_msr_placement_examples(ell, ellp, slots):
    assert list(msr_placement(msr_params(6, 3, 4), ell, ellp).random_slots) == slots


def test_placement_counts_and_groups():
    for k in range(1, 7):
        for d in range(k, k + 4):
            p = mbr_params(d + 1, k, d)
            for ell in range(k):
                pm = mbr_placement(p, ell)
                assert pm.count == ell * d - comb(ell, 2) == len(set(pm.random_slots))
    for k in range(2, 7):
        p = msr_params(2 * k - 1, k, 2 * k - 2)
        a = p.alpha
        for ell in range(k):
            for ellp in range(ell + 1):
                pm = msr_placement(p, ell, ellp)
                assert pm.count == ell * a + (k - ell) * ellp
                assert len(set(pm.random_slots)) == pm.count
                assert all(r <= c if r < a else r - a <= c for r, c in pm.random_slots)  # upper representatives


def test_placement_errors():
    with pytest.raises(InvalidParams):
        mbr_placement(mbr_params(6, 3, 4), 3)
    with pytest.raises(InvalidParams):
        msr_placement(msr_params(6, 3, 4), 1, 2)
    with pytest.raises(InvalidParams):
        msr_placement(msr_params(8, 3, 6), 1, 0)


def test_zero_ell_is_plain_code(rng):
    plain = build_code("msr", 6, 3, 4)
    enc = build_encoding(msr_params(6, 3, 4), plain.q)
    msg = rng.integers(0, plain.q, size=6).tolist()
    assert plain.encode_message(msg) == encode(enc, pack_message(msr_params(6, 3, 4), None, msg, field=plain.field))


@pytest.mark.parametrize("mode,n,k,d,ell,ellp", [("mbr", 6, 3, 4, 1, 0), ("msr", 6, 3, 4, 1, 1), ("msr", 7, 4, 6, 2, 1)])
def test_randoms_as_message_gives_plain_code(mode, n, k, d, ell, ellp, rng):
    code = build_code(mode, n, k, d, ell, ellp)
    p = code.params
    z = rng.integers(0, code.q, size=code.free_count)
    slot_values = [0] * p.B
    for col, slot in enumerate(code.free_slots):
        slot_values[slot] = int(z[col])
    plain = encode(code.encoding, pack_message(p, None, slot_values, field=code.field))
    assert code.encode(code.pack_free(z)) == plain


@pytest.mark.parametrize("mode,n,k,d,ell,ellp", [("mbr", 6, 3, 4, 1, 0), ("mbr", 5, 2, 4, 1, 0),
                                                 ("msr", 6, 3, 4, 1, 1), ("msr", 6, 3, 4, 2, 0),
                                                 ("msr", 8, 3, 6, 1, 0), ("msr", 8, 3, 6, 1, 1),
                                                 ("msr", 6, 2, 4, 1, 0), ("msr", 5, 2, 3, 0, 0)])
def test_secure_round_trips(mode, n, k, d, ell, ellp, rng):
    code = build_code(mode, n, k, d, ell, ellp)
    msg = rng.integers(0, code.q, size=code.secrecy.B_s).tolist()
    shares = code.encode_message(msg, SeededSource(3))
    assert len(shares) == n and all(len(s.symbols) == code.alpha for s in shares)
    for ids in subsets(n, k):
        assert code.reconstruct([shares[i - 1] for i in ids]) == msg
    for f in range(1, n + 1):
        for helpers in itertools.combinations([h for h in range(1, n + 1) if h != f], d):
            syms = [code.helper_symbol(shares[h - 1], f) for h in helpers]
            assert code.repair(f, syms) == shares[f - 1]


def test_shortened_target_parameters():
    code = build_code("msr", 8, 3, 6, ell=1)
    assert (code.base.n, code.base.k, code.base.d) == (10, 5, 8)
    assert code.alpha == 4 and code.secrecy.B_s == 8
    assert code.n_virtual == 2 and code.virtual_nodes == [9, 10]
    assert code.roles.count(Role.DERIVED) == 2 * code.alpha
    assert "shortened from [10, 5, 8]" in code.describe()
    for v in code.virtual_nodes:
        assert not code.storage_coefficients(v).any()


def test_unshortened_is_identity():
    code = build_code("msr", 6, 3, 4, ell=1)
    assert code.n_virtual == 0 and code.base == code.params
    assert np.array_equal(code.embedding[:, np.argsort(code.free_slots)], np.eye(code.params.B, dtype=np.int64))


def test_degenerate_secrecy():
    with pytest.raises(DegenerateSecrecy):
        build_code("msr", 4, 2, 2, 1, 1)


def test_batch_matches_per_stripe(rng):
    code = build_code("msr", 8, 3, 6, 1, 1)
    z = rng.integers(0, code.q, size=(code.free_count, 7))
    shares = code.encode_batch(z)
    for s in range(7):
        per = code.encode(code.pack_free(z[:, s]))
        assert shares[:, :, s].tolist() == [list(x.symbols) for x in per]
    assert np.array_equal(code.decode_batch([2, 5, 7], shares[[1, 4, 6]]), z)
    helpers = [1, 2, 3, 5, 6, 8]
    syms = np.stack([code.helper_batch(shares[h - 1], 4) for h in helpers])
    assert np.array_equal(code.repair_batch(4, helpers, syms), shares[3])


def test_draw_free_layout():
    code = build_code("mbr", 6, 3, 4, ell=1, q=7)
    z = code.draw_free(np.arange(10).reshape(5, 2) % 7, SeededSource(1))
    assert z.shape == (code.free_count, 2)
    assert np.array_equal(z[:5], np.arange(10).reshape(5, 2) % 7)


def test_codec_errors(secure_mbr634):
    shares = secure_mbr634.encode_message([0] * 5, SeededSource(1))
    with pytest.raises(NotEnoughShares):
        secure_mbr634.reconstruct(shares[:2])
    with pytest.raises(DuplicateShare):
        secure_mbr634.reconstruct([shares[0], shares[0], shares[1]])
    syms = [secure_mbr634.helper_symbol(shares[h], 1) for h in (1, 2, 3)]
    with pytest.raises(NotEnoughHelpers):
        secure_mbr634.repair(1, syms)
    with pytest.raises(InvalidHelper):
        secure_mbr634.repair(9, syms)
