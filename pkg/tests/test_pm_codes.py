import itertools

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from pmrc.errors import (DuplicateShare, FieldTooSmall, InvalidHelper, LengthMismatch, NotEnoughHelpers,
                         NotEnoughShares, PaddingError, PointSelectionFailed, ShapeError)
from pmrc.gf import GF
from pmrc.linalg import MatrixFq, matmul
from pmrc.params import Mode, mbr_params, msr_params
from pmrc.pm_codes import (MessageMatrix, NodeShare, Padding, Role, build_encoding, canonical_slots,
                           encode, helper_symbol, matrix_from_slots, mbr_reconstruct, pack_message,
                           reconstruct, repair, select_points, stripe, unstripe)
from conftest import subsets

EX1 = mbr_params(6, 3, 4)
MSR634 = msr_params(6, 3, 4)


def mbr634_message():
    # M for (6,3,4) with u_i = i
    return [[1, 2, 3, 7], [2, 4, 5, 8], [3, 5, 6, 9], [7, 8, 9, 0]]


def test_mbr634_psi():
    enc = build_encoding(EX1, 7)
    assert enc.points == (1, 2, 3, 4, 5, 6)
    assert enc.psi.tolist() == [[1, i % 7, i * i % 7, i ** 3 % 7] for i in range(1, 7)]
    assert enc.phi.shape == (6, 3) and enc.delta.shape == (6, 1)


def test_mbr634_message_matrix():
    mm = pack_message(EX1, None, list(range(1, 10)), field=GF(11))
    assert mm.m.tolist() == mbr634_message()
    assert all(r is Role.MESSAGE for r in mm.roles)
    assert mm.slot_values() == list(range(1, 10))


def test_msr_squares_collide_at_7():
    with pytest.raises(PointSelectionFailed):
        build_encoding(MSR634, 7)
    with pytest.raises(PointSelectionFailed):
        build_encoding(MSR634, 7, points=[1, 2, 3, 4, 5, 6])


def test_msr_point_search_at_11():
    enc = build_encoding(MSR634, 11)
    squares = [x * x % 11 for x in enc.points]
    assert len(set(squares)) == 6
    assert enc.points == (1, 2, 3, 4, 5, 0)
    assert list(enc.lambdas) == squares
    # row i = [phi_i, lambda_i phi_i]
    for i, x in enumerate(enc.points):
        row = enc.psi.data[i]
        assert list(row[2:]) == [(x * x * v) % 11 for v in row[:2]]


def test_select_points_against_enumeration():
    for q in (11, 13, 17):
        for alpha in (1, 2, 3, 4):
            n = len({pow(x, alpha, q) for x in range(q)})
            pts = select_points(Mode.MSR, q, n, alpha)
            assert len({pow(x, alpha, q) for x in pts}) == n
            with pytest.raises((PointSelectionFailed, FieldTooSmall)):
                select_points(Mode.MSR, q, n + 1, alpha)


def test_field_too_small():
    with pytest.raises(FieldTooSmall):
        build_encoding(EX1, 5)


def test_single_row_code():
    enc = build_encoding(mbr_params(2, 1, 1), 3)
    assert enc.psi.tolist() == [[1], [1]]


@pytest.mark.parametrize("u,expect", [(1, lambda i: (1, 0, 0, 0)), (2, lambda i: (i % 7, 1, 0, 0))])
def test_encode_unit_messages(u, expect):
    enc = build_encoding(EX1, 7)
    msg = [0] * 9
    msg[u - 1] = 1
    shares = encode(enc, pack_message(EX1, None, msg, field=GF(7)))
    assert [s.symbols for s in shares] == [expect(i) for i in range(1, 7)]


def test_encode_zero_and_shape():
    enc = build_encoding(EX1, 7)
    shares = encode(enc, pack_message(EX1, None, [0] * 9, field=GF(7)))
    assert all(s.symbols == (0, 0, 0, 0) for s in shares)
    bad = MessageMatrix(MatrixFq.zeros(3, 3, GF(7)), Mode.MBR, (), ())
    with pytest.raises(ShapeError):
        encode(enc, bad)


def test_pack_length_mismatch():
    with pytest.raises(LengthMismatch):
        pack_message(EX1, None, [1, 2], field=GF(7))


def _codes():
    return [(EX1, 7), (mbr_params(5, 2, 4), 5), (mbr_params(7, 4, 5), 7), (MSR634, 11),
            (msr_params(4, 2, 2), 5), (msr_params(8, 4, 6), 11), (mbr_params(2, 1, 1), 2)]


@pytest.mark.parametrize("p,q", _codes())
def test_exhaustive_reconstruct_and_repair(p, q, rng):
    enc = build_encoding(p, q)
    field = GF(q)
    for _ in range(3):
        msg = rng.integers(0, q, size=p.B).tolist()
        mm = pack_message(p, None, msg, field=field)
        shares = encode(enc, mm)
        for ids in subsets(p.n, p.k):
            assert reconstruct(enc, [shares[i - 1] for i in ids]) == msg
        for f in range(1, p.n + 1):
            others = [h for h in range(1, p.n + 1) if h != f]
            for helpers in itertools.combinations(others, p.d):
                syms = [helper_symbol(enc, shares[h - 1], f) for h in helpers]
                assert repair(enc, f, syms) == shares[f - 1]


@pytest.mark.parametrize("p,q", _codes()[:4])
def test_symmetry_after_packing(p, q, rng):
    mm = pack_message(p, None, rng.integers(0, q, size=p.B).tolist(), field=GF(q))
    m = mm.m.data
    if p.mode is Mode.MBR:
        assert np.array_equal(m, m.T)
        assert not m[p.k:, p.k:].any()
    else:
        a = p.alpha
        assert np.array_equal(m[:a], m[:a].T) and np.array_equal(m[a:], m[a:].T)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 10), min_size=6, max_size=6), st.lists(st.integers(0, 10), min_size=6, max_size=6))
def test_encode_is_linear(a, b):
    enc = build_encoding(MSR634, 11)
    f = GF(11)
    ea = encode(enc, pack_message(MSR634, None, a, field=f))
    eb = encode(enc, pack_message(MSR634, None, b, field=f))
    es = encode(enc, pack_message(MSR634, None, [(x + y) % 11 for x, y in zip(a, b)], field=f))
    for x, y, s in zip(ea, eb, es):
        assert tuple((u + v) % 11 for u, v in zip(x.symbols, y.symbols)) == s.symbols


def test_msr_toy_two_by_two():
    p = msr_params(4, 2, 2)
    enc = build_encoding(p, 5)
    s1, s2 = 3, 4
    shares = encode(enc, pack_message(p, None, [s1, s2], field=GF(5)))
    for i, x in enumerate(enc.points):
        assert shares[i].symbols == ((s1 + x * s2) % 5,)
    assert reconstruct(enc, shares[1:3]) == [s1, s2]


def test_helper_symbol_depends_only_on_pair(rng):
    enc = build_encoding(EX1, 7)
    shares = encode(enc, pack_message(EX1, None, rng.integers(0, 7, size=9).tolist(), field=GF(7)))
    m = MatrixFq(mbr634_message(), GF(7))
    # psi_h^T M psi_f, directly
    sh = encode(enc, pack_message(EX1, None, list(range(1, 10)), field=GF(7)))
    for h, f in [(2, 1), (5, 3)]:
        direct = matmul(matmul(enc.psi[h - 1], m), enc.psi[f - 1].T)[0, 0]
        assert helper_symbol(enc, sh[h - 1], f).value == direct


def test_reconstruct_errors():
    enc = build_encoding(EX1, 7)
    shares = encode(enc, pack_message(EX1, None, [0] * 9, field=GF(7)))
    with pytest.raises(DuplicateShare):
        mbr_reconstruct(enc, [shares[0], shares[0], shares[1]])
    with pytest.raises(NotEnoughShares):
        reconstruct(enc, shares[:2])


def test_repair_errors():
    enc = build_encoding(EX1, 7)
    shares = encode(enc, pack_message(EX1, None, [1] * 9, field=GF(7)))
    syms = [helper_symbol(enc, shares[h - 1], 1) for h in (2, 3, 4, 5)]
    with pytest.raises(NotEnoughHelpers):
        repair(enc, 1, syms[:3])
    with pytest.raises(InvalidHelper):
        repair(enc, 1, syms[:3] + [helper_symbol(enc, shares[0], 1)])
    with pytest.raises(InvalidHelper):
        repair(enc, 1, syms[:3] + [helper_symbol(enc, shares[5], 2)])


def test_canonical_slot_counts():
    for k in range(1, 6):
        for d in range(k, 8):
            assert len(canonical_slots(Mode.MBR, k, d, d)) == mbr_params(d + 1, k, d).B
    for k in range(2, 6):
        a = k - 1
        assert len(canonical_slots(Mode.MSR, k, 2 * k - 2, a)) == k * a


@pytest.mark.parametrize("count,stripes,last_pad", [(5, 1, 0), (0, 1, 5), (11, 3, 4), (10, 2, 0)])
def test_stripe_layout(count, stripes, last_pad):
    out, pad = stripe(list(range(count)), 5, pad=99)
    assert len(out) == stripes == pad.stripes
    assert out[-1].count(99) == last_pad
    assert unstripe(out, pad) == list(range(count))


@given(st.lists(st.integers(0, 6)), st.integers(1, 9))
def test_stripe_round_trip(symbols, size):
    out, pad = stripe(symbols, size)
    assert unstripe(out, pad) == symbols


def test_unstripe_rejects_bad_padding():
    out, pad = stripe(list(range(11)), 5)
    with pytest.raises(PaddingError):
        unstripe(out, Padding(20, 3, 5))
    with pytest.raises(PaddingError):
        unstripe(out, Padding(9, 3, 5))
    with pytest.raises(PaddingError):
        unstripe(out[:2], pad)
