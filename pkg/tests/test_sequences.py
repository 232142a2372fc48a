import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import compositions, five_target_split
from tcamsplit.approx import closest
from tcamsplit.partition import DistanceKind, Partition, distance, sample_ordered_partition
from tcamsplit.sequences import (
    MalformedSequenceError,
    Transaction,
    TransactionSequence,
    _best_power,
    bit_matcher,
    bit_matcher_length,
    complexity,
    complexity_at_most,
    format_sequence,
    induced_partition,
    niagara,
    parse_sequence,
    truncate_to_widest,
)

BOT = None

# the exact sequence drawn for the five-target example, 0-indexed
FIVE_TARGET_SEQUENCE = TransactionSequence(
    ((3, 2, 0), (4, 1, 0), (2, 1, 1), (1, 0, 2), (0, BOT, 3)), 3)


def test_induced_examples():
    assert induced_partition(TransactionSequence(((0, BOT, 2),), 2), 1).parts == (4,)
    seq = TransactionSequence(((0, 1, 1), (1, 2, 2), (2, BOT, 3)), 3)
    assert induced_partition(seq, 3).parts == (2, 2, 4)
    assert induced_partition(FIVE_TARGET_SEQUENCE, 5) == five_target_split()


def test_induced_rejects_negative_flow():
    seq = TransactionSequence(((0, 1, 1), (0, BOT, 2)), 2)
    with pytest.raises(MalformedSequenceError):
        induced_partition(seq, 2)


@pytest.mark.parametrize("txs,width", [
    (((0, 1, 0),), 2),                       # no bottom
    (((0, BOT, 2), (1, BOT, 2)), 2),         # two bottoms
    (((0, BOT, 1),), 2),                     # bottom below W
    (((0, 0, 1), (0, BOT, 2)), 2),           # self transfer
    (((0, 1, 3), (0, BOT, 2)), 2),           # level above W
])
def test_malformed_sequences(txs, width):
    with pytest.raises(MalformedSequenceError):
        TransactionSequence(txs, width)


@pytest.mark.parametrize("parts,width,lam", [
    ((16,), 4, 1),
    ((8, 8), 4, 2),
    ((4, 1, 1, 1, 1), 3, 5),
    ((8, 4, 4), 4, 3),
    ((6, 9, 1), 4, 4),
    ((1, 2, 1), 2, 3),
    ((2, 2), 2, 2),
])
def test_complexity_examples(parts, width, lam):
    P = Partition(parts, width)
    assert complexity(P) == lam
    assert len(bit_matcher(P)) == lam
    assert len(niagara(P)) == lam


def _replay_levels(P, seq):
    """Apply transactions in order; after each level every residual is a multiple of the next power."""
    r = list(P.parts)
    levels = [t.level for t in seq if not t.is_bottom]
    assert levels == sorted(levels)
    for lvl in range(P.width):
        for t in seq:
            if t.level == lvl and not t.is_bottom:
                r[t.sender] -= t.size
                r[t.receiver] += t.size
        assert all(v % (2 << lvl) == 0 for v in r)
        assert all(v >= 0 for v in r)
    b = seq.bottom
    assert r[b.sender] == 1 << P.width and sum(r) == 1 << P.width


@given(st.integers(1, 40), st.integers(1, 30), st.randoms(use_true_random=False))
def test_bit_matcher_invariants(width, k, rng):
    k = min(k, 1 << width)
    P = sample_ordered_partition(k, width, rng)
    seq = bit_matcher(P)
    _replay_levels(P, seq)
    assert induced_partition(seq, k) == P


def test_niagara_matches_bit_matcher_exhaustive():
    for width in range(1, 6):
        for k in range(1, 5):
            for P in compositions(width, k):
                nseq = niagara(P)
                assert induced_partition(nseq, k) == P
                assert len(nseq) == bit_matcher_length(P.parts, width), P


def test_niagara_levels_non_increasing():
    rng = random.Random(2)
    for _ in range(300):
        P = sample_ordered_partition(rng.randint(1, 20), rng.randint(5, 24), rng)
        levels = [t.level for t in niagara(P)]
        assert levels == sorted(levels, reverse=True)


def test_stop_after_exhaustive():
    for width in range(1, 5):
        for k in range(1, 5):
            for P in compositions(width, k):
                lam = complexity(P)
                for n in range(0, lam + 2):
                    fits = n >= lam
                    assert (niagara(P, stop_after=n) is not None) == fits
                    if n >= 1:
                        assert complexity_at_most(P.parts, width, n) == fits


def test_complexity_at_most_large():
    P = sample_ordered_partition(200, 32, random.Random(1))
    lam = complexity(P)
    assert complexity_at_most(P.parts, 32, lam)
    assert not complexity_at_most(P.parts, 32, lam - 1)
    assert not complexity_at_most(P.parts, 32, 3)


def test_best_power_bruteforce():
    for width in range(0, 8):
        for a in range(1, 70):
            for b in range(1, 70):
                costs = [abs(a - (1 << h)) + abs(b - (1 << h)) for h in range(width + 1)]
                low = min(costs)
                want = max(h for h, c in enumerate(costs) if c == low)
                assert _best_power(a, b, width) == want, (a, b, width)


def test_truncation_five_targets():
    P = five_target_split()
    assert truncate_to_widest(FIVE_TARGET_SEQUENCE, 2).parts == (4, 4, 0, 0, 0)
    for seq in (FIVE_TARGET_SEQUENCE, niagara(P), bit_matcher(P)):
        T = truncate_to_widest(seq, 2, 5)
        assert distance(T, P, DistanceKind.LINF) == 3
    assert truncate_to_widest(FIVE_TARGET_SEQUENCE, 1).parts == (8, 0, 0, 0, 0)
    assert truncate_to_widest(FIVE_TARGET_SEQUENCE, 5) == P
    with pytest.raises(ValueError):
        truncate_to_widest(FIVE_TARGET_SEQUENCE, 6)
    with pytest.raises(ValueError):
        truncate_to_widest(FIVE_TARGET_SEQUENCE, 0)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_truncation_family_ratio(m):
    width = m + 2
    P = Partition((1 << (m + 1),) + (1,) * ((1 << width) - (1 << (m + 1))), width)
    trunc = truncate_to_widest(niagara(P), 2, P.k)
    opt = closest(P, 2, DistanceKind.LINF, with_table=False).error
    ratio = distance(trunc, P, DistanceKind.LINF) / opt
    assert ratio == 2 - Fraction(1, 2**m)


def test_truncation_of_niagara_is_a_partition():
    rng = random.Random(9)
    for _ in range(300):
        P = sample_ordered_partition(rng.randint(2, 16), rng.randint(4, 16), rng)
        seq = niagara(P)
        for n in range(1, len(seq) + 1):
            T = truncate_to_widest(seq, n, P.k)
            assert complexity(T) <= n


def test_sequence_text_roundtrip():
    text = format_sequence(FIVE_TARGET_SEQUENCE)
    assert text.splitlines()[-1] == "[0 ->_3 BOT]"
    assert parse_sequence(text, 3) == FIVE_TARGET_SEQUENCE
    assert str(Transaction(2, 1, 1)) == "[2 ->_1 1]"
