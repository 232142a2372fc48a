import random

import numpy as np
import pytest

from conftest import compositions, five_target_split
from test_sequences import FIVE_TARGET_SEQUENCE
from tcamsplit.partition import Partition, sample_ordered_partition
from tcamsplit.sequences import TransactionSequence, bit_matcher, bit_matcher_length, niagara
from tcamsplit.tcam import (
    InvalidTableError,
    PrefixRule,
    SynthesisError,
    TcamTable,
    enumerate_induced,
    format_table,
    is_minimal,
    parse_table,
    redundant_rules,
    sequence_to_table,
    table_induced_partition,
)


def address_map(table):
    """Target of every address, by scanning the rules in priority order."""
    owner = []
    for addr in range(1 << table.width):
        for r in table.rules:
            if addr >> (table.width - r.length) == r.value:
                owner.append(r.target)
                break
    return owner


def test_match_all_only():
    seq = TransactionSequence(((2, None, 4),), 4)
    table = sequence_to_table(seq, 3)
    assert table.rules == (PrefixRule(0, 0, 2),)
    assert table_induced_partition(table).parts == (0, 0, 16)


def test_five_target_table():
    table = sequence_to_table(FIVE_TARGET_SEQUENCE, 5)
    assert len(table) == 5
    assert table_induced_partition(table) == five_target_split()
    assert enumerate_induced(table) == five_target_split()
    assert is_minimal(table)
    # the two widest rules alone
    head = TcamTable(table.rules[-2:], 3, 5)
    assert table_induced_partition(head).parts == (4, 4, 0, 0, 0)


def test_two_rule_table():
    seq = TransactionSequence(((1, 0, 1), (0, None, 3)), 3)
    table = sequence_to_table(seq, 5)
    assert len(table) == 2
    assert table_induced_partition(table).parts == (6, 2, 0, 0, 0)
    assert format_table(table) == "00* -> 1\n*** -> 0\n"


def test_roundtrip_exhaustive_bit_matcher():
    for width in range(1, 7):
        for k in range(1, 5):
            for P in compositions(width, k):
                table = sequence_to_table(bit_matcher(P), k)
                assert table_induced_partition(table) == P
                assert len(table) == bit_matcher_length(P.parts, width)


def test_roundtrip_exhaustive_niagara():
    for width in range(1, 6):
        for k in range(1, 5):
            for P in compositions(width, k):
                table = sequence_to_table(niagara(P), k)
                assert enumerate_induced(table) == P
                assert is_minimal(table)


def test_roundtrip_random_large():
    rng = random.Random(4)
    for _ in range(300):
        P = sample_ordered_partition(rng.randint(1, 40), rng.choice([16, 32, 48, 64]), rng)
        for seq in (bit_matcher(P), niagara(P)):
            table = sequence_to_table(seq, P.k)
            assert table_induced_partition(table) == P
            assert len(table) == len(seq)


def test_removing_any_rule_changes_mapping():
    rng = random.Random(8)
    for _ in range(60):
        width = rng.randint(2, 7)
        P = sample_ordered_partition(rng.randint(2, min(6, 1 << width)), width, rng)
        table = sequence_to_table(bit_matcher(P), P.k)
        base = address_map(table)
        for i in range(len(table) - 1):
            rules = table.rules[:i] + table.rules[i + 1:]
            assert address_map(TcamTable(rules, width, P.k)) != base


def _random_table(rng, width, k, count):
    prefixes = {(0, 0)}
    while len(prefixes) < count:
        length = rng.randint(1, width)
        prefixes.add((rng.randrange(1 << length), length))
    rules = [PrefixRule(v, l, rng.randrange(k)) for v, l in prefixes]
    rules.sort(key=lambda r: (-r.length, r.value))
    return TcamTable(tuple(rules), width, k)


def test_induced_agrees_with_enumeration():
    rng = random.Random(3)
    for _ in range(200):
        width = rng.randint(1, 12)
        table = _random_table(rng, width, rng.randint(1, 5), rng.randint(1, min(40, 1 << width)))
        assert table_induced_partition(table) == enumerate_induced(table)
        counts = np.bincount(address_map(table), minlength=table.targets)
        assert tuple(int(c) for c in counts) == enumerate_induced(table).parts


def test_redundancy_detection():
    # same target as the enclosing rule
    t = parse_table("10* -> 1\n1** -> 1\n*** -> 0\n")
    assert redundant_rules(t) == [0]
    # fully shadowed rule
    t = parse_table("10 -> 1\n11 -> 1\n1* -> 0\n** -> 1\n")
    assert redundant_rules(t) == [2]
    t = parse_table("1** -> 1\n*** -> 0\n")
    assert is_minimal(t)


def test_parse_format_roundtrip():
    text = "111 -> 3\n1** -> 2\n*** -> 1\n"
    table = parse_table(text, targets=4)
    assert format_table(table) == text
    assert table_induced_partition(table).parts == (0, 4, 3, 1)
    assert parse_table("# comment\n\n*** -> 0  # all\n").targets == 1


@pytest.mark.parametrize("text", [
    "",
    "1** -> 0\n",                      # no match-all
    "*** -> 0\n1** -> 1\n",            # wrong order
    "1** -> 0\n1** -> 1\n*** -> 0\n",  # duplicate prefix
    "1*1 -> 0\n*** -> 0\n",            # not a prefix
    "1** 0\n*** -> 0\n",
    "1* -> 0\n*** -> 0\n",
])
def test_parse_rejects(text):
    with pytest.raises(InvalidTableError):
        parse_table(text)


def test_table_validation():
    with pytest.raises(InvalidTableError):
        TcamTable((), 3, 1)
    with pytest.raises(InvalidTableError):
        TcamTable(((0, 0, 2),), 3, 2)
    with pytest.raises(InvalidTableError):
        TcamTable(((4, 2, 0), (0, 0, 0)), 3, 1)


def test_enumeration_guard():
    table = TcamTable(((0, 0, 0),), 21, 1)
    assert table_induced_partition(table).parts == (1 << 21,)
    with pytest.raises(ValueError):
        enumerate_induced(table)


def test_synthesis_error():
    # target 1 owns nothing when the level-1 block has to be carved from it
    seq = TransactionSequence(((2, 1, 1), (1, 0, 0), (0, None, 2)), 2)
    with pytest.raises(SynthesisError):
        sequence_to_table(seq, 3)
