"""Prefix-rule tables: synthesis from transaction sequences and evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np

from .partition import Partition
from .sequences import TransactionSequence

ENUMERATION_MAX_WIDTH = 20


class InvalidTableError(ValueError):
    pass


class SynthesisError(RuntimeError):
    pass


class PrefixRule(NamedTuple):
    value: int  # the prefix bits as an integer, most significant bit first
    length: int
    target: int

    def pattern(self, width: int) -> str:
        bits = format(self.value, f"0{self.length}b") if self.length else ""
        return bits + "*" * (width - self.length)

    def span(self, width: int) -> tuple:
        """First address and number of addresses covered by the prefix."""
        size = 1 << (width - self.length)
        return self.value * size, size


@dataclass(frozen=True)
class TcamTable:
    rules: tuple
    width: int
    targets: int

    def __post_init__(self):
        rules = tuple(r if type(r) is PrefixRule else PrefixRule(*r) for r in self.rules)
        if not rules:
            raise InvalidTableError("a table needs at least the match-all rule")
        prev = self.width
        seen = set()
        for r in rules:
            if not 0 <= r.length <= self.width:
                raise InvalidTableError(f"prefix length {r.length} outside [0, {self.width}]")
            if not 0 <= r.value < (1 << r.length):
                raise InvalidTableError(f"prefix value {r.value} does not fit {r.length} bits")
            if not 0 <= r.target < self.targets:
                raise InvalidTableError(f"target {r.target} outside [0, {self.targets})")
            if r.length > prev:
                raise InvalidTableError("rules must be sorted by non-increasing prefix length")
            if (r.value, r.length) in seen:
                raise InvalidTableError(f"duplicate prefix {r.pattern(self.width)}")
            seen.add((r.value, r.length))
            prev = r.length
        if rules[-1].length != 0:
            raise InvalidTableError("the last rule must be the match-all rule")
        object.__setattr__(self, "rules", rules)

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)


def sequence_to_table(seq: TransactionSequence, k: int) -> TcamTable:
    """Embed a transaction sequence into the binary trie as prefix rules.

    Transactions are replayed from the widest down. ``[i ->_l j]`` becomes a
    rule of length W-l for target i, carved out of the deepest rule of
    target j that still owns at least 2^l addresses.

    Blocks arrive in non-increasing size, so the free part of every rule is
    a suffix of its range and the leftmost free aligned block is simply the
    first free address.
    """
    width = seq.width
    total = 1 << width
    bottom = seq.bottom
    starts = [0]
    lengths = [0]
    targets = [bottom.sender]
    owned = [total]
    by_target = {bottom.sender: [0]}
    rest = [t for t in seq.transactions if t[1] is not None]
    rest.sort(key=lambda t: -t[2])
    for sender, receiver, level in rest:
        size = 1 << level
        host = -1
        for nd in by_target.get(receiver, ()):
            if owned[nd] >= size and (host < 0 or lengths[nd] > lengths[host]
                                      or (lengths[nd] == lengths[host] and starts[nd] < starts[host])):
                host = nd
        if host < 0:
            raise SynthesisError(f"no rule of target {receiver} can host a block of {size}")
        start = starts[host] + (total >> lengths[host]) - owned[host]
        owned[host] -= size
        by_target.setdefault(sender, []).append(len(starts))
        starts.append(start)
        lengths.append(width - level)
        targets.append(sender)
        owned.append(size)
    order = sorted(range(len(starts)), key=lambda i: (-lengths[i], starts[i]))
    rules = tuple(PrefixRule(starts[i] >> (width - lengths[i]), lengths[i], targets[i]) for i in order)
    return TcamTable(rules, width, k)


def _ownership(table: TcamTable):
    """Addresses owned by each rule and the index of its closest enclosing rule."""
    width = table.width
    spans = [(r.value << (width - r.length), 1 << (width - r.length)) for r in table.rules]
    order = sorted((start, -size, i) for i, (start, size) in enumerate(spans))
    owned = [size for _, size in spans]
    parent = [-1] * len(spans)
    stack: List[tuple] = []  # (end, index) of the open enclosing ranges
    for start, neg, i in order:
        while stack and stack[-1][0] <= start:
            stack.pop()
        if stack:
            top = stack[-1][1]
            parent[i] = top
            owned[top] += neg
        stack.append((start - neg, i))
    return owned, parent


def table_induced_partition(table: TcamTable) -> Partition:
    """Per-target address counts, computed from the nesting of the prefixes."""
    owned, _ = _ownership(table)
    parts = [0] * table.targets
    for rule, n in zip(table.rules, owned):
        parts[rule.target] += n
    return Partition(tuple(parts), table.width)


def redundant_rules(table: TcamTable) -> List[int]:
    """Indices of rules whose removal would leave the mapping unchanged."""
    owned, parent = _ownership(table)
    out = []
    for i, rule in enumerate(table.rules):
        if parent[i] < 0:
            continue
        if owned[i] == 0 or table.rules[parent[i]].target == rule.target:
            out.append(i)
    return out


def is_minimal(table: TcamTable) -> bool:
    return not redundant_rules(table)


def enumerate_induced(table: TcamTable) -> Partition:
    """Per-target address counts by resolving every address (first match wins)."""
    width = table.width
    if width > ENUMERATION_MAX_WIDTH:
        raise ValueError(f"refusing to enumerate 2**{width} addresses")
    owner = np.full(1 << width, -1, dtype=np.int64)
    for rule in reversed(table.rules):
        start, size = rule.span(width)
        owner[start:start + size] = rule.target
    if (owner < 0).any():
        raise InvalidTableError("some addresses match no rule")
    counts = np.bincount(owner, minlength=table.targets)
    return Partition(tuple(int(c) for c in counts), width)


def format_table(table: TcamTable) -> str:
    return "".join(f"{r.pattern(table.width)} -> {r.target}\n" for r in table.rules)


def parse_table(text: str, targets: int = None) -> TcamTable:
    rules = []
    width = None
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            pattern, target = (s.strip() for s in line.split("->"))
        except ValueError:
            raise InvalidTableError(f"bad rule line {line!r}") from None
        if width is None:
            width = len(pattern)
        elif len(pattern) != width:
            raise InvalidTableError("all patterns must have the same width")
        bits = pattern.rstrip("*")
        if "*" in bits or set(bits) - {"0", "1"}:
            raise InvalidTableError(f"{pattern!r} is not a prefix pattern")
        rules.append(PrefixRule(int(bits, 2) if bits else 0, len(bits), int(target)))
    if width is None:
        raise InvalidTableError("empty table")
    if targets is None:
        targets = 1 + max(r.target for r in rules)
    return TcamTable(tuple(rules), width, targets)
