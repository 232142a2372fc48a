"""Transaction sequences: Bit Matcher, Niagara, complexity and truncation.

A transaction ``[i ->_l j]`` moves ``2**l`` from target ``i`` to target ``j``.
The terminal transaction ``[i ->_W BOT]`` stands for the match-all rule. A
sequence *induces* the partition that it drives to all zeros.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

from .partition import Partition

BOT = None


class MalformedSequenceError(ValueError):
    pass


class Transaction(NamedTuple):
    sender: int
    receiver: Optional[int]  # None is the bottom symbol
    level: int

    @property
    def is_bottom(self) -> bool:
        return self.receiver is None

    @property
    def size(self) -> int:
        return 1 << self.level

    def __str__(self):
        dst = "BOT" if self.receiver is None else str(self.receiver)
        return f"[{self.sender} ->_{self.level} {dst}]"


@dataclass(frozen=True)
class TransactionSequence:
    transactions: tuple
    width: int

    def __post_init__(self):
        txs = tuple(t if type(t) is Transaction else Transaction(*t) for t in self.transactions)
        bottoms = [t for t in txs if t[1] is None]
        if len(bottoms) != 1:
            raise MalformedSequenceError(f"expected one bottom transaction, found {len(bottoms)}")
        if bottoms[0].level != self.width:
            raise MalformedSequenceError("the bottom transaction must have level W")
        width = self.width
        for t in txs:
            if t[0] == t[1] or not 0 <= t[2] <= width:
                raise MalformedSequenceError(f"{t} sends to itself or has a level outside [0, {width}]")
        object.__setattr__(self, "transactions", txs)

    def __len__(self):
        return len(self.transactions)

    def __iter__(self):
        return iter(self.transactions)

    @property
    def bottom(self) -> Transaction:
        return next(t for t in self.transactions if t.is_bottom)


def _net_flow(transactions, k: int) -> List[int]:
    parts = [0] * k
    for s, r, lvl in transactions:
        if s >= k or (r is not None and r >= k):
            raise MalformedSequenceError(f"index out of range for k={k}")
        size = 1 << lvl
        parts[s] += size
        if r is not None:
            parts[r] -= size
    return parts


def induced_partition(seq: TransactionSequence, k: int) -> Partition:
    """The partition that ``seq`` zeroes: sent minus received per target."""
    parts = _net_flow(seq.transactions, k)
    if any(p < 0 for p in parts):
        raise MalformedSequenceError(f"negative net flow {parts}")
    if sum(parts) != 1 << seq.width:
        raise MalformedSequenceError("net flows do not sum to 2**W")
    return Partition(tuple(parts), seq.width)


def _bit_matcher(parts: List[int], width: int, record: bool = True):
    """Run Bit Matcher on a private copy of ``parts``.

    Returns the transaction list (or only its length when ``record`` is
    false). Equal weights keep index order; the i-th smallest of the low half
    sends to the i-th smallest of the high half.
    """
    p = list(parts)
    k = len(p)
    out = [] if record else None
    count = 0
    for level in range(width):
        bit = 1 << level
        # bitlex_key inlined; equal keys fall back to index order
        ranked = [(bin(v)[:1:-1], i) for i, v in enumerate(p) if v & bit]
        if not ranked:
            continue
        if len(ranked) & 1:
            raise AssertionError(f"odd number of weights with bit {level} set")
        ranked.sort()
        half = len(ranked) >> 1
        for (_, lo), (_, hi) in zip(ranked[:half], ranked[half:]):
            p[lo] -= bit
            p[hi] += bit
            if record:
                out.append(Transaction(lo, hi, level))
        count += half
    top = [i for i in range(k) if p[i]]
    if len(top) != 1 or p[top[0]] != 1 << width:
        raise AssertionError(f"Bit Matcher did not converge: {p}")
    count += 1
    if record:
        out.append(Transaction(top[0], BOT, width))
        return out
    return count


def bit_matcher(p: Partition) -> TransactionSequence:
    return TransactionSequence(tuple(_bit_matcher(p.parts, p.width)), p.width)


def bit_matcher_length(parts, width: int) -> int:
    return _bit_matcher(list(parts), width, record=False)


def _best_power(a: int, b: int, width: int) -> int:
    """Largest h in [0, width] minimising |a - 2^h| + |b - 2^h| for a, b > 0.

    The cost falls while 2^h <= min(a, b), is flat up to max(a, b) and rises
    after, so only three exponents can be the largest minimiser.
    """
    lo, hi = (a, b) if a <= b else (b, a)
    h0 = lo.bit_length() - 1
    # the cost is unimodal in h, so clamping to the width keeps the optimum
    cands = {min(h, width) for h in (h0, h0 + 1, hi.bit_length() - 1)}
    best_h, best_cost = -1, None
    for h in sorted(cands):
        s = 1 << h
        cost = abs(a - s) + abs(b - s)
        if best_cost is None or cost <= best_cost:
            best_h, best_cost = h, cost
    return best_h


def _niagara(parts: List[int], width: int, stop_after: Optional[int] = None):
    r = list(parts)
    k = len(r)
    top = max(range(k), key=lambda i: (r[i], -i))
    r[top] -= 1 << width
    out = [(top, BOT, width)]
    if stop_after is not None and stop_after < 1:
        return None
    maxheap = [(-v, i) for i, v in enumerate(r)]
    minheap = [(v, i) for i, v in enumerate(r)]
    heapq.heapify(maxheap)
    heapq.heapify(minheap)
    while True:
        while -maxheap[0][0] != r[maxheap[0][1]]:
            heapq.heappop(maxheap)
        while minheap[0][0] != r[minheap[0][1]]:
            heapq.heappop(minheap)
        vi, i = maxheap[0]
        vi = -vi
        if vi == 0:
            break
        vj, j = minheap[0]
        if stop_after is not None and len(out) >= stop_after:
            return None
        h = _best_power(vi, -vj, width)
        s = 1 << h
        r[i] -= s
        r[j] += s
        out.append((i, j, h))
        heapq.heappush(maxheap, (-r[i], i))
        heapq.heappush(maxheap, (-r[j], j))
        heapq.heappush(minheap, (r[i], i))
        heapq.heappush(minheap, (r[j], j))
    return out


def niagara(p: Partition, stop_after: Optional[int] = None) -> Optional[TransactionSequence]:
    """Niagara's greedy sequence for ``p``.

    With ``stop_after`` set, returns None as soon as the sequence would need
    more than that many transactions.
    """
    txs = _niagara(list(p.parts), p.width, stop_after)
    if txs is None:
        return None
    return TransactionSequence(tuple(txs), p.width)


def complexity(p: Partition) -> int:
    """Size of the smallest prefix-rule table realising ``p``."""
    return bit_matcher_length(p.parts, p.width)


def complexity_at_most(parts, width: int, n: int) -> bool:
    """Decide whether the complexity is at most ``n``.

    Early-stopped Niagara costs about k + n lg k, Bit Matcher W k; pick the
    cheaper one.
    """
    k = len(parts)
    if n * max(1, (k - 1).bit_length()) < width * k:
        return _niagara(list(parts), width, stop_after=n) is not None
    return bit_matcher_length(parts, width) <= n


def truncate_to_widest(seq: TransactionSequence, n: int, k: Optional[int] = None) -> Partition:
    """Partition induced by the ``n`` widest transactions of ``seq``.

    Equal levels prefer the transactions generated first, so on a Niagara
    sequence (whose levels never increase) this keeps its first n entries,
    i.e. the last n rules of the table. The bottom transaction is always kept.
    """
    if not 1 <= n <= len(seq):
        raise ValueError(f"n must lie in [1, {len(seq)}]")
    txs = seq.transactions
    if k is None:
        k = 1 + max(max(t.sender, -1 if t.receiver is None else t.receiver) for t in txs)
    order = sorted(range(len(txs)), key=lambda idx: (not txs[idx].is_bottom, -txs[idx].level, idx))
    kept = [txs[idx] for idx in order[:n]]
    parts = _net_flow(kept, k)
    assert all(v >= 0 for v in parts), f"truncation produced negative parts {parts}"
    return Partition(tuple(parts), seq.width)


_TX_RE = re.compile(r"\[\s*(\d+)\s*->_(\d+)\s+(\d+|BOT)\s*\]")


def format_sequence(seq: TransactionSequence) -> str:
    return "".join(f"{t}\n" for t in seq.transactions)


def parse_sequence(text: str, width: int) -> TransactionSequence:
    txs = []
    for m in _TX_RE.finditer(text):
        dst = None if m.group(3) == "BOT" else int(m.group(3))
        txs.append(Transaction(int(m.group(1)), dst, int(m.group(2))))
    return TransactionSequence(tuple(txs), width)
