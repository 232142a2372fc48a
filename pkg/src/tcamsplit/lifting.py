"""Lifting problems: raise lower bounds X inside capacities C to sum 2^W.

Three special cases have exact solvers here: unit capacities, capacities in
{1, 2, 3}, and all-zero weights with arbitrary capacities. Infeasible
instances give ``None`` so callers can fold them into a search.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .partition import bitlex_key
from .sequences import bit_matcher_length

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LiftingInstance:
    weights: tuple
    capacities: tuple
    width: int

    def __post_init__(self):
        xs = tuple(int(x) for x in self.weights)
        cs = tuple(int(c) for c in self.capacities)
        if len(xs) != len(cs) or not xs:
            raise ValueError("weights and capacities must be non-empty and of equal length")
        if any(v < 0 for v in xs + cs):
            raise ValueError("weights and capacities must be non-negative")
        if self.width < 0:
            raise ValueError("width must be non-negative")
        object.__setattr__(self, "weights", xs)
        object.__setattr__(self, "capacities", cs)

    @property
    def k(self) -> int:
        return len(self.weights)

    def excess(self) -> int:
        return excess(self)

    def is_feasible(self) -> bool:
        e = excess(self)
        return 0 <= e <= sum(self.capacities)


@dataclass(frozen=True)
class Lifting:
    values: tuple
    width: int

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    @property
    def complexity(self) -> int:
        return bit_matcher_length(self.values, self.width)

    def is_valid_for(self, inst: LiftingInstance) -> bool:
        if sum(self.values) != 1 << inst.width or len(self.values) != inst.k:
            return False
        return all(x <= y <= x + c for x, y, c in zip(inst.weights, self.values, inst.capacities))


def excess(inst: LiftingInstance) -> int:
    return (1 << inst.width) - sum(inst.weights)


def _feasible(xs: Sequence[int], cs: Sequence[int], width: int) -> bool:
    e = (1 << width) - sum(xs)
    return 0 <= e <= sum(cs)


def _cap01(xs: Sequence[int], cs: Sequence[int], width: int) -> Optional[List[int]]:
    if not _feasible(xs, cs, width):
        return None
    e = (1 << width) - sum(xs)
    ys = list(xs)
    if e == 0:
        return ys
    # stable sort: among equal values the lowest index is lifted first
    cands = sorted((i for i, c in enumerate(cs) if c), key=lambda i: bitlex_key(xs[i]), reverse=True)
    for i in cands[:e]:
        ys[i] += 1
    return ys


def _cap123(xs: Sequence[int], cs: Sequence[int], width: int) -> Optional[List[int]]:
    if not _feasible(xs, cs, width):
        return None
    if width == 0:
        return _cap01(xs, [min(c, 1) for c in cs], 0)
    e = (1 << width) - sum(xs)
    odd = [i for i, x in enumerate(xs) if x & 1]
    if e <= len(odd):
        log.debug("cap123: excess %d fits the %d odd weights", e, len(odd))
        return _cap01(xs, [1] * len(xs), width)
    x2 = list(xs)
    c2 = list(cs)
    for i in odd:
        x2[i] += 1
        c2[i] -= 1
    assert all(x % 2 == 0 for x in x2), "phase two needs even weights"
    e2 = (1 << width) - sum(x2)
    wide = sum(1 for c in c2 if c >= 2)
    if e2 < 2 * wide:
        log.debug("cap123: halving (excess %d, %d wide capacities)", e2, wide)
        half = _cap01([x // 2 for x in x2], [c // 2 for c in c2], width - 1)
        return [2 * y for y in half]
    log.debug("cap123: pre-lifting %d wide capacities by 2", wide)
    for i, c in enumerate(c2):
        if c >= 2:
            x2[i] += 2
            c2[i] -= 2
    return _cap01(x2, c2, width)


def _full_allocation(cs: Sequence[int], width: int) -> Optional[List[int]]:
    total = 1 << width
    for i, c in enumerate(cs):
        if c >= total:
            ys = [0] * len(cs)
            ys[i] = total
            return ys
    return None


def _one_sided_iterative(cs: Sequence[int], width: int) -> List[int]:
    lo, hi = 1, width
    while lo < hi:
        m = (lo + hi) // 2
        if sum(c >> m for c in cs) <= 1 << (width - m):
            hi = m
        else:
            lo = m + 1
    m = lo
    d = [2 * (c >> m) for c in cs]
    cstar = [c >> (m - 1) for c in cs]
    log.debug("one-sided: m=%d", m)
    ys = _cap01(d, [a - b for a, b in zip(cstar, d)], width - m + 1)
    assert ys is not None
    return [y << (m - 1) for y in ys]


def _one_sided_recursive(cs: Sequence[int], width: int) -> List[int]:
    full = _full_allocation(cs, width)
    if full is not None:
        return full
    d = [2 * (c // 2) for c in cs]
    if sum(d) <= 1 << width:
        ys = _cap01(d, [a - b for a, b in zip(cs, d)], width)
        assert ys is not None
        return ys
    return [2 * y for y in _one_sided_recursive([c // 2 for c in cs], width - 1)]


def _one_sided(cs: Sequence[int], width: int, recursive: bool = False) -> Optional[List[int]]:
    if sum(cs) < 1 << width:
        return None
    full = _full_allocation(cs, width)
    if full is not None:
        return full
    if recursive:
        return _one_sided_recursive(cs, width)
    return _one_sided_iterative(cs, width)


def _wrap(ys, width) -> Optional[Lifting]:
    return None if ys is None else Lifting(tuple(ys), width)


def lift_cap01(inst: LiftingInstance) -> Optional[Lifting]:
    """Optimal lifting when every capacity is 0 or 1.

    The excess goes to the bit-lexicographically largest liftable weights.
    """
    if any(c > 1 for c in inst.capacities):
        raise ValueError("capacities must lie in {0, 1}")
    return _wrap(_cap01(inst.weights, inst.capacities, inst.width), inst.width)


def lift_cap123(inst: LiftingInstance) -> Optional[Lifting]:
    """Optimal lifting when every capacity is 1, 2 or 3."""
    if any(c not in (1, 2, 3) for c in inst.capacities):
        raise ValueError("capacities must lie in {1, 2, 3}")
    return _wrap(_cap123(inst.weights, inst.capacities, inst.width), inst.width)


def lift_one_sided(capacities: Sequence[int], width: int, recursive: bool = False) -> Optional[Lifting]:
    """Optimal lifting of the all-zero vector under arbitrary capacities."""
    cs = [int(c) for c in capacities]
    if any(c < 0 for c in cs):
        raise ValueError("capacities must be non-negative")
    return _wrap(_one_sided(cs, width, recursive), width)
