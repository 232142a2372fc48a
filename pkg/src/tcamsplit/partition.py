"""Partitions of a 2^W address space, distances between them, and sampling."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

MAX_WIDTH = 64


class DistanceKind(enum.Enum):
    LINF = "linf"
    LINF_PLUS = "linf+"
    LINF_REL_PLUS = "linfrel+"
    LINF_REL = "linfrel"

    @property
    def relative(self) -> bool:
        return self in (DistanceKind.LINF_REL_PLUS, DistanceKind.LINF_REL)

    @property
    def one_sided(self) -> bool:
        return self in (DistanceKind.LINF_PLUS, DistanceKind.LINF_REL_PLUS)

    @classmethod
    def parse(cls, name: str) -> "DistanceKind":
        key = name.strip().lower().replace("_", "").replace("-", "")
        aliases = {
            "linf": cls.LINF,
            "linf+": cls.LINF_PLUS,
            "linfplus": cls.LINF_PLUS,
            "linfrel+": cls.LINF_REL_PLUS,
            "linfrelplus": cls.LINF_REL_PLUS,
            "linfrel": cls.LINF_REL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown distance kind {name!r}") from None


OPTIMIZABLE_KINDS = (DistanceKind.LINF, DistanceKind.LINF_PLUS, DistanceKind.LINF_REL_PLUS)


def _check_width(width: int) -> None:
    if not isinstance(width, int) or not 1 <= width <= MAX_WIDTH:
        raise ValueError(f"width must be an integer in [1, {MAX_WIDTH}], got {width!r}")


@dataclass(frozen=True)
class Partition:
    """k non-negative integer parts summing to ``2**width``."""

    parts: tuple
    width: int

    def __post_init__(self):
        _check_width(self.width)
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("a partition needs at least one part")
        for p in parts:
            if not isinstance(p, int) or isinstance(p, bool):
                raise TypeError(f"integer parts required, got {p!r}")
            if p < 0:
                raise ValueError(f"negative part {p}")
        if sum(parts) != 1 << self.width:
            raise ValueError(f"parts sum to {sum(parts)}, expected 2**{self.width}")
        object.__setattr__(self, "parts", parts)

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def total(self) -> int:
        return 1 << self.width

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def is_degenerate(self) -> bool:
        return any(p == 0 for p in self.parts)

    def to_real(self) -> "RealPartition":
        return RealPartition(tuple(Fraction(p) for p in self.parts), self.width)


@dataclass(frozen=True)
class RealPartition:
    """k strictly positive rational parts summing exactly to ``2**width``."""

    parts: tuple
    width: int

    def __post_init__(self):
        _check_width(self.width)
        parts = tuple(Fraction(p) for p in self.parts)
        if not parts:
            raise ValueError("a partition needs at least one part")
        if any(p <= 0 for p in parts):
            raise ValueError("real partitions need strictly positive parts")
        if sum(parts) != 1 << self.width:
            raise ValueError(f"parts sum to {sum(parts)}, expected 2**{self.width}")
        object.__setattr__(self, "parts", parts)

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def total(self) -> int:
        return 1 << self.width

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def is_integral(self) -> bool:
        return all(p.denominator == 1 for p in self.parts)

    def to_partition(self) -> Partition:
        if not self.is_integral():
            raise ValueError("partition has non-integer parts")
        return Partition(tuple(int(p) for p in self.parts), self.width)


AnyPartition = Union[Partition, RealPartition]


def bitlex_key(x: int) -> str:
    """Sort key realising the bit-lexicographic order.

    The binary digits are read from the least significant bit. A shorter
    string is a prefix of any longer one it is compared to only when the
    longer one continues with a set bit, so no padding is needed.
    """
    return bin(x)[:1:-1]


def bitlex_less(x: int, y: int) -> bool:
    """True iff x has a 0 and y a 1 at the lowest bit where they differ."""
    diff = x ^ y
    if diff == 0:
        return False
    return bool(y & diff & -diff)


def _parts_and_width(p) -> tuple:
    if isinstance(p, (Partition, RealPartition)):
        return p.parts, p.width
    raise TypeError(f"expected a Partition or RealPartition, got {type(p).__name__}")


def distance(candidate: AnyPartition, target: AnyPartition, kind: DistanceKind) -> Fraction:
    """Exact distance of ``candidate`` from ``target``.

    Relative kinds divide each deviation by the corresponding target part.
    One-sided kinds only count positive deviations (overloads).
    """
    cparts, cw = _parts_and_width(candidate)
    tparts, tw = _parts_and_width(target)
    if len(cparts) != len(tparts) or cw != tw:
        raise ValueError("partitions must share k and width")
    return distance_parts(cparts, tparts, kind)


def distance_parts(cparts: Sequence, tparts: Sequence, kind: DistanceKind) -> Fraction:
    if kind.relative and any(t <= 0 for t in tparts):
        raise ValueError("relative distance needs strictly positive target parts")
    best = Fraction(0)
    for c, t in zip(cparts, tparts):
        delta = Fraction(c) - Fraction(t)
        if not kind.one_sided:
            delta = abs(delta)
        if kind.relative:
            delta /= t
        if delta > best:
            best = delta
    return best


def _floyd_sample(rng: random.Random, population: int, m: int) -> list:
    """m distinct values drawn uniformly from 1..population (Floyd's algorithm)."""
    chosen = set()
    for j in range(population - m + 1, population + 1):
        t = rng.randint(1, j)
        chosen.add(j if t in chosen else t)
    return sorted(chosen)


def sample_ordered_partition(k: int, width: int, rng) -> Partition:
    """Uniform draw from the ordered partitions of 2**width into k positive parts.

    ``rng`` is a seed or a ``random.Random``. Cut points are k-1 distinct
    values of 1..2**width-1; consecutive gaps are the parts.
    """
    _check_width(width)
    total = 1 << width
    if not 1 <= k <= total:
        raise ValueError(f"cannot split 2**{width} into {k} positive parts")
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    cuts = [0] + _floyd_sample(rng, total - 1, k - 1) + [total]
    return Partition(tuple(b - a for a, b in zip(cuts, cuts[1:])), width)


def _parse_number(token: str) -> Fraction:
    return Fraction(token)


def parse_partition(text: str) -> AnyPartition:
    """Parse the ``W=<int> k=<int>`` header followed by k parts.

    Returns a :class:`Partition` when every part is an integer, otherwise a
    :class:`RealPartition`.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty partition text")
    header = dict(field.split("=", 1) for field in lines[0].split())
    try:
        width = int(header["W"])
        k = int(header["k"])
    except (KeyError, ValueError):
        raise ValueError(f"bad header line {lines[0]!r}") from None
    tokens = " ".join(lines[1:]).split()
    if len(tokens) != k:
        raise ValueError(f"header announces k={k} but {len(tokens)} parts follow")
    values = [_parse_number(t) for t in tokens]
    if sum(values) != 1 << width:
        raise ValueError(f"parts sum to {sum(values)}, expected 2**{width}")
    if all(v.denominator == 1 for v in values) and all(v >= 0 for v in values):
        return Partition(tuple(int(v) for v in values), width)
    return RealPartition(tuple(values), width)


def format_partition(p: AnyPartition) -> str:
    return f"W={p.width} k={p.k}\n" + " ".join(str(v) for v in p.parts) + "\n"
