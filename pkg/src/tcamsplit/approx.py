"""Closest partitions under a rule budget.

Bounded-error solvers reduce "find the simplest partition in the open ball of
radius e" to a lifting instance. ``closest`` then searches the radius. The
same code handles integer and rational targets: parts are ``int`` or
``Fraction`` and only ``//``, comparisons and products are used on them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .lifting import _cap01, _cap123, _one_sided
from .partition import (
    DistanceKind,
    OPTIMIZABLE_KINDS,
    Partition,
    RealPartition,
    distance_parts,
)
from .sequences import bit_matcher, bit_matcher_length, complexity_at_most
from .tcam import TcamTable, sequence_to_table

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ApproxResult:
    approx: Partition
    error: Fraction
    rule_count: int
    table: Optional[TcamTable]
    kind: DistanceKind = DistanceKind.LINF

    @property
    def degenerate(self) -> bool:
        """True when some target receives no address at all."""
        return self.approx.is_degenerate()


def _ceil(v) -> int:
    return -((-v) // 1)


def _linf_box(parts, e, width: int):
    """Lattice step and per-coordinate [x, z] bounds for the open L-inf ball."""
    if e >= 1:
        h = min(int(e).bit_length() - 1, width)
    else:
        h = 0
    s = 1 << h
    lows, highs = [], []
    for p in parts:
        x = max(0, ((p - e) // s + 1) * s)
        z = (-((-(p + e)) // s) - 1) * s
        if h == width:
            z = min(z, s)
        lows.append(x)
        highs.append(z)
    return h, s, lows, highs


def _solve_linf(parts, e, width: int) -> Optional[List[int]]:
    h, s, lows, highs = _linf_box(parts, e, width)
    caps = []
    for p, x, z in zip(parts, lows, highs):
        if z < x:
            return None
        c = (z - x) // s
        if e >= 1 and h < width and p - e >= 0:
            count = c + 1
            assert count in ((1, 2) if e == s else (2, 3, 4)), (p, e, count)
        caps.append(int(c))
    xs = [int(x // s) for x in lows]
    rw = width - h
    if max(caps) <= 1:
        ys = _cap01(xs, caps, rw)
    else:
        assert all(c in (1, 2, 3) for c in caps), caps
        ys = _cap123(xs, caps, rw)
    if ys is None:
        return None
    return [y * s for y in ys]


def _one_sided_caps(parts, e, kind: DistanceKind, closed: bool) -> List[int]:
    if kind is DistanceKind.LINF_PLUS:
        bounds = [p + e for p in parts]
    else:
        bounds = [(e + 1) * p for p in parts]
    if closed:
        return [int(b // 1) for b in bounds]
    return [_ceil(b) - 1 for b in bounds]


def _check_radius(e):
    e = Fraction(e)
    if e <= 0:
        raise ValueError("the error bound must be positive")
    return e.numerator if e.denominator == 1 else e


def bounded_error_linf(P, e) -> Optional[Partition]:
    """Simplest partition strictly within L-inf distance ``e`` of ``P``, or None."""
    e = _check_radius(e)
    ys = _solve_linf(P.parts, e, P.width)
    return None if ys is None else Partition(tuple(ys), P.width)


def bounded_error_one_sided(P, e, kind: DistanceKind) -> Optional[Partition]:
    """Simplest partition with one-sided error strictly below ``e``, or None."""
    kind = DistanceKind(kind)
    if not kind.one_sided:
        raise ValueError(f"{kind.value} is not a one-sided distance")
    if kind.relative and any(p <= 0 for p in P.parts):
        raise ValueError("relative distance needs strictly positive target parts")
    e = _check_radius(e)
    ys = _one_sided(_one_sided_caps(P.parts, e, kind, closed=False), P.width)
    return None if ys is None else Partition(tuple(ys), P.width)


class _Search:
    """Radius search for one target and one distance kind.

    Lifting solutions are cached by radius, so several budgets can share the
    work. With ``exact`` set, the complexity of each cached solution is stored
    too; otherwise each budget check uses early-stopping Niagara.
    """

    def __init__(self, parts: Sequence, width: int, kind: DistanceKind, exact: bool = False):
        self.parts = list(parts)
        self.width = width
        self.kind = kind
        self.exact = exact
        self.k = len(parts)
        self._sol: Dict = {}
        self._lam: Dict = {}
        self._fits: Dict = {}
        self._verdicts: Dict = {}

    # open ball for L-inf and L-inf+, closed ball for relative
    def _solve(self, e):
        if e not in self._sol:
            if self.kind is DistanceKind.LINF:
                ys = _solve_linf(self.parts, e, self.width)
            elif self.kind is DistanceKind.LINF_PLUS:
                ys = _one_sided(_one_sided_caps(self.parts, e, self.kind, closed=False), self.width)
            else:
                ys = _one_sided(_one_sided_caps(self.parts, e, self.kind, closed=True), self.width)
            self._sol[e] = ys
        return self._sol[e]

    def feasible(self, e, n: int) -> bool:
        ys = self._solve(e)
        if ys is None:
            ok = False
        elif self.exact:
            if e not in self._lam:
                self._lam[e] = bit_matcher_length(ys, self.width)
            ok = self._lam[e] <= n
        else:
            key = (e, n)
            if key not in self._fits:
                self._fits[key] = complexity_at_most(ys, self.width, n)
            ok = self._fits[key]
        self._record(e, n, ok)
        return ok

    def _record(self, e, n, ok):
        lo, hi = self._verdicts.get(n, (None, None))
        if ok:
            hi = e if hi is None else min(hi, e)
        else:
            lo = e if lo is None else max(lo, e)
        assert lo is None or hi is None or lo < hi, "feasibility is not monotone in the radius"
        self._verdicts[n] = (lo, hi)

    def best(self, n: int):
        """Optimal witness parts for budget ``n``."""
        if self.kind.relative:
            return self._best_relative(n)
        return self._best_absolute(n)

    def _first(self, cands, n, test):
        lo, hi = 0, len(cands) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if test(cands[mid], n):
                hi = mid
            else:
                lo = mid + 1
        return lo

    def _best_absolute(self, n):
        top = (1 << self.width) + 1
        lo, hi = 1, top
        while lo < hi:
            mid = (lo + hi) // 2
            if self.feasible(mid, n):
                hi = mid
            else:
                lo = mid + 1
        E = lo
        assert self.feasible(E, n)
        base = E - 1
        cands = {Fraction(base)}
        for p in self.parts:
            cands.add(_ceil(p) - p + base)
            if self.kind is DistanceKind.LINF:
                cands.add(p - (p // 1) + base)
        cands = sorted(c for c in cands if base <= c < E)
        if len(cands) == 1:
            return self._sol[E]
        # closed ball at cands[j] equals the open ball at its successor
        succ = [self._norm(c) for c in cands[1:]] + [E]
        j = self._first(list(range(len(cands))), n, lambda idx, nn: self.feasible(succ[idx], nn))
        assert self.feasible(succ[j], n)
        return self._sol[succ[j]]

    @staticmethod
    def _norm(v):
        v = Fraction(v)
        return v.numerator if v.denominator == 1 else v

    def _best_relative(self, n):
        parts = self.parts
        j = max(range(self.k), key=lambda i: (parts[i], -i))
        pj = parts[j]
        a_lo = _ceil(pj)
        lo, hi = a_lo, 1 << self.width
        thr = lambda a: self._norm(Fraction(a) / pj - 1)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.feasible(thr(mid), n):
                hi = mid
            else:
                lo = mid + 1
        A = lo
        upper = thr(A)
        lower = thr(A - 1)
        cands = {upper}
        if A == a_lo:
            cands.add(0)
        floor_at = max(lower, 0)
        for p in parts:
            y = int((floor_at + 1) * p // 1) + 1
            t = self._norm(Fraction(y) / p - 1)
            if t <= upper:
                cands.add(t)
        cands = sorted(cands)
        idx = self._first(cands, n, self.feasible)
        best = cands[idx]
        assert self.feasible(best, n)
        return self._sol[best]


def _target(P):
    if isinstance(P, (Partition, RealPartition)):
        return P
    raise TypeError(f"expected a partition, got {type(P).__name__}")


def _check_kind(kind, P):
    kind = DistanceKind(kind)
    if kind not in OPTIMIZABLE_KINDS:
        raise ValueError(f"{kind.value} cannot be optimized")
    if kind.relative and any(p <= 0 for p in P.parts):
        raise ValueError("relative distance needs strictly positive target parts")
    return kind


def _finish(P, ys, kind, with_table=True) -> ApproxResult:
    approx = Partition(tuple(int(y) for y in ys), P.width)
    error = distance_parts(approx.parts, P.parts, kind)
    table = None
    rules = bit_matcher_length(approx.parts, approx.width)
    if with_table:
        table = sequence_to_table(bit_matcher(approx), approx.k)
        assert len(table) == rules
    return ApproxResult(approx, error, rules, table, kind)


def _exact(P) -> Optional[Partition]:
    if isinstance(P, Partition):
        return P
    if P.is_integral():
        return P.to_partition()
    return None


def closest(P, n: int, kind=DistanceKind.LINF, with_table: bool = True) -> ApproxResult:
    """Closest partition to ``P`` that needs at most ``n`` rules."""
    P = _target(P)
    kind = _check_kind(kind, P)
    if n < 1:
        raise ValueError("the rule budget must be at least 1")
    exact = _exact(P)
    if exact is not None and complexity_at_most(exact.parts, exact.width, n):
        return _finish(P, exact.parts, kind, with_table)
    ys = _Search(P.parts, P.width, kind).best(n)
    res = _finish(P, ys, kind, with_table)
    assert res.rule_count <= n
    return res


def closest_real(P: RealPartition, n: int, kind=DistanceKind.LINF, with_table: bool = True) -> ApproxResult:
    """Closest integer partition to a rational target under a rule budget."""
    if isinstance(P, Partition):
        P = P.to_real()
    if not isinstance(P, RealPartition):
        raise TypeError("expected a RealPartition")
    return closest(P, n, kind, with_table)


class ClosestSearch:
    """Answer ``closest`` for one target and many budgets.

    Lifting solutions and their complexities are cached by radius, so later
    budgets mostly hit the cache.
    """

    def __init__(self, P, kind=DistanceKind.LINF):
        self.target = _target(P)
        self.kind = _check_kind(kind, self.target)
        self._search = _Search(self.target.parts, self.target.width, self.kind, exact=True)
        exact = _exact(self.target)
        self._exact = exact
        self._lam = None if exact is None else bit_matcher_length(exact.parts, exact.width)

    def result(self, n: int, with_table: bool = False) -> ApproxResult:
        if n < 1:
            raise ValueError("the rule budget must be at least 1")
        if self._lam is not None and self._lam <= n:
            return _finish(self.target, self._exact.parts, self.kind, with_table)
        res = _finish(self.target, self._search.best(n), self.kind, with_table)
        assert res.rule_count <= n
        return res


def closest_many(P, budgets: Sequence[int], kind=DistanceKind.LINF, with_table: bool = False) -> List[ApproxResult]:
    """``closest`` for several budgets, sharing the lifting work between them."""
    search = ClosestSearch(P, kind)
    return [search.result(n, with_table) for n in budgets]


def normalize_to_width(raw: Sequence[int], width: int) -> RealPartition:
    """Scale positive counts so that they sum exactly to 2^width."""
    if any(int(r) != r or r <= 0 for r in raw):
        raise ValueError("counts must be positive integers")
    if len(raw) > 1 << width:
        raise ValueError("more targets than addresses")
    total = sum(int(r) for r in raw)
    scale = Fraction(1 << width, total)
    return RealPartition(tuple(int(r) * scale for r in raw), width)
