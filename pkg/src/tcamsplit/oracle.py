"""Exhaustive reference solvers for small instances.

Everything here enumerates: all compositions of 2^W, all liftings in a box,
or all states of the transfer graph. They are slow on purpose and only check
values, never the witnesses chosen by the fast solvers.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Optional

import numpy as np

from .approx import ApproxResult
from .lifting import Lifting, LiftingInstance
from .partition import DistanceKind, Partition, RealPartition
from .sequences import bit_matcher, bit_matcher_length
from .tcam import sequence_to_table

COMPLEXITY_MAX_WIDTH = 3
COMPLEXITY_MAX_K = 3


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_states: int = 2_000_000

    def check(self, states: int, what: str) -> None:
        if states > self.max_states:
            raise BudgetExceeded(f"{what}: {states} states exceed the budget of {self.max_states}")


DEFAULT_BUDGET = OracleBudget()


def composition_count(total: int, k: int) -> int:
    return math.comb(total + k - 1, k - 1)


def _compositions(total: int, k: int):
    if k == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


@lru_cache(maxsize=64)
def composition_table(width: int, k: int):
    """All compositions of 2^width into k parts with their complexities."""
    comps = np.array(list(_compositions(1 << width, k)), dtype=np.int64).reshape(-1, k)
    lam = np.array([bit_matcher_length(row, width) for row in comps.tolist()], dtype=np.int64)
    comps.setflags(write=False)
    lam.setflags(write=False)
    return comps, lam


def _scaled_errors(comps: np.ndarray, parts, kind: DistanceKind):
    """Integer error of every candidate row and the common denominator."""
    fr = [Fraction(p) for p in parts]
    den = reduce(math.lcm, (f.denominator for f in fr), 1)
    target = [int(f * den) for f in fr]
    bound = int(comps.max(initial=0)) * den + max(target)
    mult = [1] * len(target)
    scale = den
    if kind.relative:
        big = reduce(math.lcm, target, 1)
        mult = [big // t for t in target]
        scale = big
        bound *= max(mult)
    dtype = np.int64 if bound < 1 << 62 else object
    y = comps.astype(dtype) * den
    t = np.array(target, dtype=dtype)
    delta = y - t
    if not kind.one_sided:
        delta = np.abs(delta)
    if kind.relative:
        delta = delta * np.array(mult, dtype=dtype)
    err = delta.max(axis=1)
    if kind.one_sided:
        err = np.maximum(err, 0)
    return err, scale


def brute_force_closest(P, n: int, kind=DistanceKind.LINF, budget: OracleBudget = DEFAULT_BUDGET) -> ApproxResult:
    """Best partition with at most ``n`` rules, found by trying all of them."""
    kind = DistanceKind(kind)
    if not isinstance(P, (Partition, RealPartition)):
        raise TypeError("expected a partition")
    if kind.relative and any(p <= 0 for p in P.parts):
        raise ValueError("relative distance needs strictly positive target parts")
    budget.check(composition_count(1 << P.width, P.k), "closest")
    comps, lam = composition_table(P.width, P.k)
    err, scale = _scaled_errors(comps, P.parts, kind)
    ok = np.flatnonzero(lam <= n)
    if ok.size == 0:
        raise ValueError("no partition fits the budget")
    i = int(ok[np.argmin(err[ok])])
    approx = Partition(tuple(int(v) for v in comps[i]), P.width)
    table = sequence_to_table(bit_matcher(approx), P.k)
    return ApproxResult(approx, Fraction(int(err[i]), scale), int(lam[i]), table, kind)


def brute_force_errors(P, kind=DistanceKind.LINF, budget: OracleBudget = DEFAULT_BUDGET) -> list:
    """Optimal error for every budget 1..lambda_max, in one pass.

    Entry ``n - 1`` is the error ``brute_force_closest(P, n, kind)`` reports.
    """
    kind = DistanceKind(kind)
    budget.check(composition_count(1 << P.width, P.k), "closest")
    comps, lam = composition_table(P.width, P.k)
    err, scale = _scaled_errors(comps, P.parts, kind)
    top = int(lam.max())
    out = []
    best = None
    for n in range(1, top + 1):
        sel = err[lam == n]
        if sel.size:
            m = sel.min()
            best = m if best is None else min(best, m)
        out.append(Fraction(int(best), scale))
    return out


def brute_force_lifting(inst: LiftingInstance, budget: OracleBudget = DEFAULT_BUDGET) -> Optional[Lifting]:
    """Lowest-complexity lifting over the whole box, or None if there is none."""
    states = math.prod(c + 1 for c in inst.capacities)
    budget.check(states, "lifting")
    total = 1 << inst.width
    best, best_lam = None, None
    ranges = [range(x, x + c + 1) for x, c in zip(inst.weights, inst.capacities)]
    for ys in itertools.product(*ranges[:-1]):
        last = total - sum(ys)
        if not ranges[-1].start <= last < ranges[-1].stop:
            continue
        cand = ys + (last,)
        lam = bit_matcher_length(cand, inst.width)
        if best is None or lam < best_lam:
            best, best_lam = cand, lam
    return None if best is None else Lifting(best, inst.width)


def lifting_minima(weights, width: int, cap_max: int):
    """Minimum complexity for every capacity vector in [0, cap_max]^k at once.

    Returns an integer array indexed by the capacity vector; entries with no
    feasible lifting hold a value larger than any complexity.
    """
    k = len(weights)
    budget = (cap_max + 1) ** k
    DEFAULT_BUDGET.check(budget, "lifting sweep")
    comps, lam = composition_table(width, k) if width >= 1 else _width0(k)
    need = comps - np.array(weights, dtype=np.int64)
    ok = (need >= 0).all(axis=1) & (need <= cap_max).all(axis=1)
    inf = 1 << 30
    grid = np.full((cap_max + 1,) * k, inf, dtype=np.int64)
    idx = tuple(need[ok].T)
    np.minimum.at(grid, idx, lam[ok])
    for axis in range(k):
        grid = np.minimum.accumulate(grid, axis=axis)
    return grid


def _width0(k):
    comps = np.eye(k, dtype=np.int64)
    return comps, np.ones(k, dtype=np.int64)


def brute_force_complexity(P: Partition) -> int:
    """Shortest transfer sequence that clears ``P``, by breadth-first search.

    A move sends 2^l between two coordinates or, once, 2^W to the outside.
    Coordinates stay within [-2^W, 2^W].
    """
    if P.width > COMPLEXITY_MAX_WIDTH or P.k > COMPLEXITY_MAX_K:
        raise BudgetExceeded(f"complexity search is limited to W <= {COMPLEXITY_MAX_WIDTH}, k <= {COMPLEXITY_MAX_K}")
    total = 1 << P.width
    sizes = [1 << lvl for lvl in range(P.width + 1)]
    k = P.k
    start = (tuple(P.parts), False)
    goal = ((0,) * k, True)
    seen = {start: 0}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        d = seen[state]
        if state == goal:
            return d
        vals, used = state
        nxt = []
        if not used:
            for i in range(k):
                v = list(vals)
                v[i] -= total
                nxt.append((tuple(v), True))
        for i in range(k):
            for j in range(k):
                if i == j:
                    continue
                for s in sizes:
                    a, b = vals[i] - s, vals[j] + s
                    if a < -total or b > total:
                        continue
                    v = list(vals)
                    v[i], v[j] = a, b
                    nxt.append((tuple(v), used))
        for st in nxt:
            if st not in seen:
                seen[st] = d + 1
                queue.append(st)
    raise AssertionError("the transfer graph has no path to zero")


def _cap_sweep(width: int, k: int):
    """Yield (solver name, weights, capacities, solver output, oracle minimum)."""
    from .lifting import _cap01, _cap123, _one_sided

    total = 1 << width
    for xs in itertools.product(range(total + 1), repeat=k):
        if sum(xs) > total:
            continue
        grid = lifting_minima(xs, width, 3)
        for cs in itertools.product((0, 1), repeat=k):
            yield "cap01", xs, cs, _cap01(xs, cs, width), int(grid[cs])
        for cs in itertools.product((1, 2, 3), repeat=k):
            yield "cap123", xs, cs, _cap123(xs, cs, width), int(grid[cs])
    zeros = (0,) * k
    grid = lifting_minima(zeros, width, total)
    for cs in itertools.product(range(total + 1), repeat=k):
        best = int(grid[cs])
        yield "one-sided", zeros, cs, _one_sided(cs, width), best
        yield "one-sided-recursive", zeros, cs, _one_sided(cs, width, recursive=True), best


def run_oracle_checks(max_w: int, max_k: int, report=print) -> int:
    """Run every oracle sweep up to the given sizes; returns the failure count."""
    from .approx import closest

    infeasible = 1 << 30
    failures = 0
    checked = 0
    for W in range(1, min(max_w, COMPLEXITY_MAX_WIDTH) + 1):
        for k in range(1, min(max_k, COMPLEXITY_MAX_K) + 1):
            comps, lam = composition_table(W, k)
            for row, l in zip(comps.tolist(), lam.tolist()):
                checked += 1
                got = brute_force_complexity(Partition(tuple(row), W))
                if got != l:
                    failures += 1
                    report(f"complexity mismatch {row} W={W}: search {got}, bit matcher {l}")
    report(f"complexity: {checked} partitions checked")

    checked = 0
    for W in range(1, max_w + 1):
        for k in range(1, max_k + 1):
            comps, lam = composition_table(W, k)
            for row, l in zip(comps.tolist(), lam.tolist()):
                P = Partition(tuple(row), W)
                for kind in (DistanceKind.LINF, DistanceKind.LINF_PLUS, DistanceKind.LINF_REL_PLUS):
                    if kind.relative and 0 in row:
                        continue
                    ref = brute_force_errors(P, kind)
                    for n in range(1, l + 1):
                        checked += 1
                        got = closest(P, n, kind, with_table=False).error
                        if got != ref[n - 1]:
                            failures += 1
                            report(f"closest mismatch {row} W={W} n={n} {kind.value}: {got} vs {ref[n - 1]}")
    report(f"closest: {checked} cases checked")

    checked = 0
    for W in range(1, min(max_w, 4) + 1):
        for k in range(1, min(max_k, 4) + 1):
            for name, xs, cs, ys, best in _cap_sweep(W, k):
                checked += 1
                if ys is None:
                    ok = best >= infeasible
                else:
                    ok = best < infeasible and bit_matcher_length(ys, W) == best
                if not ok:
                    failures += 1
                    report(f"{name} mismatch X={xs} C={cs} W={W}: {ys} vs optimum {best}")
    report(f"lifting: {checked} instances checked")
    report("all oracle checks passed" if not failures else f"{failures} oracle mismatches")
    return failures
