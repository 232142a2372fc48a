"""Randomized studies of approximation error, emitted as CSV rows.

Every sample draws its partition from a generator seeded by
``(seed, W, k, sample index)``, so serial and parallel runs agree.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import random
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

from .approx import ClosestSearch, normalize_to_width
from .partition import DistanceKind, Partition, distance, sample_ordered_partition
from .sequences import niagara, truncate_to_widest

log = logging.getLogger(__name__)

STUDIES = (
    "error-vs-n",
    "error-vs-k",
    "error-vs-W",
    "fixed-ratio",
    "onesided-ratio",
    "niagara-ratio",
    "degeneracy",
    "real-data",
)
DEFAULT_SAMPLES = 1000
NIAGARA_DEFAULT_SAMPLES = 10000


@dataclass
class ExperimentConfig:
    study: str
    W: Sequence[int] = (32,)
    k: Sequence[int] = (10,)
    n: Sequence[int] = (25,)
    ratio: Sequence[float] = (1.0,)
    samples: Optional[int] = None
    seed: int = 0
    kind: DistanceKind = DistanceKind.LINF
    workers: int = 1

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ValueError(f"unknown study {self.study!r}; choose from {', '.join(STUDIES)}")
        for name in ("W", "k", "n", "ratio"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"{name} range is empty")
            setattr(self, name, vals)
        if self.samples is None:
            self.samples = NIAGARA_DEFAULT_SAMPLES if self.study == "niagara-ratio" else DEFAULT_SAMPLES
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        self.kind = DistanceKind(self.kind)

    def budgets(self, k: int) -> List[int]:
        if self.study == "fixed-ratio":
            return sorted({max(1, int(r * k)) for r in self.ratio})
        return sorted(set(self.n))


@dataclass(frozen=True)
class EmpiricalModelParams:
    slope: float = 4.92
    offset: float = 2.24
    k_slope: float = 0.16
    k_offset: float = 0.91


def predict_error(n: int, k: int, W: int, params: EmpiricalModelParams = EmpiricalModelParams()) -> float:
    """Expected L-inf error of a random partition under the empirical model."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    r = n / k
    return 2.0 ** (W - params.slope * r + params.offset) * k ** -(params.k_slope * r + params.k_offset)


def sample_rng(seed: int, W: int, k: int, idx: int) -> random.Random:
    return random.Random(f"{seed}:{W}:{k}:{idx}")


def _lg(x) -> float:
    return math.log2(x) if x > 0 else float("-inf")


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, float) and math.isinf(x):
        return "-inf" if x < 0 else "inf"
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return f"{float(x):.6f}"


def _power_bracket(v: Fraction) -> int:
    """The h with 2^h <= v < 2^(h+1)."""
    h = v.numerator.bit_length() - v.denominator.bit_length()
    if Fraction(2) ** h > v:
        h -= 1
    elif Fraction(2) ** (h + 1) <= v:
        h += 1
    return h


# per-sample workers; module level so that multiprocessing can pickle them

def _errors_task(args):
    seed, W, k, idx, budgets, kinds = args
    P = sample_ordered_partition(k, W, sample_rng(seed, W, k, idx))
    out = []
    for kind in kinds:
        search = ClosestSearch(P, kind)
        row = []
        for n in budgets:
            res = search.result(n)
            assert res.rule_count <= n and distance(res.approx, P, kind) == res.error
            row.append((res.error, res.degenerate))
        out.append(row)
    return out


def _niagara_task(args):
    seed, W, k, idx, budgets, kind = args
    P = sample_ordered_partition(k, W, sample_rng(seed, W, k, idx))
    search = ClosestSearch(P, kind)
    seq = niagara(P)
    out = []
    for n in budgets:
        opt = search.result(n)
        assert opt.rule_count <= n
        if n >= len(seq):
            trunc = Fraction(0)
        else:
            trunc = distance(truncate_to_widest(seq, n, k), P, kind)
        assert trunc >= opt.error
        violated = False
        if opt.error > 0:
            h = _power_bracket(opt.error)
            violated = trunc >= Fraction(2) ** (h + 1)
            if violated:
                log.warning("truncation bound violated: P=%s n=%d optimal=%s truncated=%s", P.parts, n, opt.error, trunc)
        out.append((opt.error, trunc, violated))
    return out


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    import multiprocessing

    with multiprocessing.Pool(workers) as pool:
        return pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers)))


def _error_stats(errors: List[Fraction]) -> dict:
    vals = [float(e) for e in errors]
    mean = float(sum(errors) / len(errors))
    nonzero = [e for e in errors if e > 0]
    return {
        "mean": mean,
        "std": statistics.pstdev(vals) if len(vals) > 1 else 0.0,
        "lg_mean": _lg(mean),
        "mean_lg": statistics.fmean(math.log2(e) for e in nonzero) if nonzero else float("-inf"),
        "zero_frac": 1 - len(nonzero) / len(errors),
    }


def _points(cfg: ExperimentConfig):
    for W in cfg.W:
        for k in cfg.k:
            yield W, k


ERROR_FIELDS = ["study", "kind", "W", "k", "n", "samples", "mean", "std", "lg_mean", "mean_lg", "zero_frac", "status"]
ONESIDED_FIELDS = ["study", "W", "k", "n", "samples", "mean_linf", "mean_linf_plus", "ratio", "status"]
DEGENERACY_FIELDS = ["study", "kind", "W", "k", "n", "samples", "degenerate_frac", "status"]
NIAGARA_FIELDS = [
    "study", "kind", "W", "k", "n", "samples", "mean_optimal", "mean_truncated",
    "mean_ratio", "max_ratio", "violations", "status",
]
REAL_FIELDS = ["frame", "kind", "fraction", "n", "n_star", "error", "lg_error_over_W"]


def _infeasible_row(cfg, fields, W, k, n=""):
    row = {f: "" for f in fields}
    row.update(study=cfg.study, W=W, k=k, n=n, samples=cfg.samples, status="infeasible")
    if "kind" in row:
        row["kind"] = cfg.kind.value
    return row


def run_study(cfg: ExperimentConfig, counts_lines: Optional[Iterable[str]] = None,
              fractions: Sequence = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))):
    """Run a study; returns ``(fieldnames, rows)``."""
    if cfg.study == "real-data":
        if counts_lines is None:
            counts_lines = format_counts(synthetic_counts()).splitlines()
        counts_lines = list(counts_lines)
        rows = []
        for W in cfg.W:
            rows.extend(real_data_pipeline(counts_lines, W, fractions, kinds=(cfg.kind,)))
        return REAL_FIELDS, rows
    if cfg.study == "niagara-ratio":
        return NIAGARA_FIELDS, _run_niagara(cfg)
    if cfg.study == "onesided-ratio":
        return ONESIDED_FIELDS, _run_onesided(cfg)
    if cfg.study == "degeneracy":
        return DEGENERACY_FIELDS, _run_errors(cfg, degeneracy=True)
    return ERROR_FIELDS, _run_errors(cfg)


def _run_errors(cfg: ExperimentConfig, degeneracy: bool = False):
    rows = []
    for W, k in _points(cfg):
        budgets = cfg.budgets(k)
        if k > 1 << W:
            fields = DEGENERACY_FIELDS if degeneracy else ERROR_FIELDS
            rows.extend(_infeasible_row(cfg, fields, W, k, n) for n in budgets)
            continue
        items = [(cfg.seed, W, k, i, budgets, (cfg.kind,)) for i in range(cfg.samples)]
        per_sample = [r[0] for r in _map(_errors_task, items, cfg.workers)]
        for j, n in enumerate(budgets):
            col = [s[j] for s in per_sample]
            row = {"study": cfg.study, "kind": cfg.kind.value, "W": W, "k": k, "n": n,
                   "samples": cfg.samples, "status": "ok"}
            if degeneracy:
                row["degenerate_frac"] = sum(1 for _, d in col if d) / len(col)
            else:
                row.update(_error_stats([e for e, _ in col]))
            rows.append(row)
    return rows


def _run_onesided(cfg: ExperimentConfig):
    rows = []
    kinds = (DistanceKind.LINF, DistanceKind.LINF_PLUS)
    for W, k in _points(cfg):
        budgets = cfg.budgets(k)
        if k > 1 << W:
            rows.extend(_infeasible_row(cfg, ONESIDED_FIELDS, W, k, n) for n in budgets)
            continue
        items = [(cfg.seed, W, k, i, budgets, kinds) for i in range(cfg.samples)]
        per_sample = _map(_errors_task, items, cfg.workers)
        for j, n in enumerate(budgets):
            two = sum(s[0][j][0] for s in per_sample) / cfg.samples
            one = sum(s[1][j][0] for s in per_sample) / cfg.samples
            assert one <= two
            ratio = one / two if two else Fraction(1)
            rows.append({"study": cfg.study, "W": W, "k": k, "n": n, "samples": cfg.samples,
                         "mean_linf": float(two), "mean_linf_plus": float(one),
                         "ratio": float(ratio), "status": "ok"})
    return rows


def _run_niagara(cfg: ExperimentConfig):
    rows = []
    for W, k in _points(cfg):
        budgets = cfg.budgets(k)
        if k > 1 << W:
            rows.extend(_infeasible_row(cfg, NIAGARA_FIELDS, W, k, n) for n in budgets)
            continue
        items = [(cfg.seed, W, k, i, budgets, cfg.kind) for i in range(cfg.samples)]
        per_sample = _map(_niagara_task, items, cfg.workers)
        for j, n in enumerate(budgets):
            col = [s[j] for s in per_sample]
            ratios = [t / o if o else Fraction(1) for o, t, _ in col]
            rows.append({
                "study": cfg.study, "kind": cfg.kind.value, "W": W, "k": k, "n": n,
                "samples": cfg.samples,
                "mean_optimal": float(sum(o for o, _, _ in col) / len(col)),
                "mean_truncated": float(sum(t for _, t, _ in col) / len(col)),
                "mean_ratio": float(sum(ratios) / len(ratios)),
                "max_ratio": float(max(ratios)),
                "violations": sum(1 for _, _, v in col if v),
                "status": "ok",
            })
    return rows


def write_csv(fields, rows, out=None) -> str:
    """Render rows as CSV; also writes to ``out`` when given."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({f: _fmt(row.get(f, "")) for f in fields})
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


# real traffic counts

def parse_counts(lines: Iterable[str]) -> List[List[int]]:
    """One frame per line: positive integer counts, comma or space separated."""
    frames = []
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            counts = [int(tok) for tok in line.replace(",", " ").split()]
        except ValueError:
            log.warning("line %d: not a list of integers, skipped", lineno)
            continue
        if not counts or any(c <= 0 for c in counts):
            log.warning("line %d: counts must be positive, skipped", lineno)
            continue
        frames.append(counts)
    return frames


def synthetic_counts(frames: int = 3, k: int = 8, seed: int = 0) -> List[List[int]]:
    """Skewed per-target request counts, a stand-in for real traces."""
    rng = random.Random(seed)
    out = []
    for _ in range(frames):
        out.append([max(1, int(rng.paretovariate(1.2) * 1000)) for _ in range(k)])
    return out


def format_counts(frames: Sequence[Sequence[int]]) -> str:
    return "".join(",".join(str(c) for c in f) + "\n" for f in frames)


def minimal_rules_for_best(search: ClosestSearch) -> int:
    """Fewest rules reaching the smallest error any budget can reach."""
    P = search.target
    hi = P.width * P.k + 1
    best = search.result(hi).error
    lo = 1
    while lo < hi:
        mid = (lo + hi) // 2
        if search.result(mid).error == best:
            hi = mid
        else:
            lo = mid + 1
    return lo


def real_data_pipeline(counts_lines: Iterable[str], W: int, fractions: Sequence,
                       kinds: Sequence[DistanceKind] = (DistanceKind.LINF,)) -> List[dict]:
    """Error against the fraction of rules spent, per frame and kind."""
    rows = []
    for frame, counts in enumerate(parse_counts(counts_lines)):
        if len(counts) > 1 << W:
            log.warning("frame %d: %d targets do not fit W=%d, skipped", frame, len(counts), W)
            continue
        P = normalize_to_width(counts, W)
        for kind in kinds:
            search = ClosestSearch(P, kind)
            n_star = minimal_rules_for_best(search)
            for f in fractions:
                n = max(1, math.floor(Fraction(f) * n_star))
                err = search.result(n).error
                rows.append({
                    "frame": frame,
                    "kind": DistanceKind(kind).value,
                    "fraction": float(Fraction(f)),
                    "n": n,
                    "n_star": n_star,
                    "error": float(err),
                    "lg_error_over_W": _lg(err) / W,
                })
    return rows
