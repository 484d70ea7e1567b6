"""Near-duplicate belief elimination.

Two beliefs are similar when their L-inf (Chebyshev) distance is strictly
below a threshold. Filtering is a single forward scan: a belief survives iff
it is not similar to any belief that survived before it, so the first member
of every near-duplicate group is the one kept.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import DimensionMismatch
from .sampler import BeliefSet, make_rng


class CountTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class FilterReport:
    input_count: int
    kept_count: int
    threshold: float
    elapsed: float
    kept_indices: tuple

    CSV_FIELDS = ("input_count", "kept_count", "threshold", "elapsed_seconds")

    def csv_row(self) -> dict:
        return {
            "input_count": self.input_count,
            "kept_count": self.kept_count,
            "threshold": repr(self.threshold),
            "elapsed_seconds": f"{self.elapsed:.3f}",
        }

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.CSV_FIELDS, lineterminator="\n")
        if header:
            writer.writeheader()
        writer.writerow(self.csv_row())
        return buf.getvalue()


def _check_threshold(threshold: float) -> float:
    threshold = float(threshold)
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    return threshold


def linf_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare beliefs of shapes {a.shape} and {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def is_similar(a, b, threshold: float) -> bool:
    """True iff max_s |a(s) - b(s)| < threshold."""
    return linf_distance(a, b) < _check_threshold(threshold)


def filter_beliefs(beliefs, threshold: float, method: str = "plain", backend=None) -> tuple[BeliefSet, FilterReport]:
    """Drop every belief within ``threshold`` (L-inf) of an earlier surviving belief.

    ``method="plain"`` compares each candidate against all survivors;
    ``method="sorted"`` only against survivors whose first coordinate is within
    ``threshold`` of the candidate's. Both return the same survivors.
    """
    threshold = _check_threshold(threshold)
    bs = beliefs if isinstance(beliefs, BeliefSet) else BeliefSet(beliefs)
    impl = kernels.get_backend(backend)
    scan = {"plain": impl.greedy_filter, "sorted": impl.greedy_filter_sorted}[method]
    start = time.perf_counter()
    kept = scan(bs.beliefs, threshold) if len(bs) else np.empty(0, dtype=np.int64)
    elapsed = time.perf_counter() - start
    out = BeliefSet(bs.beliefs[kept], dict(bs.provenance, filter_threshold=threshold))
    report = FilterReport(len(bs), len(kept), threshold, elapsed, tuple(int(i) for i in kept))
    return out, report


def subsample(beliefs, k: int, seed=0) -> BeliefSet:
    """Uniform random subset of size ``k``, keeping the original order."""
    bs = beliefs if isinstance(beliefs, BeliefSet) else BeliefSet(beliefs)
    if k < 0 or k > len(bs):
        raise CountTooLarge(f"cannot draw {k} beliefs from a set of {len(bs)}")
    idx = np.sort(make_rng(seed).choice(len(bs), size=k, replace=False))
    return BeliefSet(bs.beliefs[idx], dict(bs.provenance, subsample=k, subsample_seed=seed))
