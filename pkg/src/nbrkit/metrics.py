"""Retrieval scoring: MRR, T100, NNk_Ret, AOP-k, pairwise-similarity stats,
and the per-category capability matrix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .embed import Key
from .errors import ValidationError

CATEGORY_ORDER = ("LL-HS", "LO-HS", "LL-PS", "LO-PS", "LO-DS")


@dataclass(frozen=True)
class RankOutcome:
    """Rank of the single relevant document for one query (1-based), or None
    when the ranking was truncated before reaching it."""

    query: Key
    rank: int | None

    def __post_init__(self) -> None:
        if self.rank is not None and self.rank < 1:
            raise ValidationError(f"rank must be >= 1, got {self.rank}")


def mrr(outcomes: Sequence[RankOutcome], full_depth: bool = True) -> float:
    """Mean reciprocal rank under binary relevance; an absent rank contributes 0.

    full_depth records whether ranks came from the complete candidate ordering
    (the value is exact) or a truncated one (the value is a lower bound); the
    arithmetic is identical either way.
    """
    if not outcomes:
        raise ValidationError("mrr requires at least one outcome")
    del full_depth
    return float(sum(1.0 / o.rank for o in outcomes if o.rank is not None) / len(outcomes))


def _hit_percentage(outcomes: Sequence[RankOutcome], cutoff: int) -> float:
    if not outcomes:
        raise ValidationError("metric requires at least one outcome")
    hits = sum(1 for o in outcomes if o.rank is not None and o.rank <= cutoff)
    return 100.0 * hits / len(outcomes)


def t100(outcomes: Sequence[RankOutcome], cutoff: int = 100) -> float:
    """Percentage of queries whose relevant document appears in the top ``cutoff``."""
    return _hit_percentage(outcomes, cutoff)


def nnk_ret(outcomes: Sequence[RankOutcome], k: int) -> float:
    """Percentage of queries whose k nearest neighbors contain the original document."""
    return _hit_percentage(outcomes, k)


def aop(pairs: Sequence[tuple[Sequence[Key], Sequence[Key]]], k: int) -> float:
    """Mean overlap percentage between paired k-NN key lists (set semantics)."""
    if not pairs:
        raise ValidationError("aop requires at least one pair of NN lists")
    total = 0.0
    for left, right in pairs:
        if len(left) != k or len(right) != k:
            raise ValidationError(f"NN lists must have exactly k={k} entries, got {len(left)}/{len(right)}")
        total += 100.0 * len(set(left) & set(right)) / k
    return total / len(pairs)


@dataclass(frozen=True)
class SimilarityStats:
    mean: float
    std: float
    min: float
    max: float
    percent_above_mean: float
    pair_count: int
    capped: bool


def pair_similarities(
    vectors: np.ndarray, pair_cap: int | None = None, seed: int = 0
) -> tuple[np.ndarray, bool]:
    """Cosine similarities over unordered distinct pairs, float64.

    When the full pair count exceeds pair_cap, a seeded uniform sample of
    pair_cap distinct pairs is used instead (second return value True).
    """
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] < 2:
        raise ValidationError("pairwise similarity requires at least 2 vectors")
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0.0):
        raise ValidationError("zero-norm vector in similarity input")
    unit = mat / norms[:, None]
    n = mat.shape[0]
    total = n * (n - 1) // 2
    if pair_cap is not None and pair_cap < 1:
        raise ValidationError("pair_cap must be >= 1")
    if pair_cap is None or total <= pair_cap:
        gram = unit @ unit.T
        return gram[np.triu_indices(n, k=1)], False
    linear = _sample_distinct(total, pair_cap, np.random.Generator(np.random.PCG64(seed)))
    row_starts = np.cumsum(np.concatenate(([0], np.arange(n - 1, 0, -1))))  # pairs before row i
    i = np.searchsorted(row_starts, linear, side="right") - 1
    j = linear - row_starts[i] + i + 1
    sims = np.einsum("ij,ij->i", unit[i], unit[j])
    return sims, True


def _sample_distinct(total: int, count: int, rng: np.random.Generator) -> np.ndarray:
    # rejection sampling: count << total in practice, so collisions are rare
    chosen: set[int] = set()
    while len(chosen) < count:
        draw = rng.integers(0, total, size=count - len(chosen))
        chosen.update(int(x) for x in draw)
    return np.fromiter(sorted(chosen), dtype=np.int64, count=count)


def pairwise_similarity_stats(
    vectors: np.ndarray, pair_cap: int | None = None, seed: int = 0
) -> SimilarityStats:
    """Distribution summary of pairwise cosine similarities for one neighbor class."""
    sims, capped = pair_similarities(vectors, pair_cap, seed)
    return summarize_similarities(sims, capped)


def summarize_similarities(sims: np.ndarray, capped: bool = False) -> SimilarityStats:
    if sims.size == 0:
        raise ValidationError("no similarity pairs to summarize")
    mean = float(sims.mean())
    return SimilarityStats(
        mean=mean,
        std=float(sims.std()),
        min=float(sims.min()),
        max=float(sims.max()),
        percent_above_mean=float(100.0 * np.count_nonzero(sims > mean) / sims.size),
        pair_count=int(sims.size),
        capped=capped,
    )


@dataclass(frozen=True)
class Threshold:
    """Open interval test: value must be strictly above lo and strictly below hi."""

    lo: float | None = None
    hi: float | None = None

    def check(self, value: float) -> bool:
        return (self.lo is None or value > self.lo) and (self.hi is None or value < self.hi)

    def describe(self) -> str:
        if self.lo is not None and self.hi is not None:
            return f"{self.lo} < v < {self.hi}"
        if self.lo is not None:
            return f"v > {self.lo}"
        return f"v < {self.hi}"


DEFAULT_THRESHOLDS: Mapping[str, Threshold] = {
    "LL-HS": Threshold(lo=75.0),
    "LO-HS": Threshold(lo=70.0),
    "LL-PS": Threshold(lo=50.0, hi=70.0),
    "LO-PS": Threshold(lo=50.0, hi=70.0),
    "LO-DS": Threshold(hi=20.0),
}


def capability_matrix(
    aop20_by_category: Mapping[str, float],
    thresholds: Mapping[str, Threshold] = DEFAULT_THRESHOLDS,
) -> dict[str, bool]:
    """Classify each neighbor category as optimally encoded or not.

    The per-category bounds express what a well-behaved encoder should do:
    high overlap for highly similar neighbors, moderate overlap for partially
    similar ones (too-high means the model ignores the scrambling), and low
    overlap for dissimilar ones.
    """
    missing = [c for c in thresholds if c not in aop20_by_category]
    if missing:
        raise ValidationError(f"capability_matrix missing categories: {missing}")
    return {c: thresholds[c].check(float(aop20_by_category[c])) for c in thresholds}
