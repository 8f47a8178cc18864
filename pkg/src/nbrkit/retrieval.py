"""Exact cosine top-k search and construction of the evaluation task setups.

Search is brute force by design: corpora stay small enough that exactness is
cheap, and it removes an approximation error source from every metric.
Rankings order by (-cosine, key); ties always break toward the ascending
(doc_id, code) key so reports are byte-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Collection, Iterable, Sequence

import numpy as np

from .corpus import Corpus
from .embed import EmbeddingStore, Key
from .errors import ValidationError


@dataclass(frozen=True)
class VectorIndex:
    keys: tuple[Key, ...]  # deterministically sorted by (doc_id, code)
    matrix: np.ndarray  # (n, D) float32
    norms: np.ndarray  # (n,) float64
    positions: dict[Key, int] = field(repr=False, default_factory=dict)

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[1])

    def position(self, key: Key) -> int:
        try:
            return self.positions[key]
        except KeyError:
            raise ValidationError(f"key {key} not in index") from None


def build_index(
    store: EmbeddingStore,
    keys: Iterable[Key] | None = None,
    codes: Collection[str] | None = None,
) -> VectorIndex:
    """Index the selected keys (explicit list, or every key with a matching code)."""
    if keys is not None:
        selected = sorted(set(keys))
        missing = [k for k in selected if k not in store]
        if missing:
            raise ValidationError(f"store is missing {len(missing)} key(s), first: {missing[0]}")
    elif codes is not None:
        wanted = set(codes)
        selected = sorted(k for k in store.keys() if k[1] in wanted)
    else:
        selected = store.keys()
    if not selected:
        raise ValidationError("index key filter matched nothing")
    matrix = np.stack([store.vector(k) for k in selected]).astype(np.float32)
    norms = np.linalg.norm(matrix.astype(np.float64), axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise ValidationError(f"zero-norm vector in index at key {selected[int(zero[0])]}")
    return VectorIndex(
        keys=tuple(selected),
        matrix=matrix,
        norms=norms,
        positions={k: i for i, k in enumerate(selected)},
    )


def _cosine_scores(index: VectorIndex, query: np.ndarray) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1 or q.size != index.dimension:
        raise ValidationError(f"query dimension {q.size} != index dimension {index.dimension}")
    qnorm = float(np.linalg.norm(q))
    if qnorm == 0.0:
        raise ValidationError("zero-norm query vector")
    return (index.matrix @ q) / (index.norms * qnorm)


def query_topk(
    index: VectorIndex,
    query: np.ndarray,
    k: int,
    exclude: Key | Iterable[Key] | None = None,
) -> list[tuple[Key, float]]:
    """Exact top-k by cosine, descending; excluded key(s) never appear."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    scores = _cosine_scores(index, query)
    order = np.argsort(-scores, kind="stable")  # stable over key-sorted rows = key tie-break
    out: list[tuple[Key, float]] = []
    skip = {index.positions[key] for key in _as_keys(exclude) if key in index.positions}
    for idx in order:
        if idx in skip:
            continue
        out.append((index.keys[idx], float(scores[idx])))
        if len(out) == k:
            break
    return out


def _as_keys(exclude: Key | Iterable[Key] | None) -> set[Key]:
    if exclude is None:
        return set()
    if isinstance(exclude, tuple) and len(exclude) == 2 and isinstance(exclude[0], str):
        return {exclude}  # a single (doc_id, code) key
    return set(exclude)


def rank_of(
    index: VectorIndex, query: np.ndarray, relevant: Key, exclude: Key | None = None
) -> int:
    """1-based rank of the relevant key under the same ordering as query_topk."""
    scores = _cosine_scores(index, query)
    rel_idx = index.position(relevant)
    rel_score = scores[rel_idx]
    better = int(np.count_nonzero(scores > rel_score))
    ties_before = int(np.count_nonzero(scores[:rel_idx] == rel_score))
    rank = better + ties_before + 1
    if exclude is not None and exclude != relevant and exclude in index.positions:
        ex_idx = index.position(exclude)
        ex_score = scores[ex_idx]
        if ex_score > rel_score or (ex_score == rel_score and ex_idx < rel_idx):
            rank -= 1
    return rank


@dataclass(frozen=True)
class TaskSetup:
    """One retrieval task: queries, a candidate pool, and the single relevant key.

    Per-query candidate sets are the pool minus this query's exclusion (used
    by task2, where a query's own title key is not a candidate).
    """

    task_id: str
    queries: tuple[Key, ...]
    candidate_pool: tuple[Key, ...]
    relevant: dict[Key, Key]
    exclusions: dict[Key, Key] = field(default_factory=dict)

    def candidate_count(self, query: Key) -> int:
        return len(self.candidate_pool) - (1 if query in self.exclusions else 0)

    def candidates(self, query: Key) -> set[Key]:
        pool = set(self.candidate_pool)
        pool.discard(self.exclusions.get(query, ("", "")))
        return pool


DocSource = Corpus | Sequence[str]


def doc_ids(source: DocSource) -> list[str]:
    """Document ids in stable order, from a Corpus or a plain id sequence."""
    return source.ids() if isinstance(source, Corpus) else list(source)


def dump_rankings(
    store: EmbeddingStore,
    task: TaskSetup,
    path: str | Path,
    depth: int | None = None,
) -> int:
    """Write per-query ranked lists as JSONL: {"query": key, "ranked": [[key, score], ...]}.

    Depth defaults to the full candidate pool. Returns the number of lines.
    """
    index = build_index(store, keys=task.candidate_pool)
    k = depth if depth is not None else len(index)
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for query in task.queries:
            ranked = query_topk(index, store.vector(query), k, exclude=task.exclusions.get(query))
            fh.write(
                json.dumps(
                    {"query": list(query), "ranked": [[list(key), score] for key, score in ranked]}
                )
            )
            fh.write("\n")
            n += 1
    return n


def _require_keys(store: EmbeddingStore, keys: Iterable[Key]) -> None:
    for key in keys:
        if key not in store:
            raise ValidationError(f"store is missing required record {key}")


def _sample_ids(ids: Sequence[str], sample_size: int, seed: int) -> list[str]:
    m = min(sample_size, len(ids))
    rng = np.random.Generator(np.random.PCG64(seed))
    picked = sorted(rng.choice(len(ids), size=m, replace=False).tolist())
    return [ids[i] for i in picked]


def build_task1(
    corpus: DocSource, store: EmbeddingStore, sample_size: int = 1000, seed: int = 0
) -> TaskSetup:
    """Title queries (a seeded document sample) against every T+A candidate."""
    all_ids = doc_ids(corpus)
    _require_keys(store, ((i, "T") for i in all_ids))
    _require_keys(store, ((i, "T+A") for i in all_ids))
    sampled = _sample_ids(all_ids, sample_size, seed)
    return TaskSetup(
        task_id="task1",
        queries=tuple((i, "T") for i in sampled),
        candidate_pool=tuple((i, "T+A") for i in all_ids),
        relevant={(i, "T"): (i, "T+A") for i in sampled},
    )


def build_task2(
    corpus: DocSource, store: EmbeddingStore, sample_size: int = 1000, seed: int = 0
) -> TaskSetup:
    """Task1 plus every other document's title in the candidate pool."""
    task1 = build_task1(corpus, store, sample_size, seed)
    all_ids = doc_ids(corpus)
    pool = tuple((i, "T+A") for i in all_ids) + tuple((i, "T") for i in all_ids)
    return TaskSetup(
        task_id="task2",
        queries=task1.queries,
        candidate_pool=pool,
        relevant=dict(task1.relevant),
        exclusions={q: q for q in task1.queries},  # own title key is not a candidate
    )


def build_nn_ret(corpus: DocSource, store: EmbeddingStore, codes: Sequence[str]) -> TaskSetup:
    """Every (doc, code) variant as a query against the T+A candidates."""
    all_ids = doc_ids(corpus)
    _require_keys(store, ((i, "T+A") for i in all_ids))
    queries = []
    for code in codes:
        _require_keys(store, ((i, code) for i in all_ids))
        queries.extend((i, code) for i in all_ids)
    return TaskSetup(
        task_id="nn_ret",
        queries=tuple(queries),
        candidate_pool=tuple((i, "T+A") for i in all_ids),
        relevant={q: (q[0], "T+A") for q in queries},
    )


def build_aop(
    corpus: DocSource,
    store: EmbeddingStore,
    code: str,
    sample_size: int = 2000,
    k: int = 10,
    seed: int = 0,
) -> list[tuple[list[Key], list[Key]]]:
    """Paired k-NN key lists for a neighbor class and its originals.

    The candidate index holds every document's variant and T+A vectors; for
    each sampled document the k nearest neighbors of its variant key and of
    its T+A key are returned. Both of the document's own keys are excluded
    from both lists, so a variant vector identical to its original yields
    identical lists (100% overlap) and the pair never inflates its own score.
    """
    all_ids = doc_ids(corpus)
    _require_keys(store, ((i, code) for i in all_ids))
    _require_keys(store, ((i, "T+A") for i in all_ids))
    if 2 * len(all_ids) - 2 < k:
        raise ValidationError(
            f"AOP-{k} needs at least {(k + 3) // 2} documents "
            f"(candidate pool after self-exclusion is 2N-2), got {len(all_ids)}"
        )
    index = build_index(store, codes=(code, "T+A"))
    pairs = []
    for doc_id in _sample_ids(all_ids, sample_size, seed):
        own = {(doc_id, code), (doc_id, "T+A")}
        variant_nn = [key for key, _ in query_topk(index, store.vector((doc_id, code)), k, exclude=own)]
        original_nn = [key for key, _ in query_topk(index, store.vector((doc_id, "T+A")), k, exclude=own)]
        pairs.append((variant_nn, original_nn))
    return pairs
