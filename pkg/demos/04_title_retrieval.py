"""Score the two title-query retrieval tasks with MRR and T100.

task1: each sampled document's title embedding queries the pool of all
title+abstract embeddings; the only relevant candidate is the same paper.
task2: every other paper's title joins the candidate pool as a distractor
(the query's own title key is excluded), which stresses encoders that place
short and long texts in different regions.

On this 12-document topical corpus the hash embedder retrieves perfectly;
the separation only becomes interesting with real encoders and thousands of
candidates (run the same code against a store produced by the embed-sidecar).
"""

from pathlib import Path

from nbrkit import (
    EmbeddingStore,
    build_task1,
    build_task2,
    generate_variants,
    hash_embed,
    load_corpus,
    mrr,
    t100,
)
from nbrkit.evaluate import rank_outcomes

corpus = load_corpus(Path(__file__).parent / "data" / "quickstart.jsonl")
store = EmbeddingStore(model_name="hash3-64")
store.add_all(hash_embed(v) for v in generate_variants(corpus, ["T+A", "T"], 7))

for build in (build_task1, build_task2):
    task = build(corpus, store, sample_size=1000, seed=5)
    outcomes = rank_outcomes(store, task)
    pool = task.candidate_count(task.queries[0])
    print(f"{task.task_id}: {len(task.queries)} queries, {pool} candidates each")
    print(f"  MRR  {mrr(outcomes):.3f}")
    print(f"  T100 {t100(outcomes):.2f}")
    worst = max(outcomes, key=lambda o: o.rank or 0)
    print(f"  hardest query {worst.query[0]} ranked its paper at {worst.rank}")
    print()
