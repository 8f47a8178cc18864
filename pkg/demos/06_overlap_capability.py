"""k-NN overlap (AOP) between variants and originals, and the capability matrix.

AOP-k asks a different question than retrieval: not "is the original in the
top-k" but "do the variant and the original see the same neighborhood". The
capability matrix then classifies each neighbor category with open-interval
thresholds on AOP-20: an encoder should keep lossless/highly-similar
neighborhoods intact (high overlap), react to scrambling (moderate overlap),
and separate dissimilar variants (low overlap).

Also prints the pairwise-similarity distribution per category, which shows
how tightly each class's vectors cluster.
"""

from pathlib import Path

from nbrkit import EmbeddingStore, expand_codes, generate_variants, hash_embed, load_corpus
from nbrkit.evaluate import capability_table, evaluate_aop, evaluate_similarity

corpus = load_corpus(Path(__file__).parent / "data" / "quickstart.jsonl")
codes = [c for c in expand_codes("all") if c not in ("T", "T+A")]
store = EmbeddingStore(model_name="hash3-64")
store.add_all(hash_embed(v) for v in generate_variants(corpus, ["T+A", *codes], 7))

by_class, by_category, values = evaluate_aop(corpus, store, codes, ks=(10, 20), sample_size=12, seed=0)
print(f"{'category':10s} {'k':>3s} {'pairs':>6s} {'AOP':>7s}")
for category, k, pairs, value in by_category.rows:
    print(f"{category:10s} {k:3d} {pairs:6d} {value:7.2f}")

print("\ncapability matrix (AOP-20 thresholds):")
table = capability_table(store.model_name, values[20])
for model, category, aop20, threshold, optimal in table.rows:
    verdict = "optimal" if optimal else "not optimal"
    print(f"  {category:6s} {aop20:7.2f}  ({threshold:12s})  {verdict}")

sim_class, sim_category = evaluate_similarity(store, codes, pair_cap=None, seed=0)
print("\npairwise cosine similarity by category:")
print(f"{'category':10s} {'mean':>7s} {'std':>7s} {'min':>7s} {'max':>7s} {'%>mean':>7s}")
for category, pairs, mean, std, lo, hi, above, capped in sim_category.rows:
    print(f"{category:10s} {mean:7.3f} {std:7.3f} {lo:7.3f} {hi:7.3f} {above:7.2f}")
