"""NN1_Ret / NN10_Ret: do perturbed documents still retrieve their original?

Every neighbor variant queries the pool of original (T+A) embeddings; the
metric is the percentage of queries whose top-k contains the original paper.
Highly similar classes should stay near 100 while dissimilar classes should
fall, so the per-category profile reads like a robustness fingerprint.
"""

from pathlib import Path

from nbrkit import EmbeddingStore, expand_codes, generate_variants, hash_embed, load_corpus
from nbrkit.evaluate import evaluate_nn_ret

corpus = load_corpus(Path(__file__).parent / "data" / "quickstart.jsonl")
codes = [c for c in expand_codes("all") if c not in ("T", "T+A")]
store = EmbeddingStore(model_name="hash3-64")
store.add_all(hash_embed(v) for v in generate_variants(corpus, ["T+A", *codes], 7))

by_class, by_category = evaluate_nn_ret(corpus, store, codes, ks=(1, 10))

print(f"{'category':10s} {'queries':>8s} {'NN1_Ret':>8s} {'NN10_Ret':>9s}")
for category, queries, nn1, nn10 in by_category.rows:
    print(f"{category:10s} {queries:8d} {nn1:8.2f} {nn10:9.2f}")

print("\nweakest classes by NN1_Ret:")
for code, category, queries, nn1, nn10 in sorted(by_class.rows, key=lambda r: r[3])[:5]:
    print(f"  {code:15s} {category:6s} NN1 {nn1:6.2f}  NN10 {nn10:6.2f}")
