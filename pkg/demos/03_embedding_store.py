"""Embed variants with the deterministic hash provider and persist the store.

The hash provider is a character-3-gram bucket embedder: fast, dependency
free, and reproducible across machines, which makes it the reference
provider for tests and demos. Real encoders plug in through the /embed wire
protocol (see the embed-sidecar package) or a prebuilt vectors file.
"""

from pathlib import Path

import numpy as np

from nbrkit import (
    expand_codes,
    generate_variants,
    hash_embed,
    EmbeddingStore,
    l2_normalize_store,
    load_corpus,
    load_store,
    save_store,
    standardize,
)

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

corpus = load_corpus(Path(__file__).parent / "data" / "quickstart.jsonl")
codes = expand_codes("all")  # T+A, T, then the 32 neighbor classes

store = EmbeddingStore(model_name="hash3-64")
store.add_all(hash_embed(v, dimension=64) for v in generate_variants(corpus, codes, 7))
print(f"embedded {len(store)} records of dimension {store.dimension}")

path = out_dir / "quickstart.nbrv"
save_store(store, path)
reloaded = load_store(path)
assert reloaded.keys() == store.keys()
print(f"saved and reloaded {path.name} ({path.stat().st_size} bytes, model {reloaded.model_name!r})")

unit = l2_normalize_store(store)
z = standardize(store)  # per-dimension z-score over the T+A reference set
sample_key = (corpus.ids()[0], "T+A")
print(f"\nvector for {sample_key}:")
print(f"  raw          norm {np.linalg.norm(store.vector(sample_key)):.4f}")
print(f"  l2           norm {np.linalg.norm(unit.vector(sample_key)):.4f}")
print(f"  standardized mean {z.vector(sample_key).mean():+.4f}")
