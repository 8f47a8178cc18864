"""Render every registered textual-neighbor class for one document.

Each of the 32 classes perturbs the title and/or abstract and carries an
orthography label (LO lossy / LL lossless) and a semantics label (HS / PS /
DS). Generation is seeded per (document, class), so this gallery is stable.
"""

from pathlib import Path

from nbrkit import REGISTRY, apply_neighbor, load_corpus

corpus = load_corpus(Path(__file__).parent / "data" / "quickstart.jsonl")
doc = corpus["p01"]
SEED = 7

print(f"document [{doc.id}]")
print(f"  T: {doc.title}")
print(f"  A: {doc.abstract}")

current_category = None
for code, spec in REGISTRY.items():
    if spec.category != current_category:
        current_category = spec.category
        print(f"\n=== {current_category} ===")
    variant = apply_neighbor(doc, code, SEED)
    print(f"\n[{code}] {spec.form}")
    if variant.title != doc.title:
        print(f"  T: {variant.title}")
    if variant.abstract != doc.abstract:
        print(f"  A: {variant.abstract or '(deleted)'}")
    if variant.title == doc.title and variant.abstract == doc.abstract:
        print("  (identical to the original for this document)")
