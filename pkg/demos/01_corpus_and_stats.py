"""Load a title/abstract corpus, validate it, and print summary statistics.

Corpus files are JSON lines with exactly the fields id, title, abstract.
"""

from pathlib import Path

from nbrkit import corpus_stats, load_corpus

corpus = load_corpus(Path(__file__).parent / "data" / "quickstart.jsonl", name="quickstart")
stats = corpus_stats(corpus)

print(f"corpus {corpus.name!r}: {stats.count} documents")
print(f"  mean title length    {stats.mean_title_words:.2f} words")
print(f"  mean abstract length {stats.mean_abstract_words:.2f} words")
print(f"  empty abstracts      {stats.empty_abstracts}")
print()
print("first three documents:")
for doc in list(corpus)[:3]:
    print(f"  [{doc.id}] {doc.title}")
