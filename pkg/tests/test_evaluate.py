from __future__ import annotations

import numpy as np
import pytest

from nbrkit import EmbeddingStore, generate_variants, hash_embed
from nbrkit.errors import ValidationError
from nbrkit.evaluate import (
    RunConfig,
    build_report,
    evaluate_aop,
    evaluate_nn_ret,
    evaluate_similarity,
    evaluate_tasks,
)

from conftest import make_corpus

CODES = ["T_ARot", "T_AShuff", "TDelNN"]


@pytest.fixture(scope="module")
def corpus():
    return make_corpus(15, seed=63)


@pytest.fixture(scope="module")
def store(corpus):
    store = EmbeddingStore(model_name="hash3-64")
    store.add_all(hash_embed(v) for v in generate_variants(corpus, ["T+A", "T", *CODES], 7))
    return store


def test_nn_ret_category_pools_queries(corpus, store):
    by_class, by_category = evaluate_nn_ret(corpus, store, CODES, ks=(1, 10))
    rows = {r[0]: r for r in by_class.rows}
    assert set(rows) == set(CODES)
    # LL-PS pools T_ARot and T_AShuff queries (15 each)
    cat = {r[0]: r for r in by_category.rows}
    assert cat["LL-PS"][1] == 30
    assert cat["LO-DS"][1] == 15
    # pooled value is the query-weighted rate, not the mean of class values
    nn1_rot = rows["T_ARot"][3] * 15
    nn1_shuff = rows["T_AShuff"][3] * 15
    assert cat["LL-PS"][2] == pytest.approx((nn1_rot + nn1_shuff) / 30, abs=0.01)


def test_nn_ret_monotone_columns(corpus, store):
    by_class, _ = evaluate_nn_ret(corpus, store, CODES, ks=(1, 10))
    for row in by_class.rows:
        assert row[3] <= row[4]  # nn1 <= nn10


def test_aop_tables_shape(corpus, store):
    by_class, by_category, values = evaluate_aop(
        corpus, store, CODES, ks=(10, 20), sample_size=15, seed=0
    )
    assert {r[2] for r in by_class.rows} == {10, 20}
    assert set(values) == {10, 20}
    assert set(values[20]) == {"LL-PS", "LO-DS"}
    for row in by_class.rows:
        assert 0.0 <= row[4] <= 100.0


def test_similarity_tables(corpus, store):
    by_class, by_category = evaluate_similarity(store, CODES, pair_cap=None, seed=0)
    assert len(by_class.rows) == 3
    pair_count = 15 * 14 // 2
    assert all(r[2] == pair_count for r in by_class.rows)
    cat = {r[0]: r for r in by_category.rows}
    assert cat["LL-PS"][1] == 2 * pair_count  # pooled pairs across two classes


def test_unknown_task_rejected(corpus, store):
    with pytest.raises(ValidationError):
        evaluate_tasks(corpus, store, ["task9"])


def test_build_report_selects_tables(corpus, store):
    config = RunConfig(
        corpus_path="mem://",
        codes=CODES,
        tasks=["task1", "nn_ret", "similarity"],
        task_sample=15,
        sample_seed=0,
    )
    report = build_report(config, corpus, store)
    assert set(report.tables) == {
        "task1",
        "nn_ret_by_class",
        "nn_ret_by_category",
        "similarity_by_class",
        "similarity_by_category",
    }
    assert report.meta["config_digest"] == config.digest()
    assert report.meta["model"] == "hash3-64"


def test_build_report_aop_includes_capability_when_all_categories(corpus):
    # all five categories present -> capability matrix table appears
    all_codes = ["T_ARot", "T_ADelDT", "TDelNN", "TNNU_A", "T_ADelRand"]
    store = EmbeddingStore(model_name="hash3-64")
    store.add_all(hash_embed(v) for v in generate_variants(corpus, ["T+A", "T", *all_codes], 7))
    config = RunConfig(
        corpus_path="mem://",
        codes=all_codes,
        tasks=["aop"],
        aop_sample=15,
        aop_ks=[10, 20],
        sample_seed=0,
    )
    report = build_report(config, corpus, store)
    assert "capability_matrix" in report.tables
    assert len(report.tables["capability_matrix"].rows) == 5


def test_normalization_affects_digest_not_behaviorless(corpus, store):
    base = RunConfig(corpus_path="mem://", codes=CODES, tasks=["task1"], task_sample=15)
    l2 = RunConfig(corpus_path="mem://", codes=CODES, tasks=["task1"], task_sample=15, normalization="l2")
    assert base.digest() != l2.digest()
    a = build_report(base, corpus, store)
    b = build_report(l2, corpus, store)
    # hash vectors are already unit norm, so the scores agree even though configs differ
    assert a.tables["task1"].rows == b.tables["task1"].rows


def test_config_rerunnable_from_report_metadata(corpus, store):
    config = RunConfig(corpus_path="mem://", codes=CODES, tasks=["task1"], task_sample=15)
    report = build_report(config, corpus, store)
    rebuilt = RunConfig(**report.meta["config"])
    assert rebuilt == config
    again = build_report(rebuilt, corpus, store)
    assert again.tables["task1"].rows == report.tables["task1"].rows
