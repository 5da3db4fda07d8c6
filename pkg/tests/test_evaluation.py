from __future__ import annotations

import json

import numpy as np
import pytest

from lsimpute import (
    EmbeddingMatrix,
    WordPairDataset,
    bootstrap_eval,
    classify_pairs,
    cosine_similarity,
    load_wordpair_dataset,
    pearson,
    split_vocab,
)
from lsimpute.evaluation import DatasetFormatError, WordPair


def _dataset(rows: list[tuple[str, str, float, float]]) -> WordPairDataset:
    return WordPairDataset([WordPair(*r) for r in rows])


def test_load_dataset(tmp_path):
    p = tmp_path / "pairs.csv"
    p.write_text(
        "Term1,Term2,Similarity,Relatedness\n"
        "Anemia,Coumadin,623.75,926.50\n"
        "Rales,Lasix,742.00,1379.50\n"
    )
    ds = load_wordpair_dataset(str(p))
    assert len(ds) == 2
    assert ds.records[0].term1 == "anemia" and ds.records[0].term2 == "coumadin"
    assert ds.records[1].similarity == 742.00


def test_load_dataset_normalizes_multiword_terms(tmp_path):
    p = tmp_path / "pairs.csv"
    p.write_text("Term1,Term2,Similarity,Relatedness\nHeart Attack,Aspirin,100,200\n")
    ds = load_wordpair_dataset(str(p))
    assert ds.records[0].term1 == "heart-attack"


def test_load_dataset_rejects_out_of_range_scores(tmp_path):
    p = tmp_path / "pairs.csv"
    p.write_text("Term1,Term2,Similarity,Relatedness\na,b,1700,100\n")
    with pytest.raises(DatasetFormatError, match=":2.*1700"):
        load_wordpair_dataset(str(p))


def test_load_dataset_rejects_malformed_rows(tmp_path):
    p = tmp_path / "pairs.csv"
    p.write_text("Term1,Term2,Similarity,Relatedness\na,b,x,100\n")
    with pytest.raises(DatasetFormatError, match=":2"):
        load_wordpair_dataset(str(p))
    p.write_text("Wrong,Header\na,b,1,1\n")
    with pytest.raises(DatasetFormatError, match=":1"):
        load_wordpair_dataset(str(p))


def test_split_vocab_sizes():
    trained, imputed = split_vocab({f"t{i}" for i in range(10)}, seed=1)
    assert {len(trained), len(imputed)} == {5}
    trained, imputed = split_vocab({f"t{i}" for i in range(11)}, seed=1)
    assert sorted([len(trained), len(imputed)]) == [5, 6]


def test_split_vocab_deterministic_and_disjoint():
    terms = {f"t{i}" for i in range(31)}
    a = split_vocab(terms, seed=7)
    b = split_vocab(terms, seed=7)
    assert a == b
    assert a[0] | a[1] == terms and not (a[0] & a[1])
    assert split_vocab(terms, seed=8) != a


def test_classify_pairs_routing():
    ds = _dataset([
        ("a", "b", 1.0, 1.0),     # both trained
        ("a", "x", 1.0, 1.0),     # mixed
        ("y", "a", 1.0, 1.0),     # mixed, reversed order
        ("x", "y", 1.0, 1.0),     # both imputed
        ("a", "zz", 1.0, 1.0),    # zz unknown -> skipped
    ])
    split = classify_pairs(ds, {"a", "b"}, {"x", "y"})
    assert [r.term2 for r in split.subsets["trained/trained"]] == ["b"]
    assert len(split.subsets["imputed/trained"]) == 2
    assert len(split.subsets["imputed/imputed"]) == 1
    assert [r.term2 for r in split.skipped] == ["zz"]


def test_classify_pairs_partition_identity_random():
    rng = np.random.default_rng(12)
    vocab = [f"w{i}" for i in range(12)]
    for _ in range(200):
        n = int(rng.integers(1, 20))
        rows = []
        seen = set()
        while len(rows) < n:
            t1, t2 = rng.choice(vocab, 2, replace=False)
            if frozenset((t1, t2)) in seen:
                continue
            seen.add(frozenset((t1, t2)))
            rows.append((t1, t2, 1.0, 2.0))
        ds = _dataset(rows)
        members = list(rng.permutation(vocab))
        cut1, cut2 = sorted(rng.integers(0, len(vocab) + 1, 2))
        split = classify_pairs(ds, set(members[:cut1]), set(members[cut1:cut2]))
        total = sum(len(v) for v in split.subsets.values()) + len(split.skipped)
        assert total == len(ds)


def test_classify_pairs_rejects_overlapping_vocabs():
    with pytest.raises(ValueError, match="overlap"):
        classify_pairs(_dataset([("a", "b", 1, 1)]), {"a"}, {"a"})


def test_cosine_basics():
    assert cosine_similarity([1.0, 2.0], [1.0, 2.0]) == pytest.approx(1.0)
    assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)
    assert cosine_similarity([1.0, 1.0], [1.0, 0.0]) == pytest.approx(1 / np.sqrt(2))
    with pytest.raises(ValueError, match="zero vector"):
        cosine_similarity([0.0, 0.0], [1.0, 0.0])


def test_cosine_scaling_invariance():
    rng = np.random.default_rng(4)
    for _ in range(50):
        u = rng.standard_normal(6)
        c = float(rng.uniform(0.1, 10))
        assert abs(cosine_similarity(u, c * u) - 1.0) < 1e-12
        assert abs(cosine_similarity(u, -c * u) + 1.0) < 1e-12


def test_pearson_known_values():
    xs = np.array([1.0, 2.0, 3.0, 4.0])
    assert pearson(xs, 2 * xs + 3) == pytest.approx(1.0, abs=1e-12)
    assert pearson(xs, -xs) == pytest.approx(-1.0, abs=1e-12)
    assert pearson(xs, np.array([1.0, 3.0, 2.0, 4.0])) == pytest.approx(0.8, abs=1e-12)


def test_pearson_affine_invariance():
    rng = np.random.default_rng(9)
    for _ in range(50):
        xs = rng.standard_normal(20)
        ys = rng.standard_normal(20)
        base = pearson(xs, ys)
        a, b = float(rng.uniform(0.1, 5)), float(rng.uniform(-10, 10))
        assert abs(pearson(a * xs + b, ys) - base) < 1e-12
        assert abs(pearson(xs, a * ys + b) - base) < 1e-12


def test_pearson_rejects_constant_input():
    with pytest.raises(ValueError, match="constant"):
        pearson(np.ones(5), np.arange(5.0))


def _toy_embedding() -> EmbeddingMatrix:
    rng = np.random.default_rng(0)
    return EmbeddingMatrix([f"w{i}" for i in range(8)], rng.standard_normal((8, 4)))


def test_bootstrap_reproducible_and_reports_n():
    rng = np.random.default_rng(33)
    emb = _toy_embedding()
    rows = []
    for i in range(8):
        for j in range(i + 1, 8):
            rows.append((f"w{i}", f"w{j}", float(rng.uniform(0, 1600)), float(rng.uniform(0, 1600))))
    ds = _dataset(rows)
    split = classify_pairs(ds, {f"w{i}" for i in range(4)}, {f"w{i}" for i in range(4, 8)})
    r1 = bootstrap_eval(emb, split, n_resamples=200, seed=5)
    r2 = bootstrap_eval(emb, split, n_resamples=200, seed=5)
    assert r1.to_json() == r2.to_json()
    cell = r1.scores["trained/trained"]["similarity"]
    assert cell.n == 6
    assert cell.r is not None and -1 <= cell.r <= 1
    assert json.loads(r1.to_json())["subsets"]["imputed/imputed"]["relatedness"]["n"] == 6


def test_bootstrap_two_point_subset_flagged_low_n():
    emb = _toy_embedding()
    ds = _dataset([("w0", "w1", 100.0, 100.0), ("w2", "w3", 900.0, 900.0)])
    split = classify_pairs(ds, {"w0", "w1", "w2", "w3"}, {"w7"})
    report = bootstrap_eval(emb, split, n_resamples=64, seed=2)
    cell = report.scores["trained/trained"]["similarity"]
    assert cell.n == 2
    assert cell.low_n
    # resamples drawing one record twice are degenerate (constant input)
    assert cell.degenerate_resamples > 0
    if cell.boot_mean is not None:
        assert abs(abs(cell.boot_mean) - 1.0) < 1e-12  # 2-point correlations are +-1


def test_bootstrap_saturated_case():
    # cosines equal to the human order: every resample correlates perfectly
    emb = EmbeddingMatrix(
        ["a", "b", "c", "d"],
        np.array([[1.0, 0.0], [1.0, 0.1], [1.0, 0.4], [1.0, 1.0]]),
    )
    rows = [
        ("a", "b", 100.0, 100.0),
        ("a", "c", 200.0, 200.0),
        ("a", "d", 300.0, 300.0),
    ]
    human = []
    for t1, t2, *_ in rows:
        human.append(cosine_similarity(emb.row(t1), emb.row(t2)))
    scale = 1500 / max(human)
    rows = [(t1, t2, h * scale, h * scale) for (t1, t2, *_), h in zip(rows, human)]
    split = classify_pairs(_dataset(rows), {"a", "b", "c", "d"}, set())
    report = bootstrap_eval(emb, split, n_resamples=100, seed=1)
    cell = report.scores["trained/trained"]["similarity"]
    assert cell.r == pytest.approx(1.0, abs=1e-9)
    assert cell.boot_mean == pytest.approx(1.0, abs=1e-9)
    assert cell.boot_std < 1e-9


def test_bootstrap_missing_vectors_counted():
    emb = _toy_embedding()
    ds = _dataset([("w0", "nope", 10.0, 10.0), ("w0", "w1", 20.0, 20.0)])
    split = classify_pairs(ds, {"w0", "w1", "nope"}, set())
    report = bootstrap_eval(emb, split, n_resamples=10, seed=0)
    assert report.missing_vector_pairs["trained/trained"] == 1
    assert report.scores["trained/trained"]["similarity"].n == 1
    assert report.scores["trained/trained"]["similarity"].r is None


def test_evaluation_does_not_mutate_embedding():
    emb = _toy_embedding()
    before = emb.vectors.tobytes()
    ds = _dataset([("w0", "w1", 10.0, 10.0), ("w2", "w3", 20.0, 20.0), ("w0", "w2", 30.0, 30.0)])
    split = classify_pairs(ds, {f"w{i}" for i in range(8)}, set())
    bootstrap_eval(emb, split, n_resamples=50, seed=3)
    assert emb.vectors.tobytes() == before
