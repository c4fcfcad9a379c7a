import math

import numpy as np
import pytest

from interestrec import recommend
from interestrec.embeddings import EmbeddingMatrix
from interestrec.gmm import GmmModel

from oracles import linear_scan


def test_exact_match_distance_zero():
    emb = EmbeddingMatrix(("a", "b", "c"), np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]]))
    assert recommend.nearest_document([1.0, 1.0], emb) == ("b", 0.0)


def test_tie_breaks_lexicographically():
    emb = EmbeddingMatrix(("docB", "docA"), np.array([[1.0, 0.0], [-1.0, 0.0]]))
    assert recommend.nearest_document([0.0, 0.0], emb)[0] == "docA"


def test_exclusion():
    emb = EmbeddingMatrix(("a", "b"), np.array([[0.0], [5.0]]))
    assert recommend.nearest_document([0.1], emb, excluded={"a"}) == ("b", pytest.approx(4.9))
    with pytest.raises(ValueError):
        recommend.nearest_document([0.1], emb, excluded={"a", "b"})


def test_matches_linear_scan():
    rng = np.random.default_rng(0)
    ids = tuple(f"d{i:04d}" for i in rng.permutation(1000))
    emb = EmbeddingMatrix(ids, rng.normal(size=(1000, 8)))
    index = recommend.CandidateIndex(emb)
    queries = rng.normal(size=(100, 8))
    got_ids, got_dist = index.query(queries)
    for q, gid, gd in zip(queries, got_ids, got_dist):
        ref_id, ref_d = linear_scan(q, emb.doc_ids, emb.vectors)
        assert gid == ref_id
        assert gd == pytest.approx(ref_d, abs=1e-12)


def test_dimension_mismatch():
    emb = EmbeddingMatrix(("a",), np.zeros((1, 2)))
    with pytest.raises(ValueError):
        recommend.nearest_document([0.0, 0.0, 0.0], emb)


def two_clusters(seed=1):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, 0.3, size=(50, 2))
    b = rng.normal(0.0, 0.3, size=(50, 2)) + [20.0, 0.0]
    ids = tuple(f"a{i:02d}" for i in range(50)) + tuple(f"b{i:02d}" for i in range(50))
    return EmbeddingMatrix(ids, np.vstack([a, b]))


def test_recommend_basic_contracts():
    emb = two_clusters()
    model = GmmModel(np.array([1.0]), np.array([[0.0, 0.0]]), np.array([[0.3, 0.3]]))
    assert recommend.recommend(model, emb, 0) == []
    recs = recommend.recommend(model, emb, 30, excluded={"a00", "a01"}, seed=3)
    assert [r.sample_index for r in recs] == list(range(30))
    for r in recs:
        assert r.doc_id not in {"a00", "a01"}
        assert r.distance >= 0


def test_recommend_prefix_and_distances():
    emb = two_clusters()
    model = GmmModel(np.array([0.5, 0.5]), np.array([[0.0, 0.0], [20.0, 0.0]]), np.full((2, 2), 1.0))
    short = recommend.recommend(model, emb, 10, seed=5)
    long = recommend.recommend(model, emb, 25, seed=5)
    assert short == long[:10]
    from interestrec import gmm

    samples = gmm.sample(model, 25, 5)
    vec = dict(zip(emb.doc_ids, emb.vectors))
    for r, s in zip(long, samples):
        assert r.distance == pytest.approx(math.dist(s, vec[r.doc_id]), abs=1e-12)


def test_single_candidate_forced():
    emb = EmbeddingMatrix(("only",), np.array([[3.0, 4.0]]))
    model = GmmModel(np.array([1.0]), np.zeros((1, 2)), np.ones((1, 2)))
    assert [r.doc_id for r in recommend.recommend(model, emb, 6, seed=1)] == ["only"] * 6


def test_tight_model_stays_in_cluster():
    emb = two_clusters()
    model = GmmModel(np.array([1.0]), np.array([[20.0, 0.0]]), np.full((1, 2), 0.1))
    recs = recommend.recommend(model, emb, 200, seed=2)
    assert sum(r.doc_id.startswith("b") for r in recs) >= 0.9 * 200


def test_duplicates_kept():
    emb = EmbeddingMatrix(("x", "y"), np.array([[0.0], [100.0]]))
    model = GmmModel(np.array([1.0]), np.zeros((1, 1)), np.ones((1, 1)))
    assert [r.doc_id for r in recommend.recommend(model, emb, 5)] == ["x"] * 5


def test_csv_output(tmp_path):
    recs = [recommend.Recommendation("a", 0, 0.5), recommend.Recommendation("b,c", 1, 1.0)]
    recommend.write_recommendations(tmp_path / "r.csv", recs)
    assert (tmp_path / "r.csv").read_text().splitlines() == ["sample_index,doc_id,distance", "0,a,0.5", '1,"b,c",1']
