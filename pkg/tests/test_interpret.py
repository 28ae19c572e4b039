import numpy as np
import pytest

from mapcompare.cluster import build_graph
from mapcompare.corpus import Document, Thesaurus, ThesaurusNode
from mapcompare.interpret import (
    cluster_top_docs,
    cluster_top_terms,
    js_divergence,
    rollup,
    topic_distances,
    topic_top_docs,
    topic_top_terms,
)
from mapcompare.lda import LdaConfig, train

from conftest import make_bow


@pytest.fixture(scope="module")
def model():
    rng = np.random.default_rng(0)
    docs = [rng.integers(0, 6, size=12).tolist() for _ in range(15)]
    return train(make_bow(docs, 6), LdaConfig(k=3, iterations=50, seed=0))


class TestTopicTopTerms:
    def test_matches_sort_oracle(self, model):
        for t in range(model.n_topics):
            got = topic_top_terms(model, t, n=4)
            oracle = sorted(
                ((model.vocab_terms[w], np.log(model.phi[t, w])) for w in range(6)),
                key=lambda kv: (-kv[1], kv[0]),
            )[:4]
            assert [term for term, _ in got] == [term for term, _ in oracle]

    def test_relevance_reweights(self, model):
        plain = topic_top_terms(model, 0, n=6, lambda_=1.0)
        exclusive = topic_top_terms(model, 0, n=6, lambda_=0.0)
        # lambda=0 score is the log lift log(phi/p_w)
        p_w = model.term_marginals()
        for term, score in exclusive:
            w = model.vocab_terms.index(term)
            expected = np.log(model.phi[0, w]) - np.log(p_w[w])
            assert score == pytest.approx(expected)
        assert {t for t, _ in plain} == {t for t, _ in exclusive}  # full vocab here

    def test_lambda_validated(self, model):
        with pytest.raises(ValueError):
            topic_top_terms(model, 0, lambda_=1.5)


class TestTopDocs:
    def test_topic_top_docs_sorted(self, model):
        got = topic_top_docs(model, 1, n=5)
        scores = [s for _, s in got]
        assert scores == sorted(scores, reverse=True)
        assert got[0][1] == pytest.approx(model.theta[:, 1].max())

    def test_cluster_top_docs_by_degree(self):
        docs = [
            Document(id="hub", title="t", references=("a", "b", "c")),
            Document(id="a", title="t"),
            Document(id="b", title="t"),
            Document(id="c", title="t"),
        ]
        g = build_graph(docs)
        got = cluster_top_docs(["hub", "a", "b"], g, n=2)
        assert got[0] == ("hub", 3.0)
        assert got[1] == ("a", 1.0)

    def test_cluster_top_terms_count_oracle(self):
        bow = make_bow([[0, 0, 1], [1, 2], [2, 2, 2]], 3)
        got = cluster_top_terms(["d0", "d1"], bow, n=3)
        assert got == [("t0", 2.0), ("t1", 2.0), ("t2", 1.0)]

    def test_cluster_top_terms_ignores_unknown_docs(self):
        bow = make_bow([[0]], 1)
        assert cluster_top_terms(["d0", "ghost"], bow, n=5) == [("t0", 1.0)]


class TestRollup:
    def thesaurus(self):
        return Thesaurus(
            [
                ThesaurusNode("root", "science", None),
                ThesaurusNode("bio", "biology", "root"),
                ThesaurusNode("gen", "genetics", "bio"),
                ThesaurusNode("gen2", "genetics", "root"),  # same label, 2nd spot
            ]
        )

    def test_paths_and_unmatched(self):
        paths, unmatched = rollup(["genetics", "astrology"], self.thesaurus())
        assert ["science", "biology", "genetics"] in paths
        assert ["science", "genetics"] in paths
        assert len(paths) == 2
        assert unmatched == ["astrology"]

    def test_label_matching_normalized(self):
        paths, unmatched = rollup(["Biology"], self.thesaurus())
        assert paths == [["science", "biology"]]
        assert unmatched == []


class TestJsDivergence:
    def test_identical_zero(self):
        p = np.array([0.2, 0.3, 0.5])
        assert js_divergence(p, p) == 0.0

    def test_disjoint_ln2(self):
        p = np.array([1.0, 0.0])
        q = np.array([0.0, 1.0])
        assert js_divergence(p, q) == pytest.approx(np.log(2))

    def test_symmetric_bounded(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            p = rng.random(8)
            p /= p.sum()
            q = rng.random(8)
            q /= q.sum()
            d1 = js_divergence(p, q)
            d2 = js_divergence(q, p)
            assert d1 == pytest.approx(d2, abs=1e-12)
            assert 0.0 <= d1 <= np.log(2) + 1e-12


class TestTopicDistances:
    def test_shapes_and_properties(self, model):
        dist, coords, prevalence, err = topic_distances(model)
        k = model.n_topics
        assert dist.shape == (k, k)
        assert np.allclose(dist, dist.T)
        assert np.allclose(np.diag(dist), 0.0)
        assert coords.shape == (k, 2)
        assert prevalence.shape == (k,)
        assert 0.0 <= err <= 1.0

    def test_embedding_preserves_exact_2d_distances(self):
        # three points whose squared distances are exactly 2-D embeddable
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        dist = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        from mapcompare.interpret import _pcoa_2d

        coords, err = _pcoa_2d(dist)
        rebuilt = np.linalg.norm(coords[:, None] - coords[None, :], axis=2)
        assert np.allclose(rebuilt, dist, atol=1e-9)
        assert err == pytest.approx(0.0, abs=1e-9)

    def test_single_topic(self):
        from mapcompare.interpret import _pcoa_2d

        coords, err = _pcoa_2d(np.zeros((1, 1)))
        assert coords.shape == (1, 2)
        assert err == 0.0
