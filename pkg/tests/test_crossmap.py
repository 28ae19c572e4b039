import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapcompare.crossmap import (
    DEFAULT_SWEEP_GRID,
    CrossMap,
    compute,
    relate,
    sweep,
)


def naive_crossmap(q, assignment, cluster_ids):
    """Double-loop reference implementation of both averaging directions."""
    n, n_topics = q.shape
    c_index = {c: i for i, c in enumerate(cluster_ids)}
    p_ct = np.zeros((len(cluster_ids), n_topics))
    p_tc = np.zeros((n_topics, len(cluster_ids)))
    for ci, c in enumerate(cluster_ids):
        members = [i for i, cc in assignment.items() if cc == c]
        for t in range(n_topics):
            mass = sum(q[i, t] for i in members)
            p_ct[ci, t] = mass / len(members) if members else 0.0
    for t in range(n_topics):
        total = sum(q[i, t] for i in range(n))
        for ci, c in enumerate(cluster_ids):
            members = [i for i, cc in assignment.items() if cc == c]
            mass = sum(q[i, t] for i in members)
            p_tc[t, ci] = mass / total if total > 0 else 0.0
    return p_ct, p_tc


def random_instance(rng, n_max=60, t_max=8, c_max=10, unassigned_rate=0.2):
    n = int(rng.integers(2, n_max))
    t = int(rng.integers(1, t_max))
    c = int(rng.integers(1, c_max))
    q = rng.random((n, t))
    q /= q.sum(axis=1, keepdims=True)
    assignment = {
        i: int(rng.integers(0, c))
        for i in range(n)
        if rng.random() > unassigned_rate
    }
    cluster_ids = list(range(c))
    return q, assignment, cluster_ids


class TestCompute:
    def test_worked_example(self):
        q = np.array([[0.9, 0.1], [0.5, 0.5], [0.3, 0.7], [0.1, 0.9]])
        cm = compute(q, {0: 0, 1: 0, 2: 1, 3: 1})
        assert np.allclose(cm.p_ct, [[0.7, 0.3], [0.2, 0.8]], atol=1e-12)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            q, assignment, cluster_ids = random_instance(rng)
            cm = compute(q, assignment, cluster_ids)
            p_ct, p_tc = naive_crossmap(q, assignment, cluster_ids)
            assert np.allclose(cm.p_ct, p_ct, atol=1e-12)
            assert np.allclose(cm.p_tc, p_tc, atol=1e-12)

    def test_row_sum_invariants(self):
        rng = np.random.default_rng(1)
        q, assignment, cluster_ids = random_instance(rng, unassigned_rate=0.0)
        cm = compute(q, assignment, cluster_ids)
        populated = [i for i, c in enumerate(cm.cluster_ids) if c not in cm.degenerate_clusters]
        assert np.allclose(cm.p_ct[populated].sum(axis=1), 1.0, atol=1e-12)
        # fully assigned corpus: every topic's mass is fully mapped
        assert np.allclose(cm.p_tc.sum(axis=1), 1.0, atol=1e-12)
        assert np.allclose(cm.unmapped_mass, 0.0, atol=1e-12)

    def test_unmapped_mass(self):
        q = np.array([[1.0, 0.0], [0.0, 1.0]])
        cm = compute(q, {0: 0}, cluster_ids=[0])
        # doc 1 (all topic 1) is outside every cluster
        assert cm.unmapped_mass[0] == pytest.approx(0.0, abs=1e-12)
        assert cm.unmapped_mass[1] == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_cluster_zero_rows(self):
        q = np.array([[0.5, 0.5]])
        cm = compute(q, {0: 2}, cluster_ids=[2, 7])
        assert cm.degenerate_clusters == {7}
        i = cm.cluster_ids.index(7)
        assert (cm.p_ct[i] == 0).all()
        assert (cm.p_tc[:, i] == 0).all()

    def test_array_assignment_with_sentinel(self):
        q = np.array([[0.5, 0.5], [0.2, 0.8], [0.9, 0.1]])
        cm = compute(q, np.array([0, -1, 0]))
        assert cm.cluster_ids == [0]
        assert np.allclose(cm.p_ct[0], [0.7, 0.3], atol=1e-12)

    def test_dimension_errors(self):
        q = np.array([[0.5, 0.5]])
        with pytest.raises(ValueError, match="outside Q"):
            compute(q, {5: 0})
        with pytest.raises(ValueError, match="covers"):
            compute(q, np.array([0, 1]))
        with pytest.raises(ValueError, match="universe"):
            compute(q, {0: 3}, cluster_ids=[0, 1])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_row_sums_property(self, seed):
        rng = np.random.default_rng(seed)
        q, assignment, cluster_ids = random_instance(rng)
        cm = compute(q, assignment, cluster_ids)
        populated = [
            i for i, c in enumerate(cm.cluster_ids) if c not in cm.degenerate_clusters
        ]
        assert np.allclose(cm.p_ct[populated].sum(axis=1), 1.0, atol=1e-9)
        sums = cm.p_tc.sum(axis=1)
        assert (sums <= 1 + 1e-9).all()
        assert np.allclose(sums + cm.unmapped_mass, 1.0, atol=1e-9)


def cm_from_matrices(p_ct, p_tc):
    p_ct = np.asarray(p_ct, dtype=np.float64)
    return CrossMap(
        p_ct=p_ct,
        p_tc=np.asarray(p_tc, dtype=np.float64),
        cluster_ids=list(range(p_ct.shape[0])),
        n_docs=0,
    )


class TestRelate:
    def test_or_rule_and_flags(self):
        cm = cm_from_matrices([[0.3, 0.05]], [[0.02], [0.5]])
        g = relate(cm, tau_ct=0.2, tau_tc=0.4)
        assert g.edge_set() == {(0, 0), (1, 0)}
        by_topic = {e.topic: e for e in g.edges}
        assert by_topic[0].fired_ct and not by_topic[0].fired_tc
        assert by_topic[1].fired_tc and not by_topic[1].fired_ct

    def test_threshold_boundary_inclusive(self):
        cm = cm_from_matrices([[0.2]], [[0.0]])
        assert relate(cm, 0.2, 2.0).edge_set() == {(0, 0)}
        assert relate(cm, 0.2000001, 2.0).edge_set() == set()

    def test_disabling_one_side(self):
        cm = cm_from_matrices([[0.9]], [[0.9]])
        assert relate(cm, 2.0, 2.0).edge_set() == set()

    def test_invalid_thresholds(self):
        cm = cm_from_matrices([[0.5]], [[0.5]])
        with pytest.raises(ValueError):
            relate(cm, 0.0, 0.5)
        with pytest.raises(ValueError):
            relate(cm, 0.5, -1)


class TestClassify:
    """The four component shapes, each from a small crafted instance."""

    def test_one_to_one(self):
        cm = cm_from_matrices([[0.9, 0.0], [0.0, 0.9]], np.zeros((2, 2)))
        g = relate(cm, 0.5, 2.0)
        assert g.component_types[("topic", 0)] == "one-to-one"
        assert g.component_types[("cluster", 1)] == "one-to-one"
        assert g.census() == {
            "one-to-one": 2, "one-to-many": 0, "many-to-many": 0, "unique": 0,
        }

    def test_one_to_many(self):
        # one topic spread over three clusters
        p_ct = np.array([[0.8], [0.7], [0.6]])
        g = relate(cm_from_matrices(p_ct, np.zeros((1, 3))), 0.5, 2.0)
        assert g.component_types[("topic", 0)] == "one-to-many"
        assert g.component_types[("cluster", 2)] == "one-to-many"
        assert g.census()["one-to-many"] == 1

    def test_many_to_many(self):
        # two topics and two clusters all interlinked
        p_ct = np.array([[0.6, 0.6], [0.6, 0.6]])
        g = relate(cm_from_matrices(p_ct, np.zeros((2, 2))), 0.5, 2.0)
        assert g.component_types[("topic", 0)] == "many-to-many"
        assert g.census()["many-to-many"] == 1

    def test_unique(self):
        g = relate(cm_from_matrices(np.zeros((2, 3)), np.zeros((3, 2))), 0.5, 2.0)
        assert all(v == "unique" for v in g.component_types.values())
        assert g.census()["unique"] == 5  # counted per node, not per component


class TestSweep:
    def random_cm(self, seed=0):
        rng = np.random.default_rng(seed)
        q, assignment, cluster_ids = random_instance(rng, unassigned_rate=0.0)
        return compute(q, assignment, cluster_ids)

    def test_default_grid(self):
        assert DEFAULT_SWEEP_GRID[0] == 0.50
        assert DEFAULT_SWEEP_GRID[-1] == 0.05
        assert len(DEFAULT_SWEEP_GRID) == 10

    def test_edges_nest_as_threshold_drops(self):
        cm = self.random_cm()
        for side in ("cluster-to-topic", "topic-to-cluster"):
            results = sweep(cm, side)
            for (tau_hi, g_hi, _), (tau_lo, g_lo, _) in zip(results, results[1:]):
                assert tau_lo < tau_hi
                assert g_hi.edge_set() <= g_lo.edge_set()

    def test_perfect_agreement_all_one_to_one(self):
        q = np.repeat(np.eye(4), 5, axis=0)  # 20 one-hot docs, 4 topics
        assignment = {i: i // 5 for i in range(20)}
        cm = compute(q, assignment)
        for tau, _, census in sweep(cm, "cluster-to-topic"):
            assert census == {
                "one-to-one": 4, "one-to-many": 0, "many-to-many": 0, "unique": 0,
            }, f"tau={tau}"

    def test_weak_associations_vanish_at_half(self):
        q = np.full((8, 4), 0.25)  # max possible P is 0.25 < 0.50
        cm = compute(q, {i: i % 2 for i in range(8)})
        tau, g, census = sweep(cm, "cluster-to-topic")[0]
        assert tau == 0.50
        assert g.edge_set() == set()
        assert census["unique"] == 6

    def test_invalid_side_and_grid(self):
        cm = self.random_cm()
        with pytest.raises(ValueError, match="unknown side"):
            sweep(cm, "sideways")
        with pytest.raises(ValueError, match="descending"):
            sweep(cm, "cluster-to-topic", [0.1, 0.5])
        with pytest.raises(ValueError, match="lie in"):
            sweep(cm, "cluster-to-topic", [1.5, 0.5])
