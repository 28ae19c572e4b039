"""Cluster-to-topic and topic-to-cluster comparison.

P_ct[c, t] = sum_i Q_it R_ic / sum_i R_ic   (average topic mass of cluster c)
P_tc[t, c] = sum_i Q_it R_ic / sum_i Q_it   (share of topic t's mass in c)

The P_tc denominator is the total topic mass. Documents outside the selected
clusters contribute to no cluster, so topic-to-cluster rows may sum to less
than one; the shortfall is reported per topic as unmapped mass.

Thresholded relation graphs use an OR rule (edge iff P_ct >= tau_ct or
P_tc >= tau_tc; set a threshold above 1 to disable that side) and their
connected components are classified into four shapes: one-to-one,
one-to-many, many-to-many, and unique (isolated) nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CrossMap",
    "RelationEdge",
    "RelationGraph",
    "compute",
    "relate",
    "classify",
    "sweep",
    "DEFAULT_SWEEP_GRID",
]

DEFAULT_SWEEP_GRID = [round(0.50 - 0.05 * i, 2) for i in range(10)]  # 0.50 .. 0.05

RELATION_TYPES = ("one-to-one", "one-to-many", "many-to-many", "unique")


@dataclass
class CrossMap:
    p_ct: np.ndarray  # C x T
    p_tc: np.ndarray  # T x C
    cluster_ids: list[int]
    n_docs: int
    degenerate_clusters: set[int] = field(default_factory=set)  # zero-doc clusters
    unmapped_mass: np.ndarray | None = None  # per topic: 1 - sum_c P_tc

    @property
    def n_clusters(self) -> int:
        return self.p_ct.shape[0]

    @property
    def n_topics(self) -> int:
        return self.p_ct.shape[1]


def compute(
    q: np.ndarray,
    assignment: dict[int, int] | np.ndarray,
    cluster_ids: list[int] | None = None,
) -> CrossMap:
    """Exact weighted averages of the doc-topic matrix over a hard clustering.

    `q` is the N x T document-topic matrix. `assignment` maps document index
    to cluster id; documents absent from the mapping (or with id -1 in array
    form) belong to no selected cluster. `cluster_ids` optionally fixes the
    cluster universe (clusters without documents get a degenerate zero row).
    """
    q = np.asarray(q, dtype=np.float64)
    n, n_topics = q.shape
    if isinstance(assignment, np.ndarray):
        if assignment.shape[0] != n:
            raise ValueError(
                f"assignment covers {assignment.shape[0]} documents, Q has {n}"
            )
        assignment = {i: int(c) for i, c in enumerate(assignment) if c >= 0}
    else:
        bad = [i for i in assignment if not 0 <= i < n]
        if bad:
            raise ValueError(f"assignment references document index {bad[0]} outside Q")
    if cluster_ids is None:
        cluster_ids = sorted(set(assignment.values()))
    else:
        cluster_ids = sorted(cluster_ids)
        missing = set(assignment.values()) - set(cluster_ids)
        if missing:
            raise ValueError(f"assignment uses cluster ids outside the universe: {missing}")
    c_index = {c: i for i, c in enumerate(cluster_ids)}
    n_clusters = len(cluster_ids)

    mass = np.zeros((n_clusters, n_topics))  # sum_i Q_it R_ic
    counts = np.zeros(n_clusters)
    for i, c in assignment.items():
        ci = c_index[c]
        mass[ci] += q[i]
        counts[ci] += 1

    degenerate = {c for c in cluster_ids if counts[c_index[c]] == 0}
    safe_counts = np.where(counts > 0, counts, 1.0)
    p_ct = mass / safe_counts[:, None]
    p_ct[counts == 0] = 0.0

    topic_mass = q.sum(axis=0)
    safe_mass = np.where(topic_mass > 0, topic_mass, 1.0)
    p_tc = mass.T / safe_mass[:, None]
    p_tc[topic_mass == 0] = 0.0

    unmapped = 1.0 - p_tc.sum(axis=1)
    return CrossMap(
        p_ct=p_ct,
        p_tc=p_tc,
        cluster_ids=cluster_ids,
        n_docs=n,
        degenerate_clusters=degenerate,
        unmapped_mass=unmapped,
    )


@dataclass(frozen=True)
class RelationEdge:
    topic: int
    cluster: int  # position in cm.cluster_ids
    p_ct: float
    p_tc: float
    fired_ct: bool
    fired_tc: bool


@dataclass
class RelationGraph:
    n_topics: int
    n_clusters: int
    cluster_ids: list[int]
    edges: list[RelationEdge]
    tau_ct: float
    tau_tc: float
    component_types: dict[tuple[str, int], str] = field(default_factory=dict)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(e.topic, e.cluster) for e in self.edges}

    def census(self) -> dict[str, int]:
        """Connected-component counts per relation type (unique counted per node)."""
        counts = {t: 0 for t in RELATION_TYPES}
        seen_components = set()
        for node, label in self.component_types.items():
            if label == "unique":
                counts["unique"] += 1
            else:
                comp = _component_of(self, node)
                if comp not in seen_components:
                    seen_components.add(comp)
                    counts[label] += 1
        return counts


def _adjacency(g: RelationGraph):
    topics: dict[int, set[int]] = {t: set() for t in range(g.n_topics)}
    clusters: dict[int, set[int]] = {c: set() for c in range(g.n_clusters)}
    for e in g.edges:
        topics[e.topic].add(e.cluster)
        clusters[e.cluster].add(e.topic)
    return topics, clusters


def _component_of(g: RelationGraph, node) -> frozenset:
    topics, clusters = _adjacency(g)
    seen = {node}
    stack = [node]
    while stack:
        kind, idx = stack.pop()
        nbrs = topics[idx] if kind == "topic" else clusters[idx]
        other = "cluster" if kind == "topic" else "topic"
        for nb in nbrs:
            nxt = (other, nb)
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(seen)


def relate(cm: CrossMap, tau_ct: float, tau_tc: float) -> RelationGraph:
    """Thresholded bipartite relation graph (OR of the two thresholds).

    Thresholds must be positive; values above 1 disable that side.
    """
    if tau_ct <= 0 or tau_tc <= 0:
        raise ValueError("thresholds must be positive")
    edges = []
    for c in range(cm.n_clusters):
        for t in range(cm.n_topics):
            hit_ct = cm.p_ct[c, t] >= tau_ct
            hit_tc = cm.p_tc[t, c] >= tau_tc
            if hit_ct or hit_tc:
                edges.append(
                    RelationEdge(
                        topic=t,
                        cluster=c,
                        p_ct=float(cm.p_ct[c, t]),
                        p_tc=float(cm.p_tc[t, c]),
                        fired_ct=bool(hit_ct),
                        fired_tc=bool(hit_tc),
                    )
                )
    g = RelationGraph(
        n_topics=cm.n_topics,
        n_clusters=cm.n_clusters,
        cluster_ids=list(cm.cluster_ids),
        edges=edges,
        tau_ct=tau_ct,
        tau_tc=tau_tc,
    )
    g.component_types = classify(g)
    return g


def classify(g: RelationGraph) -> dict[tuple[str, int], str]:
    """Label every node with its component's relation type.

    Isolated node -> unique; single edge -> one-to-one; a star whose leaves
    all have degree one -> one-to-many; anything else -> many-to-many.
    """
    topics, clusters = _adjacency(g)
    labels: dict[tuple[str, int], str] = {}
    visited: set[tuple[str, int]] = set()
    all_nodes = [("topic", t) for t in range(g.n_topics)] + [
        ("cluster", c) for c in range(g.n_clusters)
    ]
    for node in all_nodes:
        if node in visited:
            continue
        comp = _component_of(g, node)
        visited |= comp
        label = _component_label(comp, topics, clusters)
        for member in comp:
            labels[member] = label
    return labels


def _component_label(comp, topics, clusters) -> str:
    def degree(node):
        kind, idx = node
        return len(topics[idx]) if kind == "topic" else len(clusters[idx])

    if len(comp) == 1:
        return "unique"
    comp_topics = [n for n in comp if n[0] == "topic"]
    comp_clusters = [n for n in comp if n[0] == "cluster"]
    if len(comp_topics) == 1 and len(comp_clusters) == 1:
        return "one-to-one"
    hubs = [n for n in comp if degree(n) > 1]
    if len(hubs) == 1 and all(degree(n) == 1 for n in comp if n != hubs[0]):
        return "one-to-many"
    return "many-to-many"


def sweep(
    cm: CrossMap,
    side: str,
    thresholds: list[float] | None = None,
) -> list[tuple[float, RelationGraph, dict[str, int]]]:
    """Single-sided threshold sweep; one relation graph and census per tau.

    side is "cluster-to-topic" or "topic-to-cluster"; the other side's
    threshold is disabled (> 1).
    """
    if side not in ("cluster-to-topic", "topic-to-cluster"):
        raise ValueError(f"unknown side {side!r}")
    if thresholds is None:
        thresholds = list(DEFAULT_SWEEP_GRID)
    if any(b >= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly descending")
    if any(not 0 < t <= 1 for t in thresholds):
        raise ValueError("thresholds must lie in (0, 1]")
    out = []
    for tau in thresholds:
        if side == "cluster-to-topic":
            g = relate(cm, tau_ct=tau, tau_tc=2.0)
        else:
            g = relate(cm, tau_ct=2.0, tau_tc=tau)
        out.append((tau, g, g.census()))
    return out
