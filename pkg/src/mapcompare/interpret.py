"""Labeling aids for topics and clusters.

Top terms (with an optional relevance/exclusivity weighting), top documents,
thesaurus roll-up paths, and an inter-topic distance map (Jensen-Shannon
divergence between term distributions plus a 2-D principal-coordinates
embedding).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .cluster import CitationGraph
from .corpus import BowCorpus, Thesaurus, tokenize
from .lda import TopicModel

__all__ = [
    "LabelDossier",
    "topic_top_terms",
    "topic_top_docs",
    "cluster_top_docs",
    "cluster_top_terms",
    "rollup",
    "js_divergence",
    "topic_distances",
]


@dataclass
class LabelDossier:
    entity: str  # e.g. "topic:3" or "cluster:12"
    top_terms: list[tuple[str, float]]
    top_docs: list[tuple[str, float]]
    rollup_paths: list[list[str]] = field(default_factory=list)
    unmatched_terms: list[str] = field(default_factory=list)
    human_label: str | None = None


def _ranked(pairs, n):
    """Descending by score, lexicographic on the key for ties."""
    return sorted(pairs, key=lambda kv: (-kv[1], kv[0]))[:n]


def topic_top_terms(
    model: TopicModel,
    t: int,
    n: int = 40,
    lambda_: float = 1.0,
) -> list[tuple[str, float]]:
    """Top terms of a topic by relevance.

    score = lambda * log(phi_tw) + (1 - lambda) * log(phi_tw / p_w), with p_w
    the corpus marginal term probability. lambda = 1 ranks by in-topic
    frequency alone; lower lambda favors terms exclusive to the topic.
    """
    if not 0 <= lambda_ <= 1:
        raise ValueError("lambda must be in [0, 1]")
    phi_t = model.phi[t]
    with np.errstate(divide="ignore"):
        log_phi = np.log(phi_t)
        if lambda_ == 1.0:
            scores = log_phi
        else:
            p_w = model.term_marginals()
            scores = lambda_ * log_phi + (1 - lambda_) * (log_phi - np.log(p_w))
    pairs = [(model.vocab_terms[w], float(scores[w])) for w in range(len(phi_t))]
    return _ranked(pairs, n)


def topic_top_docs(model: TopicModel, t: int, n: int = 20) -> list[tuple[str, float]]:
    """Documents ranked by their probability of belonging to the topic."""
    pairs = [
        (model.doc_ids[d] if model.doc_ids else str(d), float(model.theta[d, t]))
        for d in range(model.n_docs)
    ]
    return _ranked(pairs, n)


def cluster_top_docs(
    cluster_docs: list[str],
    graph: CitationGraph,
    n: int = 10,
) -> list[tuple[str, float]]:
    """Cluster documents ranked by citation count within the corpus graph."""
    pairs = [
        (doc_id, float(graph.degree(graph.index[doc_id]))) for doc_id in cluster_docs
    ]
    return _ranked(pairs, n)


def cluster_top_terms(
    cluster_docs: list[str],
    bow: BowCorpus,
    n: int = 10,
) -> list[tuple[str, float]]:
    """Most frequent terms over the cluster's documents (absolute frequency)."""
    doc_pos = {d: i for i, d in enumerate(bow.doc_ids)}
    counts: Counter = Counter()
    for doc_id in cluster_docs:
        i = doc_pos.get(doc_id)
        if i is None:
            continue
        counts.update(bow.vocab.terms[w] for w in bow.docs[i])
    return _ranked([(t, float(c)) for t, c in counts.items()], n)


def rollup(terms: list[str], thesaurus: Thesaurus):
    """Root-to-term ancestor paths for every term found in the thesaurus.

    Returns (paths, unmatched). A term occurring at several tree positions
    yields one path per position.
    """
    paths: list[list[str]] = []
    unmatched: list[str] = []
    for term in terms:
        normalized = " ".join(tokenize(term))
        node_ids = thesaurus.nodes_for_label(normalized)
        if not node_ids:
            unmatched.append(term)
            continue
        for nid in sorted(node_ids):
            paths.append(thesaurus.path_to_root(nid))
    return paths, unmatched


def js_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """Jensen-Shannon divergence (natural log; ranges over [0, ln 2])."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    m = 0.5 * (p + q)
    out = 0.0
    for dist in (p, q):
        nz = dist > 0
        out += 0.5 * float(np.sum(dist[nz] * np.log(dist[nz] / m[nz])))
    return max(out, 0.0)


def topic_distances(model: TopicModel):
    """Pairwise JS divergences between topic term distributions plus a 2-D
    principal-coordinates embedding of the distance matrix.

    Returns (distances, coords, prevalence, reconstruction_error). The error
    is the fraction of total (double-centered) variance outside the first two
    principal coordinates; it is reported, never hidden.
    """
    k = model.n_topics
    dist = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            d = js_divergence(model.phi[a], model.phi[b])
            dist[a, b] = dist[b, a] = d
    coords, err = _pcoa_2d(dist)
    prevalence = model.topic_prevalence()
    return dist, coords, prevalence, err


def _pcoa_2d(dist: np.ndarray):
    """Classical multidimensional scaling of a distance matrix to 2-D."""
    k = dist.shape[0]
    if k == 1:
        return np.zeros((1, 2)), 0.0
    d2 = dist**2
    j = np.eye(k) - np.ones((k, k)) / k
    b = -0.5 * j @ d2 @ j
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    pos = np.maximum(evals, 0.0)
    coords = np.zeros((k, 2))
    for axis in range(min(2, k)):
        coords[:, axis] = evecs[:, axis] * np.sqrt(pos[axis])
    total = pos.sum()
    explained = pos[:2].sum()
    err = float(1.0 - explained / total) if total > 0 else 0.0
    return coords, err
