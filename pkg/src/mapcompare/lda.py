"""Latent Dirichlet Allocation by collapsed Gibbs sampling.

The sampler resamples each token's topic from
p(z=t | rest) ~ (n_dt + alpha) * (n_tw + beta) / (n_t + V*beta)
and reports point estimates from the final sweep's counts. Randomness comes
from a Philox counter-based generator so training is reproducible for a fixed
seed (and across the jitted / non-jitted kernel paths).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._gibbs import gibbs_sweep
from .corpus import BowCorpus

__all__ = ["LdaConfig", "TopicModel", "train", "doc_topics", "topic_terms"]


@dataclass(frozen=True)
class LdaConfig:
    k: int
    alpha: float | None = None  # None -> 1.0 / k
    beta: float = 0.1
    iterations: int = 5000
    seed: int = 0
    min_probability: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 <= self.min_probability < 1:
            raise ValueError("min_probability must be in [0, 1)")

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 1.0 / self.k


@dataclass
class TopicModel:
    theta: np.ndarray  # N x k, rows sum to 1
    phi: np.ndarray  # k x V, rows sum to 1
    assignments: np.ndarray  # int32[n_tokens] final topic labels
    tokens: np.ndarray  # int32[n_tokens] term index per token
    doc_of: np.ndarray  # int32[n_tokens] document index per token
    config: LdaConfig
    seed: int
    empty_docs: list[int] = field(default_factory=list)
    doc_ids: list[str] = field(default_factory=list)
    vocab_terms: list[str] = field(default_factory=list)

    @property
    def n_docs(self) -> int:
        return self.theta.shape[0]

    @property
    def n_topics(self) -> int:
        return self.theta.shape[1]

    @property
    def n_terms(self) -> int:
        return self.phi.shape[1]

    def topic_prevalence(self) -> np.ndarray:
        """Mean topic share over documents."""
        return self.theta.mean(axis=0)

    def term_marginals(self) -> np.ndarray:
        """Corpus marginal term probabilities p_w under prevalence-weighted phi."""
        weights = self.theta.sum(axis=0)
        weights = weights / weights.sum()
        return weights @ self.phi

    def log_likelihood(self) -> float:
        """Token log-likelihood sum_j log sum_t theta[d,t] * phi[t,w]."""
        probs = np.einsum(
            "jt,jt->j", self.theta[self.doc_of], self.phi[:, self.tokens].T
        )
        return float(np.log(probs).sum())


def _counts_from_assignments(z, tokens, doc_of, n_docs, k, n_terms):
    n_dt = np.zeros((n_docs, k), dtype=np.int64)
    n_tw = np.zeros((k, n_terms), dtype=np.int64)
    np.add.at(n_dt, (doc_of, z), 1)
    np.add.at(n_tw, (z, tokens), 1)
    return n_dt, n_tw, n_tw.sum(axis=1)


def train(
    bow: BowCorpus,
    cfg: LdaConfig,
    sweep_callback=None,
) -> TopicModel:
    """Run the collapsed Gibbs sampler and return final-sweep point estimates.

    sweep_callback(sweep_index, n_dt, n_tw, n_t), when given, is invoked after
    every sweep (used by tests to assert count conservation).
    """
    n_docs = len(bow.docs)
    if n_docs == 0:
        raise ValueError("empty corpus")
    n_terms = len(bow.vocab)
    if n_terms == 0:
        raise ValueError("empty vocabulary")
    k = cfg.k
    alpha = cfg.effective_alpha
    beta = cfg.beta

    tokens = (
        np.concatenate(bow.docs).astype(np.int32)
        if bow.n_tokens
        else np.zeros(0, dtype=np.int32)
    )
    doc_of = np.repeat(
        np.arange(n_docs, dtype=np.int32),
        [len(d) for d in bow.docs],
    ).astype(np.int32)
    n_tokens = tokens.shape[0]
    if k > n_tokens:
        warnings.warn(
            f"topic count k={k} exceeds the corpus token count {n_tokens}; "
            "most topics will stay empty"
        )

    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    z = np.minimum((rng.random(n_tokens) * k).astype(np.int32), k - 1)
    n_dt, n_tw, n_t = _counts_from_assignments(z, tokens, doc_of, n_docs, k, n_terms)
    p_buf = np.empty(k, dtype=np.float64)

    for sweep in range(cfg.iterations):
        uniforms = rng.random(n_tokens)
        gibbs_sweep(tokens, doc_of, z, n_dt, n_tw, n_t, alpha, beta, uniforms, p_buf)
        if sweep_callback is not None:
            sweep_callback(sweep, n_dt, n_tw, n_t)

    n_d = n_dt.sum(axis=1)
    theta = (n_dt + alpha) / (n_d + k * alpha)[:, None]
    phi = (n_tw + beta) / (n_t + n_terms * beta)[:, None]
    empty = [int(i) for i in np.nonzero(n_d == 0)[0]]

    if cfg.min_probability > 0:
        floored = np.where(theta >= cfg.min_probability, theta, 0.0)
        dead = floored.sum(axis=1) == 0
        if dead.any():
            # keep the single best topic when the floor wipes a whole row
            best = theta[dead].argmax(axis=1)
            floored[np.nonzero(dead)[0], best] = 1.0
        theta = floored / floored.sum(axis=1, keepdims=True)

    return TopicModel(
        theta=theta,
        phi=phi,
        assignments=z,
        tokens=tokens,
        doc_of=doc_of,
        config=cfg,
        seed=cfg.seed,
        empty_docs=empty,
        doc_ids=list(bow.doc_ids),
        vocab_terms=list(bow.vocab.terms),
    )


def doc_topics(model: TopicModel, d: int) -> np.ndarray:
    if not 0 <= d < model.n_docs:
        raise IndexError(f"document index {d} out of range")
    return model.theta[d]


def topic_terms(model: TopicModel, t: int) -> np.ndarray:
    if not 0 <= t < model.n_topics:
        raise IndexError(f"topic index {t} out of range")
    return model.phi[t]
