"""Run configuration: a single YAML document driving every pipeline stage.

Defaults mirror the published reference setup where one exists: k=40 topics,
alpha=1/k, beta=0.1, 5000 Gibbs iterations, 10% field share for area
selection, grouping resolution 0.9 with minimum size 10, and the 0.50..0.05
threshold sweep grid.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .crossmap import DEFAULT_SWEEP_GRID
from .lda import LdaConfig

__all__ = ["RunConfig", "ConfigError"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    corpus: str
    output_dir: str
    thesaurus: str | None = None
    stopwords: str | None = None  # None -> bundled default list
    lemma_map: str | None = None
    noun_mode: str = "accept_all"  # accept_all | lexicon | pretagged
    noun_lexicon: str | None = None
    seed: int = 0

    max_doc_share: float = 0.95
    drop_top_k: int = 100

    k: int = 40
    alpha: float | None = None
    beta: float = 0.1
    iterations: int = 5000
    min_probability: float = 0.0

    resolutions: list[float] = field(default_factory=lambda: [2e-5, 3e-4, 5e-3])
    min_cluster_size: int = 10
    min_share: float = 0.10
    grouping_resolution: float = 0.9
    grouping_min_size: int = 10

    tau_ct: float = 0.2
    tau_tc: float = 0.1
    sweep_grid: list[float] = field(default_factory=lambda: list(DEFAULT_SWEEP_GRID))

    top_terms: int = 40
    top_docs: int = 20
    cluster_top_terms: int = 10
    cluster_top_docs: int = 10
    relevance_lambda: float = 1.0

    host: str = "127.0.0.1"
    port: int = 8734

    def __post_init__(self):
        if self.noun_mode not in ("accept_all", "lexicon", "pretagged"):
            raise ConfigError(f"unknown noun_mode {self.noun_mode!r}")
        if self.noun_mode == "lexicon" and not self.noun_lexicon:
            raise ConfigError("noun_mode=lexicon requires noun_lexicon")
        if any(b <= a for a, b in zip(self.resolutions, self.resolutions[1:])):
            raise ConfigError("resolutions must be strictly increasing (coarse to fine)")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "corpus" not in raw or "output_dir" not in raw:
            raise ConfigError("config must set corpus and output_dir")
        cfg = cls(**raw)
        base = Path(path).parent
        for name in ("corpus", "thesaurus", "stopwords", "lemma_map", "noun_lexicon"):
            val = getattr(cfg, name)
            if val is not None:
                resolved = (base / val) if not Path(val).is_absolute() else Path(val)
                if not resolved.exists():
                    raise ConfigError(f"{name} file not found: {resolved}")
                setattr(cfg, name, str(resolved))
        out = Path(cfg.output_dir)
        cfg.output_dir = str(out if out.is_absolute() else base / out)
        return cfg

    def lda_config(self) -> LdaConfig:
        return LdaConfig(
            k=self.k,
            alpha=self.alpha,
            beta=self.beta,
            iterations=self.iterations,
            seed=self.seed,
            min_probability=self.min_probability,
        )

    def content_hash(self) -> str:
        """Stable hash of the configuration (excluding serve-only options)."""
        d = asdict(self)
        # where the artifacts live does not change what they contain
        d.pop("output_dir", None)
        d.pop("host", None)
        d.pop("port", None)
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
