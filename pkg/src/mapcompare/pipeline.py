"""Staged pipeline over flat-file artifacts.

Each stage reads the previous stage's outputs from the run's output
directory, writes its own atomically (temp file + rename), and records a
manifest with the config hash and seed so stale artifacts are detected.
Exports contain no timestamps: rerunning a stage with the same config and
seed produces byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import cluster as cl
from . import corpus as cp
from . import crossmap as xm
from . import interpret as ip
from . import lda
from .config import RunConfig

__all__ = ["Pipeline", "PipelineError", "STAGES"]

STAGES = ["preprocess", "train", "cluster", "crossmap", "sweep", "dossier", "export"]

_UPSTREAM = {
    "preprocess": [],
    "train": ["preprocess"],
    "cluster": ["preprocess"],
    "crossmap": ["train", "cluster"],
    "sweep": ["crossmap"],
    "dossier": ["train", "cluster", "crossmap"],
    "export": ["dossier", "sweep"],
}


class PipelineError(RuntimeError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


class Pipeline:
    def __init__(self, config: RunConfig):
        self.config = config
        self.out = Path(config.output_dir)

    # --- manifests ---------------------------------------------------------

    def _manifest_path(self, stage: str) -> Path:
        return self.out / "stages" / f"{stage}.json"

    def _write_manifest(self, stage: str) -> None:
        manifest = {
            "stage": stage,
            "config_hash": self.config.content_hash(),
            "seed": self.config.seed,
        }
        _write_atomic(self._manifest_path(stage), _dump_json(manifest))

    def _require(self, stage: str) -> None:
        for up in _UPSTREAM[stage]:
            path = self._manifest_path(up)
            if not path.exists():
                raise PipelineError(
                    f"stage {stage!r} needs artifacts from {up!r}: run '{up}' first"
                )
            manifest = json.loads(path.read_text())
            if manifest.get("config_hash") != self.config.content_hash():
                raise PipelineError(
                    f"stale artifacts: stage {up!r} was built with a different "
                    f"config (hash {manifest.get('config_hash')}); rerun '{up}'"
                )

    def run(self, stage: str) -> None:
        if stage not in STAGES:
            raise PipelineError(f"unknown stage {stage!r} (choose from {STAGES})")
        self._require(stage)
        getattr(self, f"stage_{stage}")()
        self._write_manifest(stage)

    def run_all(self, upto: str = "export") -> None:
        for stage in STAGES[: STAGES.index(upto) + 1]:
            self.run(stage)

    # --- preprocess --------------------------------------------------------

    def _noun_selector(self):
        cfg = self.config
        if cfg.noun_mode == "lexicon":
            return cp.lexicon_noun_selector(
                cp.load_stopwords(cfg.noun_lexicon)  # same one-term-per-line format
            )
        return cp.accept_all_nouns

    def stage_preprocess(self) -> None:
        cfg = self.config
        docs = cp.ingest(cfg.corpus)
        thesaurus = cp.Thesaurus.from_file(cfg.thesaurus) if cfg.thesaurus else None
        stopwords = (
            cp.load_stopwords(cfg.stopwords) if cfg.stopwords else cp.default_stopwords()
        )
        lemma_map = cp.load_lemma_map(cfg.lemma_map) if cfg.lemma_map else {}
        matcher = cp.PhraseMatcher(thesaurus) if thesaurus else None
        selector = self._noun_selector()
        term_docs = [
            cp.extract_terms(d, matcher, selector, stopwords, lemma_map) for d in docs
        ]
        vocab = cp.build_vocabulary(term_docs, cfg.max_doc_share, cfg.drop_top_k)
        bow = cp.to_bow([d.id for d in docs], term_docs, vocab)

        doc_lines = [
            json.dumps(
                {
                    "id": d.id,
                    "title": d.title,
                    "in_field": d.in_field,
                    "references": list(d.references),
                },
                sort_keys=True,
            )
            for d in docs
        ]
        _write_atomic(self.out / "docs.jsonl", "\n".join(doc_lines) + "\n")
        vocab_lines = [
            f"{t}\t{vocab.doc_frequency[t]}\t{vocab.total_frequency[t]}"
            for t in vocab.terms
        ]
        _write_atomic(self.out / "vocabulary.tsv", "\n".join(vocab_lines) + "\n")
        bow_lines = [
            f"{doc_id}\t{' '.join(str(int(w)) for w in tokens)}"
            for doc_id, tokens in zip(bow.doc_ids, bow.docs)
        ]
        _write_atomic(self.out / "bow.tsv", "\n".join(bow_lines) + "\n")

    def load_docs(self) -> list[cp.Document]:
        docs = []
        with open(self.out / "docs.jsonl", encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                docs.append(
                    cp.Document(
                        id=rec["id"],
                        title=rec.get("title", ""),
                        references=tuple(rec.get("references", [])),
                        in_field=rec.get("in_field", True),
                        # docs.jsonl rows are metadata-only; abstract stays in the corpus
                        terms=(),
                    )
                )
        return docs

    def load_bow(self) -> cp.BowCorpus:
        terms, doc_freq, total_freq = [], {}, {}
        with open(self.out / "vocabulary.tsv", encoding="utf-8") as fh:
            for line in fh:
                t, df, tf = line.rstrip("\n").split("\t")
                terms.append(t)
                doc_freq[t] = int(df)
                total_freq[t] = int(tf)
        vocab = cp.Vocabulary(terms, doc_freq, total_freq)
        doc_ids, docs = [], []
        with open(self.out / "bow.tsv", encoding="utf-8") as fh:
            for line in fh:
                doc_id, _, rest = line.rstrip("\n").partition("\t")
                doc_ids.append(doc_id)
                docs.append(
                    np.array([int(x) for x in rest.split()] if rest else [], dtype=np.int32)
                )
        return cp.BowCorpus(doc_ids=doc_ids, docs=docs, vocab=vocab)

    # --- train -------------------------------------------------------------

    def stage_train(self) -> None:
        bow = self.load_bow()
        model = lda.train(bow, self.config.lda_config())
        self._write_model(model)

    def _write_model(self, model: lda.TopicModel) -> None:
        theta_lines = [
            model.doc_ids[d] + "\t" + "\t".join(_fmt(x) for x in model.theta[d])
            for d in range(model.n_docs)
        ]
        _write_atomic(self.out / "model" / "theta.tsv", "\n".join(theta_lines) + "\n")
        phi_lines = [
            str(t) + "\t" + "\t".join(_fmt(x) for x in model.phi[t])
            for t in range(model.n_topics)
        ]
        _write_atomic(self.out / "model" / "phi.tsv", "\n".join(phi_lines) + "\n")
        meta = {
            "k": model.config.k,
            "alpha": model.config.effective_alpha,
            "beta": model.config.beta,
            "iterations": model.config.iterations,
            "min_probability": model.config.min_probability,
            "seed": model.seed,
            "rng": "philox-counter-based",
            "empty_docs": model.empty_docs,
        }
        _write_atomic(self.out / "model" / "meta.json", _dump_json(meta))

    def load_model(self) -> lda.TopicModel:
        bow = self.load_bow()
        meta = json.loads((self.out / "model" / "meta.json").read_text())
        doc_ids, theta_rows = [], []
        with open(self.out / "model" / "theta.tsv", encoding="utf-8") as fh:
            for line in fh:
                parts = line.rstrip("\n").split("\t")
                doc_ids.append(parts[0])
                theta_rows.append([float(x) for x in parts[1:]])
        phi_rows = []
        with open(self.out / "model" / "phi.tsv", encoding="utf-8") as fh:
            for line in fh:
                parts = line.rstrip("\n").split("\t")
                phi_rows.append([float(x) for x in parts[1:]])
        cfg = lda.LdaConfig(
            k=meta["k"],
            alpha=meta["alpha"],
            beta=meta["beta"],
            iterations=meta["iterations"],
            seed=meta["seed"],
            min_probability=meta["min_probability"],
        )
        tokens = (
            np.concatenate(bow.docs).astype(np.int32)
            if bow.n_tokens
            else np.zeros(0, dtype=np.int32)
        )
        doc_of = np.repeat(
            np.arange(len(bow.docs), dtype=np.int32), [len(d) for d in bow.docs]
        ).astype(np.int32)
        return lda.TopicModel(
            theta=np.array(theta_rows),
            phi=np.array(phi_rows),
            assignments=np.zeros(0, dtype=np.int32),
            tokens=tokens,
            doc_of=doc_of,
            config=cfg,
            seed=meta["seed"],
            empty_docs=list(meta["empty_docs"]),
            doc_ids=doc_ids,
            vocab_terms=list(bow.vocab.terms),
        )

    # --- cluster -----------------------------------------------------------

    def stage_cluster(self) -> None:
        cfg = self.config
        docs = self.load_docs()
        graph = cl.build_graph(docs)
        solution = cl.hierarchy(
            graph, cfg.resolutions, cfg.min_cluster_size, seed=cfg.seed
        )
        selection = cl.select_areas(solution, docs, cfg.min_share)
        categories = cl.group_areas(
            solution,
            graph,
            selection,
            resolution=cfg.grouping_resolution,
            min_size=cfg.grouping_min_size,
            seed=cfg.seed,
        )
        level_names = ["macro", "meso", "micro"][-len(solution.levels):]
        lines = []
        for name, level in zip(level_names, solution.levels):
            for doc_id in sorted(level.assignment):
                lines.append(
                    f"{name}\t{_fmt(level.resolution)}\t{doc_id}\t{level.assignment[doc_id]}"
                )
        _write_atomic(self.out / "clusters" / "levels.tsv", "\n".join(lines) + "\n")
        micro = solution.micro
        area_lines = []
        for c in sorted(selection.total_count):
            area_lines.append(
                "\t".join(
                    [
                        str(c),
                        str(selection.total_count[c]),
                        str(selection.field_count[c]),
                        _fmt(selection.share[c]),
                        str(int(c in selection.selected)),
                        str(categories.get(c, -1)),
                        str(int(c in micro.residual)),
                    ]
                )
            )
        _write_atomic(self.out / "clusters" / "areas.tsv", "\n".join(area_lines) + "\n")
        meta = {
            "coverage": selection.coverage,
            "min_share": selection.min_share,
            "resolutions": list(cfg.resolutions),
            "min_cluster_size": cfg.min_cluster_size,
            "seed": cfg.seed,
        }
        _write_atomic(self.out / "clusters" / "meta.json", _dump_json(meta))

    def load_levels(self) -> dict[str, dict[str, int]]:
        levels: dict[str, dict[str, int]] = {}
        with open(self.out / "clusters" / "levels.tsv", encoding="utf-8") as fh:
            for line in fh:
                name, _res, doc_id, c = line.rstrip("\n").split("\t")
                levels.setdefault(name, {})[doc_id] = int(c)
        return levels

    def load_areas(self):
        """cluster id -> dict(size, field_count, share, selected, category, residual)."""
        areas = {}
        with open(self.out / "clusters" / "areas.tsv", encoding="utf-8") as fh:
            for line in fh:
                c, size, fc, share, sel, cat, resid = line.rstrip("\n").split("\t")
                areas[int(c)] = {
                    "size": int(size),
                    "field_count": int(fc),
                    "share": float(share),
                    "selected": bool(int(sel)),
                    "category": int(cat),
                    "residual": bool(int(resid)),
                }
        return areas

    # --- crossmap ----------------------------------------------------------

    def _selected_assignment(self):
        """Document-index assignment restricted to selected micro areas."""
        bow = self.load_bow()
        micro = self.load_levels()["micro"]
        areas = self.load_areas()
        selected = sorted(c for c, a in areas.items() if a["selected"])
        doc_pos = {d: i for i, d in enumerate(bow.doc_ids)}
        assignment = {
            doc_pos[doc_id]: c
            for doc_id, c in micro.items()
            if c in set(selected) and doc_id in doc_pos
        }
        return assignment, selected

    def build_crossmap(self) -> xm.CrossMap:
        model = self.load_model()
        assignment, selected = self._selected_assignment()
        return xm.compute(model.theta, assignment, cluster_ids=selected)

    def stage_crossmap(self) -> None:
        cm = self.build_crossmap()
        header = "cluster\t" + "\t".join(str(t) for t in range(cm.n_topics))
        ct_lines = [header] + [
            str(cm.cluster_ids[c]) + "\t" + "\t".join(_fmt(x) for x in cm.p_ct[c])
            for c in range(cm.n_clusters)
        ]
        _write_atomic(self.out / "crossmap" / "p_ct.tsv", "\n".join(ct_lines) + "\n")
        header = "topic\t" + "\t".join(str(c) for c in cm.cluster_ids)
        tc_lines = [header] + [
            str(t) + "\t" + "\t".join(_fmt(x) for x in cm.p_tc[t])
            for t in range(cm.n_topics)
        ]
        _write_atomic(self.out / "crossmap" / "p_tc.tsv", "\n".join(tc_lines) + "\n")
        meta = {
            "cluster_ids": list(cm.cluster_ids),
            "n_docs": cm.n_docs,
            "degenerate_clusters": sorted(cm.degenerate_clusters),
            "unmapped_mass": [float(x) for x in cm.unmapped_mass],
        }
        _write_atomic(self.out / "crossmap" / "meta.json", _dump_json(meta))
        g = xm.relate(cm, self.config.tau_ct, self.config.tau_tc)
        _write_atomic(
            self.out / "crossmap" / "relations.json",
            _dump_json(relation_graph_payload(g)),
        )

    def load_crossmap(self) -> xm.CrossMap:
        meta = json.loads((self.out / "crossmap" / "meta.json").read_text())

        def load_matrix(name):
            rows = []
            with open(self.out / "crossmap" / name, encoding="utf-8") as fh:
                next(fh)  # header
                for line in fh:
                    rows.append([float(x) for x in line.rstrip("\n").split("\t")[1:]])
            return np.array(rows)

        return xm.CrossMap(
            p_ct=load_matrix("p_ct.tsv"),
            p_tc=load_matrix("p_tc.tsv"),
            cluster_ids=list(meta["cluster_ids"]),
            n_docs=meta["n_docs"],
            degenerate_clusters=set(meta["degenerate_clusters"]),
            unmapped_mass=np.array(meta["unmapped_mass"]),
        )

    # --- sweep -------------------------------------------------------------

    def stage_sweep(self) -> None:
        cm = self.load_crossmap()
        for side in ("cluster-to-topic", "topic-to-cluster"):
            results = xm.sweep(cm, side, list(self.config.sweep_grid))
            payload = [
                {
                    "tau": tau,
                    "census": census,
                    "graph": relation_graph_payload(g),
                }
                for tau, g, census in results
            ]
            _write_atomic(self.out / "sweep" / f"{side}.json", _dump_json(payload))

    # --- dossier -----------------------------------------------------------

    def stage_dossier(self) -> None:
        cfg = self.config
        model = self.load_model()
        bow = self.load_bow()
        docs = self.load_docs()
        graph = cl.build_graph(docs)
        micro = self.load_levels()["micro"]
        areas = self.load_areas()
        thesaurus = cp.Thesaurus.from_file(cfg.thesaurus) if cfg.thesaurus else None

        topic_dossiers = []
        for t in range(model.n_topics):
            terms = ip.topic_top_terms(model, t, cfg.top_terms, cfg.relevance_lambda)
            paths, unmatched = (
                ip.rollup([term for term, _ in terms], thesaurus)
                if thesaurus
                else ([], [term for term, _ in terms])
            )
            topic_dossiers.append(
                {
                    "entity": f"topic:{t}",
                    "top_terms": [[term, s] for term, s in terms],
                    "top_docs": [
                        [d, s] for d, s in ip.topic_top_docs(model, t, cfg.top_docs)
                    ],
                    "rollup_paths": paths,
                    "unmatched_terms": unmatched,
                }
            )
        _write_atomic(self.out / "dossiers" / "topics.json", _dump_json(topic_dossiers))

        by_cluster: dict[int, list[str]] = {}
        for doc_id, c in micro.items():
            by_cluster.setdefault(c, []).append(doc_id)
        cluster_dossiers = []
        for c in sorted(areas):
            members = sorted(by_cluster.get(c, []))
            terms = ip.cluster_top_terms(members, bow, cfg.cluster_top_terms)
            paths, unmatched = (
                ip.rollup([term for term, _ in terms], thesaurus)
                if thesaurus
                else ([], [term for term, _ in terms])
            )
            cluster_dossiers.append(
                {
                    "entity": f"cluster:{c}",
                    "top_terms": [[term, s] for term, s in terms],
                    "top_docs": [
                        [d, s]
                        for d, s in ip.cluster_top_docs(
                            members, graph, cfg.cluster_top_docs
                        )
                    ],
                    "rollup_paths": paths,
                    "unmatched_terms": unmatched,
                    "area": areas[c],
                }
            )
        _write_atomic(
            self.out / "dossiers" / "clusters.json", _dump_json(cluster_dossiers)
        )

        dist, coords, prevalence, err = ip.topic_distances(model)
        payload = {
            "distances": [[float(x) for x in row] for row in dist],
            "coords": [[float(x) for x in row] for row in coords],
            "prevalence": [float(x) for x in prevalence],
            "reconstruction_error": float(err),
        }
        _write_atomic(self.out / "dossiers" / "distances.json", _dump_json(payload))

    # --- export ------------------------------------------------------------

    def stage_export(self) -> None:
        """Bundle everything the explorer needs into one document."""
        topics = json.loads((self.out / "dossiers" / "topics.json").read_text())
        clusters = json.loads((self.out / "dossiers" / "clusters.json").read_text())
        distances = json.loads((self.out / "dossiers" / "distances.json").read_text())
        relations = json.loads((self.out / "crossmap" / "relations.json").read_text())
        cm_meta = json.loads((self.out / "crossmap" / "meta.json").read_text())
        cluster_meta = json.loads((self.out / "clusters" / "meta.json").read_text())
        bundle = {
            "summary": {
                "n_topics": len(topics),
                "n_clusters": len(clusters),
                "n_selected_clusters": len(cm_meta["cluster_ids"]),
                "n_docs": cm_meta["n_docs"],
                "coverage": cluster_meta["coverage"],
                "tau_ct": self.config.tau_ct,
                "tau_tc": self.config.tau_tc,
                "sweep_grid": list(self.config.sweep_grid),
                "seed": self.config.seed,
            },
            "topics": topics,
            "clusters": clusters,
            "distances": distances,
            "relations": relations,
        }
        _write_atomic(self.out / "export" / "bundle.json", _dump_json(bundle))


def relation_graph_payload(g: xm.RelationGraph) -> dict:
    """Wire format of a relation graph, shared by exports and the HTTP API."""
    types = g.component_types
    return {
        "tau_ct": g.tau_ct,
        "tau_tc": g.tau_tc,
        "topics": [
            {"id": t, "type": types.get(("topic", t), "unique")}
            for t in range(g.n_topics)
        ],
        "clusters": [
            {"id": g.cluster_ids[c], "type": types.get(("cluster", c), "unique")}
            for c in range(g.n_clusters)
        ],
        "edges": [
            {
                "topic": e.topic,
                "cluster": g.cluster_ids[e.cluster],
                "p_ct": e.p_ct,
                "p_tc": e.p_tc,
                "fired_ct": e.fired_ct,
                "fired_tc": e.fired_tc,
            }
            for e in sorted(g.edges, key=lambda e: (e.topic, e.cluster))
        ],
        "census": g.census(),
    }
