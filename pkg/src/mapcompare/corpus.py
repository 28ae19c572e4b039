"""Corpus ingestion and text preprocessing.

Turns raw publication records into term sequences (thesaurus phrases found by
greedy longest-match, plus remaining single tokens passed through a noun
selector), then builds the filtered vocabulary and the bag-of-words corpus.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

__all__ = [
    "Document",
    "Thesaurus",
    "Vocabulary",
    "BowCorpus",
    "CorpusError",
    "ingest",
    "tokenize",
    "extract_terms",
    "build_vocabulary",
    "to_bow",
    "accept_all_nouns",
    "lexicon_noun_selector",
    "load_stopwords",
    "default_stopwords",
    "load_lemma_map",
]


class CorpusError(ValueError):
    """Raised for malformed corpus/thesaurus input or empty vocabularies."""


@dataclass(frozen=True)
class Document:
    id: str
    title: str = ""
    abstract: str = ""
    references: tuple[str, ...] = ()
    in_field: bool = True
    year: int | None = None
    # pre-tagged mode: record ships its own term list, extraction is skipped
    terms: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.id:
            raise CorpusError("document id must be non-empty")
        refs = tuple(self.references)
        if len(set(refs)) != len(refs):
            raise CorpusError(f"document {self.id!r}: duplicate references")
        if self.id in refs:
            raise CorpusError(f"document {self.id!r}: self-reference")
        object.__setattr__(self, "references", refs)

    @property
    def text(self) -> str:
        return f"{self.title} {self.abstract}".strip()


@dataclass(frozen=True)
class ThesaurusNode:
    node_id: str
    label: str
    parent_id: str | None


class Thesaurus:
    """Rooted labeled tree (MeSH-style). A label may occur at several positions."""

    def __init__(self, nodes: list[ThesaurusNode]):
        self.nodes = {n.node_id: n for n in nodes}
        if len(self.nodes) != len(nodes):
            raise CorpusError("duplicate thesaurus node ids")
        for n in nodes:
            if n.parent_id is not None and n.parent_id not in self.nodes:
                raise CorpusError(
                    f"thesaurus node {n.node_id!r}: unknown parent {n.parent_id!r}"
                )
        # acyclicity check: walk to root from every node
        for n in nodes:
            seen = set()
            cur = n
            while cur.parent_id is not None:
                if cur.node_id in seen:
                    raise CorpusError(f"thesaurus cycle through {n.node_id!r}")
                seen.add(cur.node_id)
                cur = self.nodes[cur.parent_id]

    def __len__(self):
        return len(self.nodes)

    def labels(self) -> list[str]:
        return [n.label for n in self.nodes.values()]

    def path_to_root(self, node_id: str) -> list[str]:
        """Labels from the root down to (and including) the given node."""
        path = []
        cur = self.nodes[node_id]
        while True:
            path.append(cur.label)
            if cur.parent_id is None:
                break
            cur = self.nodes[cur.parent_id]
        return path[::-1]

    def nodes_for_label(self, normalized_label: str) -> list[str]:
        """Node ids whose tokenized label equals the given normalized form."""
        return [
            nid
            for nid, n in self.nodes.items()
            if " ".join(tokenize(n.label)) == normalized_label
        ]

    @classmethod
    def from_file(cls, path) -> "Thesaurus":
        """Tab-separated rows: node-id, parent-id (empty for root), label."""
        nodes = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise CorpusError(
                        f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}"
                    )
                node_id, parent_id, label = parts
                nodes.append(ThesaurusNode(node_id, label, parent_id or None))
        return cls(nodes)


@dataclass
class Vocabulary:
    terms: list[str]
    doc_frequency: dict[str, int]
    total_frequency: dict[str, int]
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.terms)}

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index


@dataclass
class BowCorpus:
    """Per-document sequences of term indices; token order preserved."""

    doc_ids: list[str]
    docs: list[np.ndarray]
    vocab: Vocabulary

    def __len__(self):
        return len(self.docs)

    @property
    def n_tokens(self) -> int:
        return sum(len(d) for d in self.docs)

    def empty_docs(self) -> list[int]:
        return [i for i, d in enumerate(self.docs) if len(d) == 0]


# --- ingestion -------------------------------------------------------------

def ingest(path, schema: dict | None = None) -> list[Document]:
    """Read line-delimited document records (one JSON object per line).

    `schema` optionally remaps field names, e.g. {"id": "doi"}.
    """
    schema = schema or {}

    def fld(rec, name, default=None):
        return rec.get(schema.get(name, name), default)

    docs: list[Document] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{path}:{lineno}: malformed record: {e}") from e
            doc_id = fld(rec, "id")
            if not doc_id:
                raise CorpusError(f"{path}:{lineno}: record has no id")
            title = fld(rec, "title", "") or ""
            abstract = fld(rec, "abstract", "") or ""
            if not title and not abstract and fld(rec, "terms") is None:
                raise CorpusError(f"{path}:{lineno}: record {doc_id!r} has no text field")
            if doc_id in seen:
                raise CorpusError(
                    f"duplicate document id {doc_id!r} "
                    f"(lines {seen[doc_id]} and {lineno})"
                )
            seen[doc_id] = lineno
            refs = fld(rec, "references", []) or []
            # drop self-citations and duplicates here; Document enforces the rest
            uniq_refs = []
            for r in refs:
                if r != doc_id and r not in uniq_refs:
                    uniq_refs.append(r)
            terms = fld(rec, "terms")
            docs.append(
                Document(
                    id=str(doc_id),
                    title=title,
                    abstract=abstract,
                    references=tuple(str(r) for r in uniq_refs),
                    in_field=bool(fld(rec, "in_field", True)),
                    year=fld(rec, "year"),
                    terms=tuple(terms) if terms is not None else None,
                )
            )
    return docs


# --- tokenization and term extraction --------------------------------------

_URL_RE = re.compile(r"https?://\S+|www\.\S+")
_TOKEN_RE = re.compile(r"[a-z0-9'-]+")
_HAS_LETTER_RE = re.compile(r"[a-z]")


def tokenize(text: str) -> list[str]:
    """Lowercase, strip URLs and punctuation, drop purely numeric tokens."""
    text = _URL_RE.sub(" ", text.lower())
    return [t for t in _TOKEN_RE.findall(text) if _HAS_LETTER_RE.search(t)]


def accept_all_nouns(token: str) -> bool:
    return True


def lexicon_noun_selector(lexicon) -> "callable":
    """Noun selector backed by a user-supplied noun list."""
    lex = frozenset(lexicon)
    return lambda token: token in lex


def load_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


def default_stopwords() -> frozenset[str]:
    ref = resources.files("mapcompare").joinpath("data/stopwords_en.txt")
    return frozenset(
        w.strip().lower() for w in ref.read_text(encoding="utf-8").splitlines() if w.strip()
    )


def load_lemma_map(path) -> dict[str, str]:
    """Tab-separated term<TAB>lemma pairs; identity for unlisted terms."""
    lemmas = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusError(f"{path}:{lineno}: expected term<TAB>lemma")
            lemmas[parts[0].strip().lower()] = parts[1].strip().lower()
    return lemmas


class PhraseMatcher:
    """Greedy longest-match of thesaurus phrases over a token stream."""

    def __init__(self, thesaurus: Thesaurus):
        # first token -> phrase token tuples, longest first
        self._by_first: dict[str, list[tuple[str, ...]]] = {}
        for label in thesaurus.labels():
            toks = tuple(tokenize(label))
            if not toks:
                continue
            self._by_first.setdefault(toks[0], []).append(toks)
        for phrases in self._by_first.values():
            phrases.sort(key=len, reverse=True)

    def match_at(self, tokens: list[str], pos: int) -> tuple[str, ...] | None:
        """Longest phrase starting at `pos`, or None."""
        for phrase in self._by_first.get(tokens[pos], ()):
            if tuple(tokens[pos : pos + len(phrase)]) == phrase:
                return phrase
        return None


def extract_terms(
    doc: Document,
    thesaurus: Thesaurus | PhraseMatcher | None = None,
    noun_selector=accept_all_nouns,
    stopwords: frozenset[str] = frozenset(),
    lemma_map: dict[str, str] | None = None,
) -> list[str]:
    """Term sequence for one document, in text order.

    Thesaurus phrases consume their tokens (longest match wins); the remaining
    single tokens are stopword-filtered, lemmatized, and kept only if the noun
    selector accepts them. Pre-tagged documents return their own term list.
    """
    if doc.terms is not None:
        return [t.lower() for t in doc.terms]
    lemma_map = lemma_map or {}
    matcher = (
        thesaurus
        if isinstance(thesaurus, PhraseMatcher)
        else PhraseMatcher(thesaurus)
        if thesaurus is not None
        else None
    )
    tokens = tokenize(doc.text)
    out: list[str] = []
    i = 0
    while i < len(tokens):
        if matcher is not None:
            phrase = matcher.match_at(tokens, i)
            if phrase is not None:
                out.append(" ".join(phrase))
                i += len(phrase)
                continue
        tok = tokens[i]
        i += 1
        if tok in stopwords:
            continue
        tok = lemma_map.get(tok, tok)
        if noun_selector(tok):
            out.append(tok)
    return out


# --- vocabulary and bag-of-words -------------------------------------------

def build_vocabulary(
    term_docs: list[list[str]],
    max_doc_share: float = 0.95,
    drop_top_k: int = 100,
) -> Vocabulary:
    """Filtered vocabulary over pooled phrases and nouns.

    Removes terms present in >= max_doc_share of documents, then the
    drop_top_k most frequent survivors by token count (ties lexicographic).
    """
    n_docs = len(term_docs)
    if n_docs == 0 or all(len(d) == 0 for d in term_docs):
        raise CorpusError("cannot build a vocabulary from an empty corpus")
    doc_freq: Counter = Counter()
    total_freq: Counter = Counter()
    for terms in term_docs:
        total_freq.update(terms)
        doc_freq.update(set(terms))
    survivors = [t for t in total_freq if doc_freq[t] / n_docs < max_doc_share]
    if drop_top_k > 0:
        # highest total frequency first, lexicographic tie-break
        by_freq = sorted(survivors, key=lambda t: (-total_freq[t], t))
        survivors = by_freq[drop_top_k:]
    if not survivors:
        raise CorpusError("empty vocabulary after filtering")
    terms = sorted(survivors)
    return Vocabulary(
        terms=terms,
        doc_frequency={t: doc_freq[t] for t in terms},
        total_frequency={t: total_freq[t] for t in terms},
    )


def to_bow(doc_ids: list[str], term_docs: list[list[str]], vocab: Vocabulary) -> BowCorpus:
    """Index term sequences against the vocabulary; OOV terms dropped."""
    if len(doc_ids) != len(term_docs):
        raise CorpusError("doc_ids and term_docs length mismatch")
    docs = [
        np.array([vocab.index[t] for t in terms if t in vocab.index], dtype=np.int32)
        for terms in term_docs
    ]
    return BowCorpus(doc_ids=list(doc_ids), docs=docs, vocab=vocab)
