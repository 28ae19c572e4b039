"""Regenerate the bundled synthetic fixture corpus.

400 documents: four planted topic blocks aligned 50/50 with four planted
citation communities (95 docs each), plus a 20-doc low-field background
community that the 10% share rule should leave unselected. Deterministic for
the fixed seed; outputs are committed under fixtures/.
"""

import json
import random
from pathlib import Path

SEED = 20240817
N_COMMUNITIES = 4
COMMUNITY_SIZE = 95
BACKGROUND_SIZE = 20
WORDS_PER_TOPIC = 25
DOC_LEN = 30
CITES_PER_DOC = 6
CROSS_CITE_RATE = 0.03

OUT = Path(__file__).resolve().parent.parent / "fixtures"

FILLER = [f"common{i}" for i in range(5)]


def topic_words(t):
    return [f"w{t}{i:02d}" for i in range(WORDS_PER_TOPIC)]


def main():
    rnd = random.Random(SEED)
    OUT.mkdir(exist_ok=True)

    # thesaurus: root -> domain per topic -> leaf words and one two-word phrase
    rows = [("root", "", "research")]
    for t in range(N_COMMUNITIES):
        rows.append((f"dom{t}", "root", f"domain {t}"))
        for i in range(5):
            rows.append((f"dom{t}.w{i}", f"dom{t}", topic_words(t)[i]))
        rows.append((f"dom{t}.p", f"dom{t}", f"{topic_words(t)[0]} {topic_words(t)[1]}"))
    with open(OUT / "thesaurus.tsv", "w", encoding="utf-8") as fh:
        for node_id, parent, label in rows:
            fh.write(f"{node_id}\t{parent}\t{label}\n")

    # documents
    docs = []
    for c in range(N_COMMUNITIES):
        for i in range(COMMUNITY_SIZE):
            d = len(docs)
            topic = c if rnd.random() < 0.5 else rnd.choice(
                [t for t in range(N_COMMUNITIES) if t != c]
            )
            docs.append({"id": f"doc{d:04d}", "community": c, "topic": topic,
                         "in_field": rnd.random() < 0.8})
    for i in range(BACKGROUND_SIZE):
        d = len(docs)
        docs.append({"id": f"doc{d:04d}", "community": N_COMMUNITIES,
                     "topic": rnd.randrange(N_COMMUNITIES),
                     "in_field": rnd.random() < 0.05})

    by_comm = {}
    for doc in docs:
        by_comm.setdefault(doc["community"], []).append(doc["id"])

    with open(OUT / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for doc in docs:
            words = topic_words(doc["topic"])
            tokens = []
            for _ in range(DOC_LEN):
                r = rnd.random()
                if r < 0.12:
                    tokens.append(rnd.choice(FILLER))
                elif r < 0.20:
                    # adjacent pair so the thesaurus phrase match fires
                    tokens.extend(words[:2])
                else:
                    tokens.append(rnd.choice(words))
            title = " ".join(tokens[:5])
            abstract = " ".join(tokens[5:])
            peers = [p for p in by_comm[doc["community"]] if p != doc["id"]]
            n_cites = min(CITES_PER_DOC, len(peers))
            refs = rnd.sample(peers, n_cites)
            if rnd.random() < CROSS_CITE_RATE:
                other = rnd.choice([c for c in by_comm if c != doc["community"]])
                refs.append(rnd.choice(by_comm[other]))
            if rnd.random() < 0.1:
                refs.append(f"external{rnd.randrange(1000)}")
            rec = {
                "id": doc["id"],
                "title": title,
                "abstract": abstract,
                "references": refs,
                "in_field": doc["in_field"],
                "year": 2010 + rnd.randrange(11),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    # ground truth for tests
    truth = {
        "communities": {doc["id"]: doc["community"] for doc in docs},
        "topics": {doc["id"]: doc["topic"] for doc in docs},
    }
    with open(OUT / "truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth, fh, sort_keys=True, indent=1)

    config = """\
# scaled-down run over the bundled synthetic corpus
corpus: corpus.jsonl
thesaurus: thesaurus.tsv
output_dir: out
seed: 42
drop_top_k: 5
k: 4
iterations: 500
resolutions: [0.005, 0.02, 0.05]
min_cluster_size: 10
min_share: 0.10
grouping_resolution: 0.9
grouping_min_size: 1
tau_ct: 0.2
tau_tc: 0.1
"""
    (OUT / "config.yaml").write_text(config, encoding="utf-8")
    print(f"wrote fixture to {OUT} ({len(docs)} docs)")


if __name__ == "__main__":
    main()
