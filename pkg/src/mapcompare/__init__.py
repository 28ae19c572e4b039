"""Build and compare two maps of a publication corpus: an LDA topic map and a
direct-citation Leiden cluster map.

Subpackages/modules:
    corpus     -- ingestion, phrase tokenization, vocabulary, bag-of-words
    lda        -- collapsed Gibbs LDA training and the trained model
    cluster    -- citation graph, Leiden/CPM clustering, hierarchy, area selection
    crossmap   -- cluster-to-topic / topic-to-cluster matrices, relation graphs
    interpret  -- labeling aids: top terms/docs, thesaurus roll-up, topic distances
    pipeline   -- staged artifact pipeline driven by a config file
    server     -- read/label HTTP API over pipeline artifacts
"""

__version__ = "0.1.0"
