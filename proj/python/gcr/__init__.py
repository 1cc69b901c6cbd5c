"""Python access to the GCR knowledge-graph trie and helpers."""

from ._core import (
    GcrError,
    KGTrie,
    KnowledgeGraph,
    TrieFormatError,
    UnknownEntityError,
    Vocab,
    build_question_trie,
    build_trie,
    hit,
    prf1,
)

__all__ = [
    "GcrError",
    "KGTrie",
    "KnowledgeGraph",
    "TrieFormatError",
    "UnknownEntityError",
    "Vocab",
    "build_question_trie",
    "build_trie",
    "hit",
    "prf1",
]
