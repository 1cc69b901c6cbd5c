import os
import random

import pytest

import gcr

T1 = "A\tr1\tB\nB\tr2\tC\nA\tr3\tD\nD\tr2\tC\nB\tr2\tE\n"
ARROW = "→"


@pytest.fixture()
def t1():
    kg = gcr.KnowledgeGraph.from_tsv(T1)
    return kg, gcr.Vocab.reference(kg)


def test_graph_and_paths(t1):
    kg, _ = t1
    assert (kg.n_entities, kg.n_relations, kg.n_triples) == (5, 3, 5)
    paths = kg.enumerate_paths(["A"], 2)
    assert len(paths) == 5
    assert f"<PATH> A {ARROW} r3 {ARROW} D </PATH>" in paths
    assert kg.path_status(f"<PATH> A {ARROW} r2 {ARROW} B </PATH>") == "ungrounded"
    assert kg.path_status("<PATH> A") == "malformed"


def test_trie_queries(t1):
    kg, vocab = t1
    trie = gcr.build_question_trie(kg, ["A"], 2, vocab)
    assert trie.n_paths == 5
    assert gcr.build_question_trie(kg, ["A"], 1, vocab).n_paths == 2
    head = vocab.encode(f"<PATH> A {ARROW}")
    assert sorted(trie.allowed_next(head)) == sorted(vocab.encode("r1 r3"))
    assert trie.is_valid_prefix(head)
    assert not trie.is_complete(head)
    assert trie.is_complete(vocab.encode(f"<PATH> A {ARROW} r3 {ARROW} D </PATH>"))
    with pytest.raises(gcr.UnknownEntityError):
        gcr.build_question_trie(kg, ["Z"], 2, vocab)


def test_serialization(t1, tmp_path):
    kg, vocab = t1
    trie = gcr.build_question_trie(kg, ["A"], 2, vocab)
    data = trie.to_bytes()
    assert data[:4] == b"GCRT"
    assert gcr.KGTrie.from_bytes(data).sequences() == trie.sequences()
    path = tmp_path / "a.trie"
    trie.save(path)
    back = gcr.KGTrie.load(path)
    assert back.vocab_fingerprint == vocab.fingerprint
    assert back.hops == 2
    with pytest.raises(gcr.TrieFormatError):
        gcr.KGTrie.from_bytes(b"XXXX" + data[4:])


def test_random_prefixes_match_path_strings():
    # Oracle: prefix filtering over the encoded path strings.
    data = os.environ.get("GCR_TEST_DATA", os.path.join(os.path.dirname(__file__), "..", "..", "tests", "data"))
    kg = gcr.KnowledgeGraph.from_file(os.path.join(data, "toy_kg.tsv"))
    vocab = gcr.Vocab.reference(kg)
    starts = ["Justin Bieber", "Hank Aaron"]
    trie = gcr.build_question_trie(kg, starts, 2, vocab)
    seqs = [tuple(vocab.encode(p)) for p in kg.enumerate_paths(starts, 2)]
    assert trie.n_paths == len(set(seqs))

    rng = random.Random(0)
    for _ in range(1000):
        base = list(rng.choice(seqs))
        prefix = base[: rng.randint(0, len(base))]
        if rng.random() < 0.3:
            prefix.append(rng.randrange(len(vocab)))
        n = len(prefix)
        ext = [s for s in seqs if list(s[:n]) == prefix]
        assert trie.is_valid_prefix(prefix) == bool(ext)
        assert trie.is_complete(prefix) == (tuple(prefix) in seqs)
        if ext:
            assert trie.allowed_next(prefix) == sorted({s[n] for s in ext if len(s) > n})


def test_metrics():
    assert gcr.prf1(["a", "b"], ["b", "c"]) == (0.5, 0.5, 0.5)
    assert gcr.hit(["MOBILE "], ["Mobile"]) == 1
    with pytest.raises(gcr.GcrError):
        gcr.hit(["a"], [])
