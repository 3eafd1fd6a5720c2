from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from helpers_build import WORDS, graph_from_nested, merge_edits_order_free
from semfaith import (
    EditOperation,
    HarnessError,
    apply_edit,
    apply_edits_in_order,
    build_chain,
    compute_deltas,
    emit_manifest,
    load_manifest,
    per_edit_deltas,
    read_edit_corpus,
    version_id,
)

EDIT_TYPES = ["Mec", "ArtOrDet", "Wci", "Nn", "Vt"]


def toy_parse(tokens, gid="v"):
    """Deterministic stand-in parser: flat scene whose edge labels depend on
    token length, so editing a token can change the structure."""
    labels = ["A", "P", "D", "E", "C"]
    children = [(labels[len(t) % 5], i) for i, t in enumerate(tokens)]
    return graph_from_nested(gid, list(tokens), ("z-root", [("H", ("scene", children))]))


def random_edits(rng: random.Random, n_tokens: int, max_edits=4):
    edits = []
    pos = 0
    while pos < n_tokens and len(edits) < max_edits:
        if rng.random() < 0.4:
            width = rng.randint(0, min(2, n_tokens - pos))
            repl = tuple(rng.choice(WORDS) for _ in range(rng.randint(0 if width else 1, 2)))
            edits.append(EditOperation(pos, pos + width, repl, rng.choice(EDIT_TYPES)))
            pos += max(width, 1)
        else:
            pos += 1
    return edits


def test_apply_edit_replacement():
    tokens = ["He", "gve", "an", "apple"]
    out = apply_edit(tokens, EditOperation(1, 2, ("gave",), "Mec"))
    assert out == ["He", "gave", "an", "apple"]


def test_apply_edit_deletion():
    out = apply_edit(["a", "b", "c", "d"], EditOperation(2, 3, (), "Nn"))
    assert out == ["a", "b", "d"]


def test_apply_edit_insertion():
    out = apply_edit(["a", "b", "c"], EditOperation(2, 2, ("red",), "Wci"))
    assert out == ["a", "b", "red", "c"]


def test_apply_edit_out_of_bounds():
    with pytest.raises(HarnessError):
        apply_edit(["a"], EditOperation(0, 2, (), "Nn"))


def test_edit_invalid_span():
    with pytest.raises(HarnessError):
        EditOperation(3, 2, (), "Nn")


def test_build_chain_zero_edits():
    chain = build_chain("s1", ["a", "b"], [], seed=5)
    assert len(chain.versions) == 1
    assert chain.source_index == 0


def test_build_chain_one_edit_two_versions():
    for seed in range(5):
        chain = build_chain("s1", ["a", "b"], [EditOperation(0, 1, ("x",), "Mec")], seed)
        assert len(chain.versions) == 2


def test_build_chain_rejects_overlap():
    edits = [EditOperation(0, 2, ("x",), "Mec"), EditOperation(1, 3, ("y",), "Nn")]
    with pytest.raises(HarnessError, match="overlap"):
        build_chain("s1", ["a", "b", "c"], edits, 0)


def test_shifted_spans_final_version_order_independent():
    # first edit grows the sentence by one token, shifting the second span
    tokens = ["a", "b", "c", "d", "e"]
    edits = [
        EditOperation(1, 2, ("x", "y"), "Mec"),  # +1
        EditOperation(3, 4, ("z",), "Nn"),
    ]
    v01 = apply_edits_in_order(tokens, edits, [0, 1])[-1]
    v10 = apply_edits_in_order(tokens, edits, [1, 0])[-1]
    assert v01 == v10 == ("a", "x", "y", "c", "z", "e")
    assert v01 == merge_edits_order_free(tokens, edits)


def test_order_invariance_exhaustive_random():
    rng = random.Random(9)
    for _ in range(40):
        n = rng.randint(1, 8)
        tokens = [rng.choice(WORDS) for _ in range(n)]
        edits = random_edits(rng, n)
        expected = merge_edits_order_free(tokens, edits)
        for order in itertools.permutations(range(len(edits))):
            assert apply_edits_in_order(tokens, edits, list(order))[-1] == expected


def test_build_chain_deterministic():
    tokens = ["a", "b", "c", "d"]
    edits = [
        EditOperation(0, 1, ("x",), "Mec"),
        EditOperation(2, 3, (), "Nn"),
        EditOperation(3, 3, ("w",), "Wci"),
    ]
    c1 = build_chain("s9", tokens, edits, seed=123)
    c2 = build_chain("s9", tokens, edits, seed=123)
    assert c1 == c2
    c3 = build_chain("s9", tokens, edits, seed=124)
    assert c3.order != c1.order or c3.source_index != c1.source_index or c3 == c1


def test_build_chain_pinned_source():
    chain = build_chain("s1", ["a", "b"], [EditOperation(0, 1, ("x",), "Mec")],
                        seed=0, pin_source_index=1)
    assert chain.source_index == 1
    with pytest.raises(HarnessError):
        build_chain("s1", ["a"], [], seed=0, pin_source_index=3)


def test_manifest_roundtrip(tmp_path):
    rng = random.Random(4)
    chains = []
    for i in range(5):
        n = rng.randint(1, 7)
        tokens = [rng.choice(WORDS) for _ in range(n)]
        chains.append(build_chain(f"s{i}", tokens, random_edits(rng, n), seed=77))
    path = tmp_path / "manifest.json"
    emit_manifest(chains, path)
    assert load_manifest(path) == chains
    # byte-identical on re-emit
    text = path.read_text()
    emit_manifest(load_manifest(path), path)
    assert path.read_text() == text


def test_manifest_no_dedup_across_chains(tmp_path):
    # two sentences with identical text still emit their own version records
    chains = [
        build_chain("s1", ["a", "b"], [], seed=0),
        build_chain("s2", ["a", "b"], [], seed=0),
    ]
    path = tmp_path / "m.json"
    emit_manifest(chains, path)
    import json

    doc = json.loads(path.read_text())
    assert [v["version_id"] for v in doc["versions"]] == ["s1.v0", "s2.v0"]


def test_edit_corpus_reader(tmp_path):
    path = tmp_path / "edits.jsonl"
    path.write_text(
        '{"sentence_id": "s1", "tokens": ["He", "gve"], '
        '"edits": [{"start": 1, "end": 2, "replacement": ["gave"], "type": "Mec"}]}\n'
    )
    records = read_edit_corpus(path)
    assert records == [
        ("s1", ["He", "gve"], [EditOperation(1, 2, ("gave",), "Mec")])
    ]


def graphs_for(chains, parse=toy_parse):
    graphs = {}
    for chain in chains:
        for k, tokens in enumerate(chain.versions):
            vid = version_id(chain.sentence_id, k)
            graphs[vid] = parse(tokens, vid)
    return graphs


def test_compute_deltas_identity_parser_all_zero():
    rng = random.Random(2)
    chains = []
    for i in range(8):
        n = rng.randint(2, 7)
        tokens = [rng.choice(WORDS) for _ in range(n)]
        chains.append(build_chain(f"s{i}", tokens, random_edits(rng, n), seed=3))
    fixed = toy_parse(["the", "same", "graph"], "fixed")

    def identity_parse(tokens, gid):
        return fixed

    report = compute_deltas(chains, graphs_for(chains, identity_parse))
    assert all(td.delta_mean == 0 for td in report)


def test_compute_deltas_aggregation_matches_raw():
    rng = random.Random(13)
    chains = []
    for i in range(10):
        n = rng.randint(2, 8)
        tokens = [rng.choice(WORDS) for _ in range(n)]
        chains.append(build_chain(f"s{i}", tokens, random_edits(rng, n), seed=8))
    graphs = graphs_for(chains)
    raw = per_edit_deltas(chains, graphs)
    report = compute_deltas(chains, graphs)
    for td in report:
        mine = [d for t, d in raw if t == td.edit_type]
        assert td.occurrences == len(mine) >= 1
        assert td.delta_mean == sum(mine, Fraction(0)) / len(mine)
    # sorted by delta descending
    deltas = [td.delta_mean for td in report]
    assert deltas == sorted(deltas, reverse=True)
    # mass conservation
    assert sum(td.delta_mean * td.occurrences for td in report) == sum(
        (d for _, d in raw), Fraction(0)
    )


def test_compute_deltas_missing_graph_names_version():
    chain = build_chain("s1", ["He", "gve"],
                        [EditOperation(1, 2, ("gave",), "Mec")], seed=0)
    graphs = graphs_for([chain])
    del graphs["s1.v1"]
    with pytest.raises(HarnessError, match="s1.v1"):
        compute_deltas([chain], graphs)
