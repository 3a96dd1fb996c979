import random

import pytest

from graphopt.elementary import BackendHandle, CostModel
from graphopt.kv import DEFAULT_KV_LOOKUP_US, KVError, KVStore, UncoveredKeyError, build_from_graph, kv_get
from graphopt.property_graph import GeneratorConfig, generate_synthetic


@pytest.fixture(scope="module")
def graph():
    return generate_synthetic(GeneratorConfig(entity_count=80, document_count=50, author_count=20,
                                              relation_count=300, seed=5, anchors=True))


def test_coverage_over_all_documents(graph):
    store = build_from_graph(graph, [("Document", "publicationDate")])
    assert len(store) == 50
    assert store.covers("Document", "publicationDate")
    assert not store.covers("Entity", "publicationDate")


def test_build_errors(graph):
    with pytest.raises(KVError):
        build_from_graph(graph, [])
    with pytest.raises(KVError):
        build_from_graph(graph, [("Nope", "x")])


def test_get_present_absent_uncovered(graph):
    store = build_from_graph(graph, [("Document", "publicationDate"), ("Document", "nothing")])
    doc = graph.nodes_with_label("Document")[0]
    assert kv_get(store, doc, "publicationDate") == graph.nodes[doc].props["publicationDate"]
    assert kv_get(store, doc, "nothing") is None
    with pytest.raises(UncoveredKeyError):
        kv_get(store, doc, "documentID")
    entity = graph.nodes_with_label("Entity")[0]
    with pytest.raises(UncoveredKeyError):
        kv_get(store, entity, "publicationDate")
    assert store.counter.kv_lookup == 2


def test_consistent_with_graph_reads(graph):
    pairs = [("Document", "publicationDate"), ("Document", "documentID"), ("Entity", "preferredLabel"),
             ("Author", "name"), ("Author", "publicationDate")]
    store = build_from_graph(graph, pairs)
    handle = BackendHandle(graph)
    covered = [(i, key) for label, key in pairs for i in graph.nodes_with_label(label)]
    # exhaustive at this scale, then 1000 random samples
    for ident, key in covered:
        assert store.get(ident, key) == handle.get_attribute(ident, key)
    rng = random.Random(0)
    for ident, key in (rng.choice(covered) for _ in range(1000)):
        assert kv_get(store, ident, key) == handle.get_attribute(ident, key)


def test_kv_cheaper_than_graph_read():
    assert DEFAULT_KV_LOOKUP_US == CostModel().kv_lookup_us < CostModel().attribute_access_us


def test_dump_load_round_trip(graph, tmp_path):
    store = build_from_graph(graph, [("Document", "publicationDate"), ("Document", "missing")])
    path = tmp_path / "kv.jsonl"
    store.dump(path)
    lines = path.read_text().splitlines()
    assert any('"$date"' in line for line in lines[1:])
    back = KVStore.load(path)
    assert back.coverage == store.coverage and len(back) == len(store)
    for ident in graph.nodes_with_label("Document"):
        assert back.get(ident, "publicationDate") == store.get(ident, "publicationDate")
        assert back.get(ident, "missing") is None


def test_load_rejects_bad_files(tmp_path):
    path = tmp_path / "kv.jsonl"
    path.write_text('{"id": 1, "key": "k", "value": 1}\n')
    with pytest.raises(KVError):
        KVStore.load(path)
    path.write_text('{"coverage": [["A", "k"]]}\n{"id": 1, "key": "k", "value": [1]}\n')
    with pytest.raises(KVError):
        KVStore.load(path)
