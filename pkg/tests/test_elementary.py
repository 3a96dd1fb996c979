import random
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphopt.elementary import (
    BackendHandle,
    CallCounts,
    CostModel,
    ElementaryCounter,
    UnknownElementError,
    modeled_cost,
)
from graphopt.property_graph import Edge, Node, PropertyGraph

from gen import random_graph
from replay import linearity_holds, replay_case


@pytest.fixture
def handle():
    nodes = [
        Node(1, frozenset({"Entity"}), {"preferredLabel": "APP"}),
        Node(2, frozenset({"Entity"}), {"preferredLabel": "LRP3"}),
        Node(3, frozenset({"Entity"}), {}),
        Node(4, frozenset({"Author"}), {}),
        Node(5, frozenset({"Entity"}), {}),
    ]
    edges = [
        Edge(10, "hasRelation", 1, 2, {"function": "increases"}),
        Edge(11, "hasRelation", 1, 2, {"function": "decreases"}),
        Edge(12, "hasRelation", 2, 3, {}),
        Edge(13, "isAuthor", 4, 3, {}),
    ]
    return BackendHandle(PropertyGraph(nodes, edges))


def test_find_nodes(handle):
    assert handle.find_nodes("Entity", "preferredLabel", "APP") == [1]
    assert handle.find_nodes("Entity", "preferredLabel", "no-such") == []
    assert handle.find_nodes("Nope", "x", 1) == []
    assert handle.counter.index_lookup == 3
    assert handle.counter.rows_transferred == 1


def test_get_neighbours(handle):
    assert handle.get_neighbours(5, "both") == []
    assert set(handle.get_neighbours(2, "both")) == {(10, 1), (11, 1), (12, 3)}
    assert handle.get_neighbours(1, "out", "hasRelation") == [(10, 2), (11, 2)]
    assert handle.get_neighbours(3, "in", "isAuthor") == [(13, 4)]
    snap = handle.counter.snapshot()
    assert snap.neighbours == 4 and snap.rows_transferred == 6
    with pytest.raises(UnknownElementError):
        handle.get_neighbours(99)
    with pytest.raises(ValueError):
        handle.get_neighbours(1, "sideways")
    assert handle.counter.neighbours == 4


def test_star_neighbourhood():
    nodes = [Node(i, frozenset({"N"}), {}) for i in range(6)]
    g = PropertyGraph(nodes, [Edge(10 + i, "t", 0, i, {}) for i in range(1, 6)])
    h = BackendHandle(g)
    assert len(h.get_neighbours(0, "out")) == 5
    assert (h.counter.neighbours, h.counter.rows_transferred) == (1, 5)


def test_self_loop_appears_per_direction():
    g = PropertyGraph([Node(0, frozenset({"N"}), {})], [Edge(1, "t", 0, 0, {})])
    h = BackendHandle(g)
    assert h.get_neighbours(0, "both") == [(1, 0), (1, 0)]
    assert h.get_neighbours(0, "out") == [(1, 0)]


def test_get_attribute(handle):
    assert handle.get_attribute(1, "preferredLabel") == "APP"
    assert handle.get_attribute(1, "missing") is None
    assert handle.get_attribute(10, "function") == "increases"
    assert handle.counter.attribute_access == 3
    with pytest.raises(UnknownElementError):
        handle.get_attribute(999, "x")
    assert handle.counter.attribute_access == 3


def test_edges_between(handle):
    assert [e.id for e in handle.edges_between(1, 2)] == [10, 11]
    assert handle.edges_between(4, 3, "hasRelation") == []
    assert handle.edges_between(2, 1) == []
    assert handle.counter.edges_between == 3
    assert handle.counter.rows_transferred == 0
    with pytest.raises(UnknownElementError):
        handle.edges_between(1, 999)


def test_scan_and_labels_share_node_lookup(handle):
    assert handle.scan_nodes("Entity") == [1, 2, 3, 5]
    assert handle.scan_nodes(None) == [1, 2, 3, 4, 5]
    assert handle.get_labels(4) == frozenset({"Author"})
    snap = handle.counter.snapshot()
    assert snap.node_lookup == 3 and snap.rows_transferred == 9


def test_backend_is_pure(handle):
    before = list(handle.graph.iter_jsonl())
    first = handle.get_neighbours(2)
    assert handle.get_neighbours(2) == first
    assert list(handle.graph.iter_jsonl()) == before


def test_modeled_cost_examples():
    assert modeled_cost(CallCounts(), CostModel()) == 0
    model = CostModel(0, 0, 10, 5, 0, 0, 0)
    assert modeled_cost(CallCounts(neighbours=3, attribute_access=2), model) == 40


def test_modeled_cost_rows_term():
    model = CostModel()
    assert modeled_cost(CallCounts(rows_transferred=4), model) == 4 * model.row_transfer_us


def test_cost_model_validation(tmp_path):
    with pytest.raises(ValueError):
        CostModel(neighbours_us=-1)
    with pytest.raises(ValueError):
        CostModel(kv_lookup_us=150.0)
    path = tmp_path / "cm.json"
    path.write_text('{"node_lookup_us":50, "index_lookup_us":200, "neighbours_us":100, '
                    '"attribute_access_us":150, "edges_between_us":100, "row_transfer_us":5}')
    assert CostModel.from_json(path) == CostModel()
    with pytest.raises(ValueError):
        CostModel.from_json({"bogus_us": 1})
    assert CostModel.from_json(CostModel().to_json()) == CostModel()


def test_default_attribute_access_dominates_per_row_neighbours():
    m = CostModel()
    assert m.attribute_access_us > m.row_transfer_us
    assert m.kv_lookup_us < m.attribute_access_us


def test_counter_reset_and_monotonic():
    c = ElementaryCounter()
    c.add(neighbours=2)
    with pytest.raises(ValueError):
        c.add(neighbours=-1)
    assert c.neighbours == 2
    c.reset()
    assert c.snapshot() == CallCounts()


def test_counter_is_thread_safe():
    c = ElementaryCounter()

    def work():
        for _ in range(5000):
            c.add(attribute_access=1, rows_transferred=2)

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert c.attribute_access == 40000 and c.rows_transferred == 80000


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_replay_against_shadow_tally(seed):
    rng = random.Random(seed)
    graph = random_graph(rng, rng.randint(1, 25), rng.randint(0, 60))
    assert replay_case(rng, graph, rng.randint(1, 30)) == []


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_modeled_cost_linear(seed):
    assert linearity_holds(random.Random(seed))
