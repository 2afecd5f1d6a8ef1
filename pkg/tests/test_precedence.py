import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.analysis.precedence import (
    OccNode,
    build_precedence,
    check_horizon,
    find_back_edges,
    precedes,
    to_dot,
)
from core.errors import InvalidHorizon, InvalidModel, OutOfHorizon
from core.model.types import SystemModel
from tests.factories import add_flow, part_item, topology_model


def n(process: str, occurrence: int = 1) -> OccNode:
    return OccNode(process, occurrence)


class TestExamples:
    def test_chain_k1(self, chain_model):
        rel = build_precedence(chain_model, 1)
        assert rel.pairs == frozenset({(n("P1"), n("P2"))})
        assert rel.back_edges == frozenset()

    def test_chain_k2_adds_self_succession(self, chain_model):
        rel = build_precedence(chain_model, 2)
        assert precedes(rel, n("P1", 1), n("P1", 2))
        assert precedes(rel, n("P1", 1), n("P2", 2))
        assert not precedes(rel, n("P2", 1), n("P1", 2))
        assert not precedes(rel, n("P2", 2), n("P1", 1))

    def test_two_cycle(self):
        model = topology_model(2, [(0, 1), (1, 0)], fed=[0])
        assert find_back_edges(model) == {"f01"}
        rel = build_precedence(model, 2)
        assert precedes(rel, n("p0", 1), n("p1", 1))
        assert precedes(rel, n("p1", 1), n("p0", 2))
        assert not precedes(rel, n("p1", 1), n("p0", 1))

    def test_external_feed_chooses_root(self):
        model = topology_model(2, [(0, 1), (1, 0)], fed=[1])
        assert find_back_edges(model) == {"f00"}

    def test_self_loop_is_back_edge(self):
        model = topology_model(1, [(0, 0)])
        assert find_back_edges(model) == {"f00"}
        rel = build_precedence(model, 3)
        assert not precedes(rel, n("p0", 2), n("p0", 2))
        assert precedes(rel, n("p0", 1), n("p0", 3))

    def test_assembly_line_back_edges(self, assembly_line_model):
        rel = build_precedence(assembly_line_model, 2)
        assert rel.back_edges == frozenset({"f5", "f7"})
        assert precedes(rel, n("turn", 1), n("rework", 1))
        assert precedes(rel, n("rework", 1), n("turn", 2))


class TestErrors:
    @pytest.mark.parametrize("horizon", [0, -1, True, 1.5, "2"])
    def test_invalid_horizon(self, chain_model, horizon):
        with pytest.raises(InvalidHorizon):
            build_precedence(chain_model, horizon)

    def test_check_horizon_accepts_positive(self):
        assert check_horizon(3) == 3

    def test_out_of_horizon(self, chain_model):
        rel = build_precedence(chain_model, 2)
        with pytest.raises(OutOfHorizon):
            precedes(rel, n("P1", 1), n("P2", 3))
        with pytest.raises(OutOfHorizon):
            precedes(rel, n("P1", 0), n("P2", 1))

    def test_invalid_model(self, chain_model):
        chain_model.processes["P2"].consumes.add(part_item("nope"))
        with pytest.raises(InvalidModel):
            build_precedence(chain_model, 1)


class TestDot:
    def test_sorted_and_dashed(self):
        model = topology_model(2, [(0, 1), (1, 0)], fed=[0])
        dot = to_dot(model, build_precedence(model, 2))
        lines = dot.splitlines()
        assert lines[0] == "digraph precedence {"
        assert lines[1] == "  rankdir=LR;"
        assert '  "p1@1" -> "p0@2" [style=dashed];' in lines
        assert '  "p0@1" -> "p1@1";' in lines
        assert lines[-1] == "}"
        edge_lines = [line for line in lines if "->" in line]
        assert edge_lines == sorted(edge_lines)

    def test_deterministic(self, assembly_line_model):
        rel = build_precedence(assembly_line_model, 3)
        assert to_dot(assembly_line_model, rel) == to_dot(assembly_line_model, build_precedence(assembly_line_model, 3))


# ============================================================================
# Order laws over generated topologies
# ============================================================================

@st.composite
def topologies(draw, max_processes=6):
    size = draw(st.integers(min_value=1, max_value=max_processes))
    edges = draw(st.lists(st.tuples(st.integers(0, size - 1), st.integers(0, size - 1)), max_size=10))
    fed = draw(st.lists(st.integers(0, size - 1), max_size=2))
    return topology_model(size, edges, fed)


def _assert_strict_partial_order(pairs):
    for a, b in pairs:
        assert a != b
        assert (b, a) not in pairs
    successors = {}
    for a, b in pairs:
        successors.setdefault(a, set()).add(b)
    for a, b in pairs:
        for c in successors.get(b, ()):
            assert (a, c) in pairs


def _assert_laws_up_to(model, horizon=3):
    previous = None
    for k in range(1, horizon + 1):
        pairs = build_precedence(model, k).pairs
        _assert_strict_partial_order(pairs)
        if previous is not None:
            assert previous == {(a, b) for a, b in pairs if a.occurrence < k and b.occurrence < k}
        previous = pairs


@settings(max_examples=1000, deadline=None)
@given(model=topologies(), horizon=st.integers(min_value=1, max_value=3))
def test_strict_partial_order(model, horizon):
    _assert_strict_partial_order(build_precedence(model, horizon).pairs)


@settings(max_examples=100, deadline=None)
@given(model=topologies(), horizon=st.integers(min_value=1, max_value=3))
def test_horizon_extension_is_consistent(model, horizon):
    smaller = build_precedence(model, horizon).pairs
    larger = build_precedence(model, horizon + 1).pairs
    restricted = {(a, b) for a, b in larger if a.occurrence <= horizon and b.occurrence <= horizon}
    assert smaller == restricted


@settings(max_examples=100, deadline=None)
@given(model=topologies(max_processes=5))
def test_forward_flows_give_same_occurrence_pairs(model):
    rel = build_precedence(model, 2)
    for flow in model.flows.values():
        if flow.id in rel.back_edges or flow.source.startswith("@"):
            continue
        for i in (1, 2):
            assert (n(flow.source, i), n(flow.target, i)) in rel.pairs


@pytest.mark.parametrize("size", [1, 2, 3])
def test_every_topology_up_to_three_processes(size):
    ordered = list(itertools.product(range(size), repeat=2))
    for mask in range(1 << len(ordered)):
        edges = [e for bit, e in enumerate(ordered) if mask >> bit & 1]
        for fed in ((), (0,), (size - 1,)):
            _assert_laws_up_to(topology_model(size, edges, fed))


def test_every_loop_free_four_process_topology():
    ordered = list(itertools.permutations(range(4), 2))
    for mask in range(1 << len(ordered)):
        edges = [e for bit, e in enumerate(ordered) if mask >> bit & 1]
        _assert_strict_partial_order(build_precedence(topology_model(4, edges), 2).pairs)


@pytest.mark.parametrize("size", [5, 6])
def test_every_path_with_two_extra_flows(size):
    path = [(i, i + 1) for i in range(size - 1)]
    extras = list(itertools.product(range(size), repeat=2))
    for count in (1, 2):
        for chosen in itertools.combinations(extras, count):
            _assert_laws_up_to(topology_model(size, path + list(chosen), fed=(0,)))


def test_empty_model_has_no_pairs():
    rel = build_precedence(SystemModel(), 2)
    assert rel.pairs == frozenset()
    assert rel.nodes() == []


def test_late_flow_into_earlier_process_is_back_edge():
    model = topology_model(2, [(0, 1)])
    add_flow(model, "extra", "p1", "p0")
    assert find_back_edges(model) == {"extra"}
