from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.errors import (
    DuplicateId,
    EmptyConstituentList,
    EmptyPartList,
    InvalidState,
    NotFound,
    RetiredConstituent,
    TimeRegression,
    UnknownHolon,
)
from core.model.holons import HolonStore
from core.model.ledger import digest
from core.model.types import (
    Attribute,
    AttributeClass,
    HolonKind,
    HolonState,
    ProcessInstance,
    SystemModel,
)
from core.model.validation import validate
from tests.factories import T0, add_part, add_process


def _instance(model: SystemModel, iid: str = "asm#1") -> ProcessInstance:
    if "asm" not in model.processes:
        add_process(model, "asm")
    instance = ProcessInstance.timed(iid, "asm", 1, T0, T0 + timedelta(seconds=1))
    model.instances[iid] = instance
    return instance


def _state(state_id: str = "s1", offset: int = 1, **values) -> HolonState:
    return HolonState.of(state_id, T0 + timedelta(seconds=offset),
                         [Attribute(k, AttributeClass.SHAPE, v) for k, v in values.items()])


class TestCreation:
    def test_new_elementary_registers_ledger_entry(self):
        model = SystemModel()
        holon = add_part(model, "h1", {"a": 1.0}, descriptor=b"raw")
        assert holon.kind == HolonKind.ELEMENTARY
        assert holon.physical.ledger_entry == "ledger:h1"
        assert holon.physical.checksum == digest(b"raw")
        assert HolonStore(model).in_sync("h1")
        assert holon.head.attributes["a"].value == 1.0

    def test_duplicate_id_rejected(self):
        model = SystemModel()
        add_part(model, "h1")
        with pytest.raises(DuplicateId):
            add_part(model, "h1")

    def test_whitespace_id_rejected(self):
        with pytest.raises(InvalidState):
            add_part(SystemModel(), "bad id")

    def test_time_attribute_must_be_temporal(self):
        state = HolonState.of("s0", T0, [Attribute("t", AttributeClass.TIME, "noon")])
        with pytest.raises(InvalidState):
            HolonStore(SystemModel()).new_elementary("h1", {}, state, b"x")

    def test_repeated_attribute_name_rejected(self):
        with pytest.raises(InvalidState):
            HolonState.of("s0", T0, [Attribute("a", AttributeClass.SHAPE, 1),
                                     Attribute("a", AttributeClass.SHAPE, 2)])

    def test_unknown_holon(self):
        with pytest.raises(UnknownHolon):
            HolonStore(SystemModel()).get("ghost")
        assert issubclass(UnknownHolon, NotFound)


class TestAssembly:
    def test_assemble_retires_constituents(self):
        model = SystemModel()
        add_part(model, "h1", descriptor=b"one")
        add_part(model, "h2", descriptor=b"two")
        instance = _instance(model)
        composite = HolonStore(model).assemble(["h1", "h2"], instance, _state())

        assert composite.id == "asm#1:asm"
        assert composite.kind == HolonKind.COMPOSITE
        assert [c.holon_id for c in composite.constituents] == ["h1", "h2"]
        assert model.holons["h1"].retired and model.holons["h2"].retired
        assert composite.physical.checksum == digest(b"one\x1etwo")
        assert composite.states[0].produced_by == "asm#1"
        assert validate(model) == []

    def test_empty_constituent_list(self):
        model = SystemModel()
        with pytest.raises(EmptyConstituentList):
            HolonStore(model).assemble([], _instance(model), _state())

    def test_retired_constituent(self):
        model = SystemModel()
        add_part(model, "h1")
        add_part(model, "h2")
        store = HolonStore(model)
        store.assemble(["h1"], _instance(model, "asm#1"), _state())
        with pytest.raises(RetiredConstituent):
            store.assemble(["h1", "h2"], _instance(model, "asm#2"), _state())
        assert not model.holons["h2"].retired

    def test_repeated_constituent(self):
        model = SystemModel()
        add_part(model, "h1")
        with pytest.raises(DuplicateId):
            HolonStore(model).assemble(["h1", "h1"], _instance(model), _state())

    def test_unknown_instance(self):
        model = SystemModel()
        add_part(model, "h1")
        with pytest.raises(NotFound):
            HolonStore(model).assemble(["h1"], "nope#1", _state())


class TestDisassembly:
    def test_parts_point_back_to_source(self):
        model = SystemModel()
        add_part(model, "h1", {"a": 3.0})
        instance = _instance(model, "cut#1")
        parts = HolonStore(model).disassemble("h1", instance, [b"left", b"right"])

        assert [p.id for p in parts] == ["h1/cut#1/1", "h1/cut#1/2"]
        assert model.holons["h1"].retired
        for part, descriptor in zip(parts, [b"left", b"right"]):
            assert part.constituents[0].holon_id == "h1"
            assert part.physical.checksum == digest(descriptor)
            assert part.head.attributes["a"].value == 3.0
        assert validate(model) == []

    def test_empty_part_list(self):
        model = SystemModel()
        add_part(model, "h1")
        with pytest.raises(EmptyPartList):
            HolonStore(model).disassemble("h1", _instance(model), [])

    def test_disassemble_then_assemble_recovers_leaves(self):
        model = SystemModel()
        add_part(model, "h1")
        add_part(model, "h2")
        store = HolonStore(model)
        composite = store.assemble(["h1", "h2"], _instance(model, "asm#1"), _state())
        parts = store.disassemble(composite.id, _instance(model, "cut#1"), [b"x", b"y"])
        for part in parts:
            assert sorted(set(store.genealogy(part.id).leaves())) == ["h1", "h2"]


class TestStates:
    def test_append_state_records_producer(self):
        model = SystemModel()
        add_part(model, "h1", {"a": 1.0})
        HolonStore(model).append_state("h1", _state(a=2.0), "P#1")
        assert model.holons["h1"].head.produced_by == "P#1"

    def test_time_regression(self):
        model = SystemModel()
        add_part(model, "h1")
        with pytest.raises(TimeRegression):
            HolonStore(model).append_state("h1", _state(offset=-5), "P#1")

    def test_equal_timestamps_allowed(self):
        model = SystemModel()
        add_part(model, "h1")
        HolonStore(model).append_state("h1", _state(offset=0), "P#1")
        assert len(model.holons["h1"].states) == 2

    def test_duplicate_state_id(self):
        model = SystemModel()
        add_part(model, "h1")
        with pytest.raises(DuplicateId):
            HolonStore(model).append_state("h1", _state("s0"), "P#1")

    def test_retired_holon_takes_no_states(self):
        model = SystemModel()
        add_part(model, "h1")
        store = HolonStore(model)
        store.assemble(["h1"], _instance(model), _state())
        with pytest.raises(RetiredConstituent):
            store.append_state("h1", _state("s9"), "P#1")


class TestGenealogy:
    def test_nested_tree(self):
        model = SystemModel()
        for hid in ("a", "b", "c"):
            add_part(model, hid)
        store = HolonStore(model)
        inner = store.assemble(["a", "b"], _instance(model, "i#1"), _state())
        outer = store.assemble([inner.id, "c"], _instance(model, "i#2"), _state())
        tree = store.genealogy(outer.id)
        assert tree.depth() == 3
        assert tree.leaves() == ["a", "b", "c"]
        assert tree.children[0].instance_id == "i#2"
        assert store.ancestors(outer.id) == sorted(["a", "b", "c", inner.id, outer.id])

    def test_elementary_genealogy_is_itself(self):
        model = SystemModel()
        add_part(model, "h1")
        assert HolonStore(model).genealogy("h1").leaves() == ["h1"]


# Each op: (True, k) assembles the first k live holons, (False, n) splits the first live holon in n parts.
OPS = st.lists(st.tuples(st.booleans(), st.integers(min_value=1, max_value=3)), max_size=12)


@settings(max_examples=1000, deadline=None)
@given(n=st.integers(min_value=1, max_value=5), ops=OPS)
def test_leaf_multiset_is_conserved(n, ops):
    model = SystemModel()
    for i in range(n):
        add_part(model, f"e{i}")
    store = HolonStore(model)
    expected = sorted(f"e{i}" for i in range(n))

    for step, (assemble, k) in enumerate(ops):
        live = sorted(h.id for h in store.live())
        instance = _instance(model, f"op#{step}")
        if assemble:
            store.assemble(live[:k], instance, _state(f"s{step}", step + 1))
        else:
            store.disassemble(live[0], instance, [f"{step}/{j}".encode() for j in range(k)])

        leaves = []
        for holon in store.live():
            leaves.extend(store.genealogy(holon.id).leaves())
        # a split holon reaches its leaves once per part
        assert sorted(set(leaves)) == expected
        assert store.live_leaves() == expected
