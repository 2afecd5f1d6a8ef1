from datetime import timedelta

import pytest

from core.model.holons import HolonStore
from core.model.types import (
    EXTERNAL,
    Attribute,
    AttributeClass,
    Constituent,
    HolonKind,
    HolonState,
    HolonType,
    ProcessInstance,
    Property,
    RunDirective,
    Scenario,
    StateRef,
    SystemModel,
)
from core.model.validation import reference_violations, validate
from tests.factories import T0, add_flow, add_part, add_process, chain_model, part_item


def codes(model):
    return [v.code for v in validate(model)]


def test_valid_chain_has_no_violations():
    assert validate(chain_model()) == []


def test_empty_model_is_valid():
    assert validate(SystemModel()) == []


def test_elementary_with_constituents():
    model = chain_model()
    add_process(model, "asm")
    model.instances["asm#1"] = ProcessInstance.timed("asm#1", "asm", 1, T0, T0)
    model.holons["h1"].constituents.append(Constituent("h2", "asm#1"))
    assert "E-H-001" in codes(model)


def test_composite_without_constituents():
    model = chain_model()
    model.holons["h1"].kind = HolonKind.COMPOSITE
    assert codes(model) == ["E-H-003"]


def test_genealogy_cycle():
    model = chain_model()
    add_process(model, "asm")
    model.instances["asm#1"] = ProcessInstance.timed("asm#1", "asm", 1, T0, T0)
    for a, b in (("h1", "h2"), ("h2", "h1")):
        model.holons[a].kind = HolonKind.COMPOSITE
        model.holons[a].constituents.append(Constituent(b, "asm#1"))
    found = validate(model)
    assert [v.code for v in found] == ["E-H-002"]
    assert "h1, h2" in found[0].message


def test_out_of_sync_checksum():
    model = chain_model()
    model.ledger.tamper("ledger:h1", b"swapped")
    assert codes(model) == ["E-H-004"]
    assert not HolonStore(model).in_sync("h1")


def test_dangling_references_are_e_m_001():
    model = chain_model()
    add_flow(model, "f9", "P2", "ghost")
    found = validate(model)
    assert [v.code for v in found] == ["E-M-001"]
    assert reference_violations(found) == found


def test_state_time_regression():
    model = chain_model()
    model.holons["h1"].states.append(HolonState("s1", T0 - timedelta(hours=1)))
    assert codes(model) == ["E-S-001"]


def test_time_class_attribute_must_be_temporal():
    model = chain_model()
    model.holons["h1"].states[0].attributes["t"] = Attribute("t", AttributeClass.TIME, 3)
    assert codes(model) == ["E-S-002"]


def test_unresolvable_item():
    model = chain_model()
    model.processes["P2"].produces.add(part_item("nope"))
    assert codes(model) == ["E-P-001"]


def test_duplicate_state_id():
    model = chain_model()
    model.holons["h1"].states.append(HolonState("s0", T0))
    assert codes(model) == ["E-R-001"]


def test_external_to_external_flow():
    model = chain_model()
    add_flow(model, "f9", EXTERNAL, EXTERNAL)
    assert codes(model) == ["E-F-001"]


def test_instance_timing():
    model = chain_model()
    model.instances["P2#1"] = ProcessInstance("P2#1", "P2", 1, T0, T0 - timedelta(seconds=1),
                                              timedelta(0))
    assert codes(model) == ["E-I-001"]


def test_instance_missing_capability():
    model = chain_model()
    model.instances["P1#1"] = ProcessInstance.timed("P1#1", "P1", 1, T0, T0)
    assert codes(model) == ["E-I-002"]
    model.instances["P1#1"].used.add("saw")
    assert validate(model) == []


def test_instance_state_reference_must_exist():
    model = chain_model()
    model.instances["P2#1"] = ProcessInstance.timed("P2#1", "P2", 1, T0, T0,
                                                    inputs=[StateRef("h1", "missing")])
    assert codes(model) == ["E-M-001"]


def test_violations_sorted_and_unique():
    model = chain_model()
    model.holons["h1"].kind = HolonKind.COMPOSITE
    model.processes["P2"].produces.add(part_item("nope"))
    add_flow(model, "f9", EXTERNAL, EXTERNAL)
    found = validate(model)
    assert found == sorted(set(found))
    assert [v.code for v in found] == ["E-F-001", "E-H-003", "E-P-001"]


def test_validate_does_not_mutate():
    model = chain_model()
    add_part(model, "h3")
    before = repr(model)
    validate(model)
    assert repr(model) == before


def test_item_names_may_not_contain_colons():
    model = chain_model()
    model.holon_types["Part"].attributes["rev:2"] = AttributeClass.SHAPE
    model.holon_types["Part:v2"] = HolonType("Part:v2", properties={"grade"})
    assert codes(model) == ["E-P-002"]
    assert validate(model)[0].subject == "Part"


@pytest.mark.parametrize("value", [float("nan"), float("inf"), float("-inf")])
def test_non_finite_attribute(value):
    model = chain_model()
    model.holons["h1"].head.attributes["a"] = Attribute("a", AttributeClass.SHAPE, value)
    assert codes(model) == ["E-V-001"]


def test_non_finite_property_and_run_value():
    model = chain_model()
    model.holons["h2"].properties["grade"] = Property("grade", float("inf"))
    model.holon_types["Part"].properties.add("grade")
    model.scenarios["s"] = Scenario("s", [RunDirective("r1", "P1", ["h1"], ["saw"],
                                                       values={part_item("b"): float("nan")})])
    assert codes(model) == ["E-V-001", "E-V-001"]
