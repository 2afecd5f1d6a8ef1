import itertools

import pytest

from core.analysis.lcim import LEVEL_NAMES, classify_lcim, classify_system_lcim
from core.errors import UnknownProcess
from core.model.types import LcimMetadata, SystemModel
from tests.factories import add_process, part_item, with_part_type


def _model(interface: bool, bound: bool, behavior: bool, links: bool) -> SystemModel:
    model = with_part_type(SystemModel(), ["a", "b"])
    model.reference_registry.update({"iso:a", "iso:b"})
    model.behaviors["bm"] = None
    process = add_process(model, "p", consumes=["a"] if interface else [], produces=["b"] if interface else [])
    meta = LcimMetadata()
    if bound and interface:
        meta.reference_bindings = {part_item("a"): "iso:a", part_item("b"): "iso:b"}
    if behavior:
        meta.behavior_model = "bm"
    if links:
        meta.conceptual_links = {(part_item("a"), part_item("b"))}
    process.lcim_meta = meta
    return model


def _expected(flags) -> int:
    level = 0
    for holds in flags:
        if not holds:
            break
        level += 1
    return level


@pytest.mark.parametrize("flags", list(itertools.product([False, True], repeat=4)))
def test_level_is_highest_unbroken_rung(flags):
    interface, bound, behavior, links = flags
    result = classify_lcim(_model(*flags), "p")
    # an empty interface is vacuously bound but stops the ladder at 0
    assert result.level == _expected((interface, bound, behavior, links))
    assert len(result.justification) == result.level
    assert result.name == LEVEL_NAMES[result.level]


def test_adding_metadata_never_lowers_level():
    previous = -1
    for rungs in range(5):
        flags = [i < rungs for i in range(4)]
        level = classify_lcim(_model(*flags), "p").level
        assert level >= previous
        previous = level
    assert previous == 4


def test_binding_to_unregistered_term_fails_rung_two():
    model = _model(True, True, True, True)
    model.reference_registry.discard("iso:b")
    assert classify_lcim(model, "p").level == 1


def test_undeclared_behavior_fails_rung_three():
    model = _model(True, True, True, True)
    model.behaviors.clear()
    assert classify_lcim(model, "p").level == 2


def test_link_to_undeclared_item_fails_rung_four():
    model = _model(True, True, True, False)
    model.processes["p"].lcim_meta.conceptual_links = {(part_item("a"), part_item("zzz"))}
    assert classify_lcim(model, "p").level == 3


def test_assembly_line_levels(assembly_line_model):
    levels = {pid: classify_lcim(assembly_line_model, pid).level for pid in assembly_line_model.processes}
    assert levels == {"inspect": 1, "join": 4, "rework": 3, "turn": 2}
    assert classify_system_lcim(assembly_line_model) == 1


def test_system_level_is_minimum():
    model = _model(True, True, True, True)
    assert classify_system_lcim(model) == 4
    add_process(model, "bare")
    assert classify_system_lcim(model) == 0


def test_empty_model_is_level_zero():
    assert classify_system_lcim(SystemModel()) == 0


def test_unknown_process():
    with pytest.raises(UnknownProcess):
        classify_lcim(SystemModel(), "nope")
