import pytest

from core.engine.scenario import RunStatus, ScenarioRunner, select_scenario
from core.errors import CapabilityMissing, DomainFault, NotFound
from core.event_bus import EventBus, EventType
from core.model.types import SystemModel
from core.model.validation import validate
from core.persistence.model_io import load_model, serialize_model


class TestAssemblyLine:
    def test_line_commits_every_run(self, assembly_line_model):
        result = ScenarioRunner(assembly_line_model).run("line")
        assert result.ok
        assert [(o.run_id, o.status, o.instance_id) for o in result.outcomes] == [
            ("r1", RunStatus.COMMITTED, "turn#1"),
            ("r2", RunStatus.COMMITTED, "turn#2"),
            ("r3", RunStatus.COMMITTED, "join#1"),
            ("r4", RunStatus.COMMITTED, "inspect#1"),
            ("r5", RunStatus.COMMITTED, "rework#1"),
        ]
        holons = assembly_line_model.holons
        assert holons["join#1:asm"].properties["serial"].value == "SN-0001"
        assert holons["join#1:asm"].retired
        assert not holons["join#1:asm/rework#1/1"].retired
        assert validate(assembly_line_model) == []

    def test_scenario_clock_comes_from_document(self, assembly_line_model):
        ScenarioRunner(assembly_line_model).run("line")
        first = assembly_line_model.instances["turn#1"]
        assert first.start.isoformat() == "2000-01-01T08:00:00+00:00"
        assert (first.end - first.start).total_seconds() == 60
        assert assembly_line_model.holons["part-a"].states[1].attributes["diameter"].value == 50.0

    def test_fault_directive_rolls_back(self, assembly_line_model):
        before = serialize_model(assembly_line_model)
        result = ScenarioRunner(assembly_line_model).run("line-fault")
        assert not result.ok
        assert result.failure.status == RunStatus.ROLLED_BACK
        assert isinstance(result.failure.error, DomainFault)
        assert serialize_model(assembly_line_model) == before

    def test_missing_resource_is_rejected(self, assembly_line_model):
        result = ScenarioRunner(assembly_line_model).run("line-unstaffed")
        assert result.failure.status == RunStatus.REJECTED
        assert isinstance(result.failure.error, CapabilityMissing)
        assert "inspection" in result.failure.message

    def test_fault_override_hits_first_run_only(self, assembly_line_model):
        result = ScenarioRunner(assembly_line_model).run("line", fault="pre-info")
        assert len(result.outcomes) == 1
        assert result.outcomes[0].status == RunStatus.ROLLED_BACK
        assert assembly_line_model.instances == {}

    def test_runner_stops_at_first_failure(self, assembly_line_model):
        assembly_line_model.scenarios["line"].runs[1].resources = []
        result = ScenarioRunner(assembly_line_model).run("line")
        assert [o.status for o in result.outcomes] == [RunStatus.COMMITTED, RunStatus.REJECTED]
        assert list(assembly_line_model.instances) == ["turn#1"]

    def test_external_subscribers_see_events(self, assembly_line_model):
        bus = EventBus()
        committed = []
        bus.subscribe(EventType.RUN_COMMITTED, lambda e: committed.append(e.payload.id))
        ScenarioRunner(assembly_line_model, event_bus=bus).run("line")
        assert committed == ["turn#1", "turn#2", "join#1", "inspect#1", "rework#1"]


class TestRunLog:
    def test_log_text(self, assembly_line_model):
        log = ScenarioRunner(assembly_line_model).run("line").log
        assert "SCENARIO: line" in log
        assert "CLOCK: 2000-01-01T08:00:00.000Z step 60000 ms" in log
        assert "COMMITTED turn#1 (run r1)" in log
        assert "Committed: 5" in log
        assert "Reason: completed" in log

    def test_rolled_back_entry(self, assembly_line_model):
        log = ScenarioRunner(assembly_line_model).run("line-fault").log
        assert "ROLLED BACK turn (run r1)" in log
        assert "Point: post-info-pre-physical" in log
        assert "Reason: stopped at run r1" in log

    def test_log_file_matches_memory(self, assembly_line_model, tmp_path):
        path = tmp_path / "logs" / "run.log"
        result = ScenarioRunner(assembly_line_model, log_file=path).run("line")
        assert path.read_text(encoding="utf-8") == result.log

    def test_runs_are_deterministic(self, assembly_line_path):
        first, second = load_model(assembly_line_path), load_model(assembly_line_path)
        log_a = ScenarioRunner(first).run("line").log
        log_b = ScenarioRunner(second).run("line").log
        assert log_a == log_b
        assert serialize_model(first) == serialize_model(second)


def test_default_scenario_is_smallest_id(assembly_line_model):
    assert select_scenario(assembly_line_model).id == "line"
    assert select_scenario(assembly_line_model, "line-fault").id == "line-fault"


def test_missing_scenarios():
    with pytest.raises(NotFound):
        select_scenario(SystemModel())
    with pytest.raises(NotFound):
        ScenarioRunner(SystemModel()).run("nope")


def test_single_process_example(single_process_model):
    result = ScenarioRunner(single_process_model).run()
    assert result.ok
    head = single_process_model.holons["part-1"].head
    assert head.attributes["diameter"].value == 38.5
    assert head.attributes["machined-at"].value == single_process_model.instances["turning#1"].end
