"""
Scenario runner: plays the run directives of a <scenario> section through
the executor, in document order, stopping at the first failed run.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional

from core.engine.executor import DEFAULT_CLOCK_START, FaultPlan, ProcessExecutor, SimulatedClock
from core.engine.run_logger import RunLogger
from core.errors import DomainFault, HolxError, NotFound
from core.event_bus import EventBus
from core.model.types import Scenario, SystemModel

logger = logging.getLogger("executor")


class RunStatus(str, Enum):
    COMMITTED = "committed"
    ROLLED_BACK = "rolled-back"
    REJECTED = "rejected"


@dataclass
class RunOutcome:
    run_id: str
    process: str
    status: RunStatus
    instance_id: Optional[str] = None
    message: str = ""
    error: Optional[HolxError] = field(default=None, compare=False, repr=False)


@dataclass
class ScenarioResult:
    scenario_id: str
    outcomes: List[RunOutcome] = field(default_factory=list)
    log: str = ""

    @property
    def ok(self) -> bool:
        return all(o.status == RunStatus.COMMITTED for o in self.outcomes)

    @property
    def failure(self) -> Optional[RunOutcome]:
        return next((o for o in self.outcomes if o.status != RunStatus.COMMITTED), None)


def select_scenario(model: SystemModel, scenario_id: Optional[str] = None) -> Scenario:
    if scenario_id is not None:
        scenario = model.scenarios.get(scenario_id)
        if scenario is None:
            raise NotFound("scenario", scenario_id)
        return scenario
    if not model.scenarios:
        raise NotFound("scenario", "(any)")
    return model.scenarios[min(model.scenarios)]


class ScenarioRunner:
    """
    Owns one executor, event bus and run log for a model. `fault` overrides
    the fault plan of the first run directive only.
    """

    def __init__(self, model: SystemModel, clock_step_ms: int = 1000,
                 log_file: Optional[Path] = None, event_bus: Optional[EventBus] = None):
        self.model = model
        self.clock_step_ms = clock_step_ms
        self.log_file = log_file
        self.event_bus = event_bus or EventBus()

    def run(self, scenario_id: Optional[str] = None, fault: Optional[str] = None) -> ScenarioResult:
        scenario = select_scenario(self.model, scenario_id)
        step = scenario.step_ms or self.clock_step_ms
        start = scenario.clock_start or DEFAULT_CLOCK_START
        clock = SimulatedClock(start, step)

        bus = EventBus()
        for event_type, callbacks in self.event_bus.subscribers.items():
            for callback in callbacks:
                bus.subscribe(event_type, callback)
        run_log = RunLogger(self.model, clock, self.log_file)
        run_log.attach(bus)
        executor = ProcessExecutor(self.model, bus, clock)

        result = ScenarioResult(scenario.id)
        run_log.start_scenario(scenario.id, clock.peek(), step)
        logger.info(f"[SCENARIO] {scenario.id}: {len(scenario.runs)} runs")
        for index, run in enumerate(scenario.runs):
            plan = FaultPlan(fault if index == 0 and fault is not None else run.fault)
            run_log.current_run = run.id
            try:
                instance = executor.run_instance(run.process, run.inputs, run.resources,
                                                 fault=plan, values=run.values, parts=run.parts)
            except DomainFault as e:
                result.outcomes.append(RunOutcome(run.id, run.process, RunStatus.ROLLED_BACK, message=str(e), error=e))
                break
            except HolxError as e:
                result.outcomes.append(RunOutcome(run.id, run.process, RunStatus.REJECTED, message=str(e), error=e))
                break
            result.outcomes.append(RunOutcome(run.id, run.process, RunStatus.COMMITTED, instance.id))

        run_log.current_run = None
        failure = result.failure
        run_log.end_scenario("completed" if failure is None else f"stopped at run {failure.run_id}")
        result.log = run_log.text()
        return result
