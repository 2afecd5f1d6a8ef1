"""
Run Logger for scenario simulations

Keeps a human-readable log of every run in a scenario: which process
instance committed, which run was rolled back and at which commit point,
which run was rejected before staging. Timestamps come from the simulation
clock so the same scenario always produces the same log.

The log is kept in memory (`lines`) and, when a path is given, also
written to a text file.
"""

from pathlib import Path
from typing import Callable, List, Optional

from core.errors import DomainFault
from core.event_bus import Event, EventBus, EventType
from core.model.types import SystemModel
from core.model.values import format_timestamp

RULE = "====================================="


class RunLogger:
    def __init__(self, model: SystemModel, clock: Callable, log_file: Optional[Path] = None):
        self.model = model
        self.clock = clock
        self.log_file = Path(log_file) if log_file else None
        self.lines: List[str] = []
        self.current_run: Optional[str] = None
        self.committed = 0
        self.rolled_back = 0
        self.rejected = 0
        if self.log_file is not None:
            self.log_file.parent.mkdir(parents=True, exist_ok=True)
            self.log_file.write_text("", encoding="utf-8")

    def attach(self, bus: EventBus):
        bus.subscribe(EventType.RUN_COMMITTED, self.on_committed)
        bus.subscribe(EventType.RUN_ROLLED_BACK, self.on_rolled_back)
        bus.subscribe(EventType.RUN_REJECTED, self.on_rejected)

    def _write(self, text: str):
        self.lines.extend(text.splitlines())
        if self.log_file is not None:
            with open(self.log_file, "a", encoding="utf-8") as f:
                f.write(text)

    def _timestamp(self) -> str:
        peek = getattr(self.clock, "peek", None)
        return format_timestamp(peek()) if peek else "-"

    def _run_label(self) -> str:
        return f" (run {self.current_run})" if self.current_run else ""

    def start_scenario(self, scenario_id: str, clock_start, step_ms: int):
        self._write(f"""{RULE}
SCENARIO: {scenario_id}
CLOCK: {format_timestamp(clock_start)} step {step_ms} ms
{RULE}

""")

    def on_committed(self, event: Event):
        instance = event.payload
        self.committed += 1
        checksums = ", ".join(
            f"{ref.holon_id}={self.model.holons[ref.holon_id].physical.checksum}"
            for ref in instance.outputs if ref.holon_id in self.model.holons
        )
        self._write(f"""[{format_timestamp(instance.end)}] COMMITTED {instance.id}{self._run_label()}
  Inputs: {', '.join(f'{r.holon_id}/{r.state_id}' for r in instance.inputs) or '-'}
  Outputs: {', '.join(f'{r.holon_id}/{r.state_id}' for r in instance.outputs) or '-'}
  Resources: {', '.join(sorted(instance.used)) or '-'}
  Checksums: {checksums or '-'}

""")

    def on_rolled_back(self, event: Event):
        error = event.payload["error"]
        self.rolled_back += 1
        point = error.point if isinstance(error, DomainFault) and error.point else "physical sub-process"
        reason = error.reason if isinstance(error, DomainFault) else str(error)
        self._write(f"""[{self._timestamp()}] ROLLED BACK {event.payload['process']}{self._run_label()}
  Point: {point}
  Reason: {reason}

""")

    def on_rejected(self, event: Event):
        self.rejected += 1
        self._write(f"[{self._timestamp()}] REJECTED {event.payload['process']}{self._run_label()}\n"
                    f"  Reason: {event.payload['error']}\n\n")

    def end_scenario(self, reason: str = "completed"):
        self._write(f"""[{self._timestamp()}] SCENARIO ENDED
  Reason: {reason}
  Committed: {self.committed}
  Rolled back: {self.rolled_back}
  Rejected: {self.rejected}
{RULE}
""")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"
