"""
Process Executor

Runs process instances over holons. Each run couples an informational
sub-process (new holon states, produced values) with a physical sub-process
(ledger rewrite) and commits both or neither:

    1. reject early: unknown process, missing capability, absent consumed item
    2. stage deep copies of holons, ledger and instance store
    3. informational sub-process on the stage      -> fault point pre-info before it
    4. physical sub-process on the stage           -> post-info-pre-physical before it
    5. swap the three roots into the model         -> post-physical-pre-commit before it

Any failure after step 2 discards the stage, so the committed store is
untouched. Ledger merge/split for assembly and disassembly happens in step 4,
so a run that stops before it leaves the ledger as it was. Runs are serialized
by one re-entrant lock per SystemModel, shared by every executor and helper
working on that model (single writer).
"""

import copy
import logging
import threading
import weakref
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from typing import Callable, Dict, List, Mapping, Optional, Sequence

from core.errors import (
    CapabilityMissing,
    ConsumedItemAbsent,
    DomainFault,
    DuplicateId,
    EmptyConstituentList,
    EmptyPartList,
    HolxError,
    InvalidState,
    NotFound,
    UnknownProcess,
)
from core.event_bus import Event, EventBus, EventType
from core.model.holons import HolonStore
from core.model.ledger import chain_descriptor
from core.model.types import (
    Attribute,
    AttributeClass,
    Holon,
    HolonState,
    ItemKind,
    ItemRef,
    Operation,
    Process,
    ProcessInstance,
    Property,
    StateRef,
    SystemModel,
)
from core.model.values import Scalar, utc_ms

logger = logging.getLogger("executor")

COMMIT_POINTS = ("pre-info", "post-info-pre-physical", "post-physical-pre-commit")
DEFAULT_CLOCK_START = datetime(2000, 1, 1, tzinfo=timezone.utc)

Clock = Callable[[], datetime]


@dataclass(frozen=True)
class FaultPlan:
    fail_at: Optional[str] = None

    def __post_init__(self):
        if self.fail_at is not None and self.fail_at not in COMMIT_POINTS:
            raise ValueError(f"unknown commit point '{self.fail_at}'")

    def check(self, point: str, process_id: str):
        if self.fail_at == point:
            raise DomainFault(process_id, point, "injected fault")


NO_FAULT = FaultPlan()


# ============================================================================
# ONE WRITER PER MODEL STORE
# ============================================================================

_model_locks: Dict[int, threading.RLock] = {}
_model_locks_guard = threading.Lock()


def model_lock(model: SystemModel) -> threading.RLock:
    """The lock every run and query on `model` goes through, created on first use."""
    key = id(model)
    with _model_locks_guard:
        lock = _model_locks.get(key)
        if lock is None:
            lock = _model_locks[key] = threading.RLock()
            weakref.finalize(model, _model_locks.pop, key, None)
        return lock


class SimulatedClock:
    """Deterministic clock: start, start + step, start + 2*step, ..."""

    def __init__(self, start: Optional[datetime] = None, step_ms: int = 1000):
        if step_ms < 1:
            raise ValueError("clock step must be at least 1 ms")
        self.step = timedelta(milliseconds=step_ms)
        self._next = utc_ms(start or DEFAULT_CLOCK_START)

    def peek(self) -> datetime:
        return self._next

    def __call__(self) -> datetime:
        value = self._next
        self._next = value + self.step
        return value


@dataclass
class TraceEntry:
    instance: ProcessInstance
    holon_id: str
    state_id: str


def holon_matches(holon: Holon, ref: ItemRef) -> bool:
    """Untyped holons match any item by name."""
    return holon.holon_type is None or holon.holon_type == ref.holon_type


def holon_has_item(holon: Holon, ref: ItemRef) -> bool:
    if not holon_matches(holon, ref):
        return False
    if ref.item_kind == ItemKind.PROPERTY:
        return ref.item in holon.properties
    return holon.head is not None and ref.item in holon.head.attributes


class ProcessExecutor:
    def __init__(self, model: SystemModel, event_bus: Optional[EventBus] = None,
                 clock: Optional[Clock] = None):
        self.model = model
        self.event_bus = event_bus
        self.clock: Clock = clock or SimulatedClock()
        self._lock = model_lock(model)

    def _publish(self, event_type: EventType, payload):
        if self.event_bus is not None:
            self.event_bus.publish(Event(event_type, payload))

    # ------------------------------------------------------------------
    # Run
    # ------------------------------------------------------------------
    def run_instance(self, process_id: str, input_holons: Sequence[str] = (),
                     resources: Sequence[str] = (), clock: Optional[Clock] = None,
                     fault: Optional[FaultPlan] = None,
                     values: Optional[Mapping[ItemRef, Scalar]] = None,
                     parts: Optional[int] = None) -> ProcessInstance:
        with self._lock:
            process = self.model.processes.get(process_id)
            if process is None:
                raise UnknownProcess(process_id)
            self._publish(EventType.RUN_STARTED, {"process": process_id, "inputs": list(input_holons)})
            try:
                self._admit(process, input_holons, resources, parts)
            except HolxError as e:
                logger.warning(f"[REJECT] {process_id}: {e}")
                self._publish(EventType.RUN_REJECTED, {"process": process_id, "error": e})
                raise

            try:
                instance = self._stage_and_commit(process, list(input_holons), list(resources),
                                                  clock or self.clock, fault or NO_FAULT,
                                                  dict(values or {}), parts)
            except HolxError as e:
                rolled_back = isinstance(e, DomainFault)
                tag = "[ROLLBACK]" if rolled_back else "[REJECT]"
                logger.warning(f"{tag} {process_id}: {e}")
                self._publish(EventType.RUN_ROLLED_BACK if rolled_back else EventType.RUN_REJECTED,
                              {"process": process_id, "error": e})
                raise

            logger.info(f"[COMMIT] {instance.id} outputs={[r.holon_id for r in instance.outputs]}")
            self._publish(EventType.RUN_COMMITTED, instance)
            return instance

    def _admit(self, process: Process, input_holons: Sequence[str], resources: Sequence[str],
               parts: Optional[int]):
        provided = set()
        for rid in resources:
            resource = self.model.resources.get(rid)
            if resource is None:
                raise NotFound("resource", rid)
            provided |= resource.provides
        missing = sorted(process.requires - provided)
        if missing:
            raise CapabilityMissing(process.id, missing[0])

        store = HolonStore(self.model)
        holons = [store._live(hid) for hid in input_holons]
        if len(set(input_holons)) != len(input_holons):
            raise DuplicateId("input holon", next(h for h in input_holons if input_holons.count(h) > 1))
        if process.operation != Operation.TRANSFORM and not process.physical:
            raise InvalidState(f"{process.operation.value} process '{process.id}' needs a physical sub-process")
        if process.operation == Operation.ASSEMBLE and not holons:
            raise EmptyConstituentList()
        if process.operation == Operation.DISASSEMBLE:
            if len(holons) != 1:
                raise InvalidState(f"disassembly of '{process.id}' takes exactly one input holon")
            if parts is not None and parts < 1:
                raise EmptyPartList()

        for ref in sorted(process.consumes):
            if ref in process.produces:
                continue
            if not any(holon_has_item(h, ref) for h in holons):
                raise ConsumedItemAbsent(process.id, ref.token)

    def _stage_and_commit(self, process: Process, input_ids: List[str], resources: List[str],
                          clock: Clock, fault: FaultPlan, values: Dict[ItemRef, Scalar],
                          parts: Optional[int]) -> ProcessInstance:
        occurrence = len(self.model.instances_of(process.id)) + 1
        instance_id = f"{process.id}#{occurrence}"
        if instance_id in self.model.instances:
            raise DuplicateId("process instance", instance_id)
        start = clock()
        end = clock()

        staged = replace(
            self.model,
            holons=copy.deepcopy(self.model.holons),
            ledger=copy.deepcopy(self.model.ledger),
            instances=copy.deepcopy(self.model.instances),
        )
        store = HolonStore(staged)

        fault.check("pre-info", process.id)
        instance = ProcessInstance.timed(instance_id, process.id, occurrence, start, end,
                                         used=set(resources))
        for hid in input_ids:
            head = staged.holons[hid].head
            if head is not None:
                instance.inputs.append(StateRef(hid, head.state_id))
        staged.instances[instance_id] = instance
        outputs = self._informational(store, process, instance, input_ids, values, parts)
        instance.outputs = [StateRef(h.id, h.head.state_id) for h in outputs]

        fault.check("post-info-pre-physical", process.id)
        if process.physical:
            self._physical(store, process, instance, input_ids, outputs)

        fault.check("post-physical-pre-commit", process.id)
        self.model.holons = staged.holons
        self.model.ledger = staged.ledger
        self.model.instances = staged.instances
        return instance

    # ------------------------------------------------------------------
    # Sub-processes (stage only)
    # ------------------------------------------------------------------
    def _produced_attributes(self, model: SystemModel, process: Process, holon_type: Optional[str],
                             previous: Dict[str, Attribute], instance: ProcessInstance,
                             values: Dict[ItemRef, Scalar]) -> Dict[str, Attribute]:
        attributes = dict(previous)
        for ref in sorted(process.produces):
            if ref.item_kind != ItemKind.ATTRIBUTE:
                continue
            if holon_type is not None and holon_type != ref.holon_type:
                continue
            declared = model.holon_types.get(ref.holon_type)
            attr_class = declared.attributes.get(ref.item, AttributeClass.SHAPE) if declared else AttributeClass.SHAPE
            old = previous.get(ref.item)
            if ref in values:
                value = values[ref]
            elif attr_class == AttributeClass.TIME:
                value = instance.end
            elif old is not None:
                value = old.value
            else:
                value = instance.id
            attributes[ref.item] = Attribute(ref.item, attr_class, value, old.unit if old else None)
        return attributes

    def _produce_properties(self, holon: Holon, process: Process, instance: ProcessInstance,
                            values: Dict[ItemRef, Scalar]):
        for ref in sorted(process.produces):
            if ref.item_kind != ItemKind.PROPERTY or not holon_matches(holon, ref):
                continue
            old = holon.properties.get(ref.item)
            value = values.get(ref, old.value if old else instance.id)
            holon.properties[ref.item] = Property(ref.item, value)

    def _new_state(self, model: SystemModel, process: Process, holon_type: Optional[str],
                   previous: Dict[str, Attribute], instance: ProcessInstance,
                   values: Dict[ItemRef, Scalar]) -> HolonState:
        attributes = self._produced_attributes(model, process, holon_type, previous, instance, values)
        return HolonState(instance.id, instance.end, attributes, produced_by=instance.id)

    def _informational(self, store: HolonStore, process: Process, instance: ProcessInstance,
                       input_ids: List[str], values: Dict[ItemRef, Scalar],
                       parts: Optional[int]) -> List[Holon]:
        staged = store.model
        if process.operation == Operation.ASSEMBLE:
            types = {ref.holon_type for ref in process.produces}
            holon_type = types.pop() if len(types) == 1 else None
            state = self._new_state(staged, process, holon_type, {}, instance, values)
            composite = store.assemble(input_ids, instance, state, holon_type=holon_type,
                                       link_physical=False)
            self._produce_properties(composite, process, instance, values)
            return [composite]

        if process.operation == Operation.DISASSEMBLE:
            # placeholders; _physical derives the real descriptors from the ledger
            pieces = store.disassemble(input_ids[0], instance, [b""] * (parts or 2), link_physical=False)
            for piece in pieces:
                first = piece.states[0]
                state = self._new_state(staged, process, piece.holon_type, first.attributes, instance, values)
                piece.states[0] = replace(state, at=first.at)
                self._produce_properties(piece, process, instance, values)
            return pieces

        outputs = []
        for hid in input_ids:
            holon = store.get(hid)
            previous = holon.head.attributes if holon.head else {}
            state = self._new_state(staged, process, holon.holon_type, previous, instance, values)
            store.append_state(hid, state, instance.id)
            self._produce_properties(holon, process, instance, values)
            outputs.append(holon)
        return outputs

    def _physical(self, store: HolonStore, process: Process, instance: ProcessInstance,
                  input_ids: List[str], outputs: List[Holon]):
        for hid in input_ids:
            if not store.in_sync(hid):
                raise DomainFault(process.id, None, f"holon '{hid}' is out of sync with the ledger")
        if process.operation == Operation.DISASSEMBLE:
            source = store.get(input_ids[0])
            descriptor = store.model.ledger.get(source.physical.ledger_entry).descriptor
            store.split_physical(source.id, [
                (piece.id, chain_descriptor(descriptor, f"{process.id}/{k}", instance.occurrence))
                for k, piece in enumerate(outputs, start=1)
            ])
            return
        if process.operation == Operation.ASSEMBLE:
            for holon in outputs:
                store.merge_physical(holon.id)
        for holon in outputs:
            store.rewrite_physical(holon.id, process.id, instance.occurrence)

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------
    def sync_check(self, holon_id: str) -> bool:
        with self._lock:
            return HolonStore(self.model).in_sync(holon_id)

    def trace(self, holon_id: str) -> List[TraceEntry]:
        with self._lock:
            store = HolonStore(self.model)
            store.get(holon_id)
            entries = []
            for hid in store.ancestors(holon_id):
                for state in self.model.holons[hid].states:
                    instance = self.model.instances.get(state.produced_by) if state.produced_by else None
                    if instance is not None:
                        entries.append(TraceEntry(instance, hid, state.state_id))
            entries.sort(key=lambda e: (e.instance.start, e.instance.id, e.holon_id))
            return entries


def run_instance(model: SystemModel, process_id: str, input_holons: Sequence[str] = (),
                 resources: Sequence[str] = (), clock: Optional[Clock] = None,
                 fault: Optional[FaultPlan] = None, **kwargs) -> ProcessInstance:
    return ProcessExecutor(model).run_instance(process_id, input_holons, resources,
                                               clock=clock, fault=fault, **kwargs)


def sync_check(model: SystemModel, holon_id: str) -> bool:
    with model_lock(model):
        return HolonStore(model).in_sync(holon_id)


def trace(model: SystemModel, holon_id: str) -> List[TraceEntry]:
    return ProcessExecutor(model).trace(holon_id)
