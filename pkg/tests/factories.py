"""Small model builders shared by the test modules."""

from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from core.model.holons import HolonStore
from core.model.types import (
    EXTERNAL,
    Attribute,
    AttributeClass,
    EnterpriseLevel,
    Flow,
    FlowKind,
    HolonState,
    HolonType,
    ItemRef,
    Operation,
    Process,
    Resource,
    ResourceKind,
    SystemModel,
)

T0 = datetime(2000, 1, 1, 8, 0, tzinfo=timezone.utc)
PART = "Part"


def ref(token: str) -> ItemRef:
    return ItemRef.from_token(token)


def part_item(name: str) -> ItemRef:
    return ref(f"{PART}:attribute:{name}")


def with_part_type(model: SystemModel, names: Iterable[str], time_names: Iterable[str] = ()) -> SystemModel:
    holon_type = model.holon_types.setdefault(PART, HolonType(PART))
    for name in names:
        holon_type.attributes[name] = AttributeClass.SHAPE
    for name in time_names:
        holon_type.attributes[name] = AttributeClass.TIME
    return model


def add_process(model: SystemModel, pid: str, consumes: Sequence[str] = (), produces: Sequence[str] = (),
                level: EnterpriseLevel = EnterpriseLevel.L1, requires: Sequence[str] = (),
                operation: Operation = Operation.TRANSFORM) -> Process:
    process = Process(pid, pid.title(), level,
                      consumes={part_item(n) for n in consumes},
                      produces={part_item(n) for n in produces},
                      requires=set(requires), operation=operation)
    model.processes[pid] = process
    return process


def add_flow(model: SystemModel, fid: str, source: str, target: str, declared: Sequence[str] = ()) -> Flow:
    flow = Flow(fid, source, target, FlowKind.MATERIAL, declared_items={part_item(n) for n in declared})
    model.flows[fid] = flow
    return flow


def add_resource(model: SystemModel, rid: str, *capabilities: str) -> Resource:
    resource = Resource(rid, ResourceKind.MATERIAL, set(capabilities))
    model.resources[rid] = resource
    return resource


def add_part(model: SystemModel, hid: str, values: Optional[Dict[str, float]] = None,
             descriptor: Optional[bytes] = None):
    model.holon_types.setdefault(PART, HolonType(PART))
    state = HolonState.of("s0", T0, [Attribute(n, AttributeClass.SHAPE, v) for n, v in (values or {}).items()])
    return HolonStore(model).new_elementary(hid, {}, state, descriptor or hid.encode("utf-8"),
                                            holon_type=PART)


def chain_model() -> SystemModel:
    """EXTERNAL -> P1 -> P2 over Part items a, b, t (t is a time attribute)."""
    model = with_part_type(SystemModel(), ["a", "b"], ["t"])
    add_process(model, "P1", consumes=["a"], produces=["b"], requires=["cut"])
    add_process(model, "P2", consumes=["b"], produces=["t"])
    add_flow(model, "f0", EXTERNAL, "P1", declared=["a"])
    add_flow(model, "f1", "P1", "P2")
    add_flow(model, "f2", "P2", EXTERNAL)
    add_resource(model, "saw", "cut")
    add_part(model, "h1", {"a": 1.0})
    add_part(model, "h2", {"a": 2.0})
    return model


def topology_model(n: int, edges: List[Tuple[int, int]], fed: Iterable[int] = ()) -> SystemModel:
    """Processes p0..p{n-1} with flows along `edges`; item-free."""
    model = SystemModel()
    for i in range(n):
        add_process(model, f"p{i}")
    for k, (a, b) in enumerate(edges):
        add_flow(model, f"f{k:02d}", f"p{a}", f"p{b}")
    for i in sorted(set(fed)):
        add_flow(model, f"x{i:02d}", EXTERNAL, f"p{i}")
    return model
