"""
Holonic meta-model.

A Holon aggregates an informational part (properties + observed state
history) and a physical part (a reference into the PhysicalLedger).
Processes consume and produce holon attributes/properties, flows connect
processes, and process instances record each execution.
"""

from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Dict, Iterable, List, NamedTuple, Optional, Set, Tuple

from core.errors import InvalidState
from core.model.ledger import PhysicalLedger
from core.model.values import Scalar

EXTERNAL = "@external"


class AttributeClass(str, Enum):
    SPACE = "space"
    SHAPE = "shape"
    TIME = "time"


class HolonKind(str, Enum):
    ELEMENTARY = "elementary"
    COMPOSITE = "composite"


class ResourceKind(str, Enum):
    MATERIAL = "material"
    SOFTWARE = "software"
    HUMAN = "human"


class ItemKind(str, Enum):
    ATTRIBUTE = "attribute"
    PROPERTY = "property"


class EnterpriseLevel(str, Enum):
    L1 = "L1"   # process control
    L2 = "L2"   # execution
    L3 = "L3"   # management


class FlowKind(str, Enum):
    DATA = "data"
    INFORMATION = "information"
    ENERGY = "energy"
    MATERIAL = "material"


class Operation(str, Enum):
    TRANSFORM = "transform"
    ASSEMBLE = "assemble"
    DISASSEMBLE = "disassemble"


# ============================================================================
# INFORMATIONAL PART
# ============================================================================

@dataclass
class Attribute:
    name: str
    attr_class: AttributeClass
    value: Scalar
    unit: Optional[str] = None


@dataclass
class HolonState:
    state_id: str
    at: datetime
    attributes: Dict[str, Attribute] = field(default_factory=dict)
    produced_by: Optional[str] = None   # ProcessInstance id

    @classmethod
    def of(cls, state_id: str, at: datetime, attributes: Iterable[Attribute] = (),
           produced_by: Optional[str] = None) -> "HolonState":
        """Build a state from a list of attributes, rejecting duplicate names."""
        keyed: Dict[str, Attribute] = {}
        for attr in attributes:
            if attr.name in keyed:
                raise InvalidState(f"state '{state_id}' repeats attribute '{attr.name}'")
            keyed[attr.name] = attr
        return cls(state_id=state_id, at=at, attributes=keyed, produced_by=produced_by)


@dataclass
class Property:
    name: str
    value: Scalar


# ============================================================================
# PHYSICAL PART + COMPOSITION
# ============================================================================

@dataclass(frozen=True)
class PhysicalPartRef:
    ledger_entry: str
    checksum: str


@dataclass(frozen=True)
class Constituent:
    holon_id: str
    instance_id: str     # composing ProcessInstance


@dataclass
class Holon:
    id: str
    kind: HolonKind
    physical: PhysicalPartRef
    properties: Dict[str, Property] = field(default_factory=dict)
    states: List[HolonState] = field(default_factory=list)
    constituents: List[Constituent] = field(default_factory=list)
    retired: bool = False
    holon_type: Optional[str] = None

    @property
    def head(self) -> Optional[HolonState]:
        return self.states[-1] if self.states else None

    @property
    def live(self) -> bool:
        return not self.retired


# ============================================================================
# RESOURCES, PROCESSES, FLOWS
# ============================================================================

@dataclass
class Resource:
    id: str
    kind: ResourceKind
    provides: Set[str] = field(default_factory=set)     # capability names


@dataclass(frozen=True, order=True)
class ItemRef:
    holon_type: str
    item_kind: ItemKind
    item: str

    @property
    def token(self) -> str:
        return f"{self.holon_type}:{self.item_kind.value}:{self.item}"

    @classmethod
    def from_token(cls, token: str) -> "ItemRef":
        """Split from the right: holon type ids may contain ':', item names may not."""
        parts = token.rsplit(":", 2)
        if len(parts) != 3 or not all(parts):
            raise ValueError(f"malformed item token '{token}'")
        return cls(parts[0], ItemKind(parts[1]), parts[2])

    def __str__(self) -> str:
        return self.token


@dataclass
class LcimMetadata:
    reference_bindings: Dict[ItemRef, str] = field(default_factory=dict)
    behavior_model: Optional[str] = None
    conceptual_links: Set[Tuple[ItemRef, ItemRef]] = field(default_factory=set)

    def is_empty(self) -> bool:
        return not self.reference_bindings and self.behavior_model is None and not self.conceptual_links


@dataclass
class Process:
    id: str
    name: str
    enterprise_level: EnterpriseLevel
    consumes: Set[ItemRef] = field(default_factory=set)
    produces: Set[ItemRef] = field(default_factory=set)
    requires: Set[str] = field(default_factory=set)
    lcim_meta: LcimMetadata = field(default_factory=LcimMetadata)
    operation: Operation = Operation.TRANSFORM
    physical: bool = True

    @property
    def interface(self) -> Set[ItemRef]:
        return self.consumes | self.produces


@dataclass
class Flow:
    id: str
    source: str          # process id or EXTERNAL
    target: str          # process id or EXTERNAL
    flow_kind: FlowKind
    carries: Optional[str] = None
    declared_items: Set[ItemRef] = field(default_factory=set)

    @property
    def is_external_input(self) -> bool:
        return self.source == EXTERNAL and self.target != EXTERNAL


@dataclass
class Actor:
    id: str
    name: str
    internal: bool = True


@dataclass
class Site:
    id: str
    name: str
    geo: Optional[str] = None


@dataclass
class HolonType:
    id: str
    attributes: Dict[str, AttributeClass] = field(default_factory=dict)
    properties: Set[str] = field(default_factory=set)

    def declares(self, ref: ItemRef) -> bool:
        if ref.holon_type != self.id:
            return False
        if ref.item_kind == ItemKind.ATTRIBUTE:
            return ref.item in self.attributes
        return ref.item in self.properties


# ============================================================================
# EXECUTION RECORDS
# ============================================================================

class StateRef(NamedTuple):
    holon_id: str
    state_id: str


@dataclass
class ProcessInstance:
    id: str
    process: str
    occurrence: int
    start: datetime
    end: datetime
    elapsed: timedelta
    inputs: List[StateRef] = field(default_factory=list)
    outputs: List[StateRef] = field(default_factory=list)
    used: Set[str] = field(default_factory=set)

    @classmethod
    def timed(cls, id: str, process: str, occurrence: int, start: datetime, end: datetime,
              **kwargs) -> "ProcessInstance":
        return cls(id=id, process=process, occurrence=occurrence, start=start, end=end,
                   elapsed=end - start, **kwargs)


@dataclass
class RunDirective:
    id: str
    process: str
    inputs: List[str] = field(default_factory=list)
    resources: List[str] = field(default_factory=list)
    fault: Optional[str] = None
    parts: Optional[int] = None
    values: Dict[ItemRef, Scalar] = field(default_factory=dict)


@dataclass
class Scenario:
    id: str
    runs: List[RunDirective] = field(default_factory=list)
    clock_start: Optional[datetime] = None
    step_ms: Optional[int] = None


@dataclass(frozen=True, order=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} {self.subject} {self.message}"


# ============================================================================
# SYSTEM MODEL
# ============================================================================

@dataclass
class SystemModel:
    """The analyzed universe: M1 model content plus the M0 instance store."""
    sites: Dict[str, Site] = field(default_factory=dict)
    actors: Dict[str, Actor] = field(default_factory=dict)
    resources: Dict[str, Resource] = field(default_factory=dict)
    holon_types: Dict[str, HolonType] = field(default_factory=dict)
    reference_registry: Set[str] = field(default_factory=set)
    behaviors: Dict[str, Optional[str]] = field(default_factory=dict)   # id -> description
    holons: Dict[str, Holon] = field(default_factory=dict)
    processes: Dict[str, Process] = field(default_factory=dict)
    flows: Dict[str, Flow] = field(default_factory=dict)
    instances: Dict[str, ProcessInstance] = field(default_factory=dict)
    ledger: PhysicalLedger = field(default_factory=PhysicalLedger)
    scenarios: Dict[str, Scenario] = field(default_factory=dict)

    def resolves(self, ref: ItemRef) -> bool:
        holon_type = self.holon_types.get(ref.holon_type)
        return holon_type is not None and holon_type.declares(ref)

    def instances_of(self, process_id: str) -> List[ProcessInstance]:
        return [i for i in self.instances.values() if i.process == process_id]
