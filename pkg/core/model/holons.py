"""
Holon lifecycle operations: creation, assembly, disassembly, state history
and genealogy.

All mutating methods expect exclusive access to the underlying SystemModel
(the executor holds its lock while calling them). Queries never mutate.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

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
from core.model.ledger import chain_descriptor, ledger_id_for
from core.model.types import (
    AttributeClass,
    Constituent,
    Holon,
    HolonKind,
    HolonState,
    PhysicalPartRef,
    ProcessInstance,
    Property,
    SystemModel,
)
from core.model.values import Scalar, is_identifier, is_temporal

logger = logging.getLogger("holons")


@dataclass
class GenealogyNode:
    """One node of an unfolded genealogy DAG."""
    holon_id: str
    instance_id: Optional[str]          # instance that consumed this holon into its parent
    children: List["GenealogyNode"] = field(default_factory=list)

    def leaves(self) -> List[str]:
        if not self.children:
            return [self.holon_id]
        found: List[str] = []
        for child in self.children:
            found.extend(child.leaves())
        return found

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)


def check_state(state: HolonState):
    """Per-state invariants that can be checked without the holon."""
    for key, attr in state.attributes.items():
        if key != attr.name:
            raise InvalidState(f"state '{state.state_id}' stores attribute '{attr.name}' under '{key}'")
        if not attr.name:
            raise InvalidState(f"state '{state.state_id}' has an unnamed attribute")
        if attr.attr_class == AttributeClass.TIME and not is_temporal(attr.value):
            raise InvalidState(f"time attribute '{attr.name}' must hold a timestamp or duration")


class HolonStore:
    """Holon operations bound to one SystemModel."""

    def __init__(self, model: SystemModel):
        self.model = model

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------
    def get(self, holon_id: str) -> Holon:
        holon = self.model.holons.get(holon_id)
        if holon is None:
            raise UnknownHolon(holon_id)
        return holon

    def _live(self, holon_id: str) -> Holon:
        holon = self.get(holon_id)
        if holon.retired:
            raise RetiredConstituent(holon_id)
        return holon

    def _instance(self, instance: Union[ProcessInstance, str]) -> ProcessInstance:
        instance_id = instance if isinstance(instance, str) else instance.id
        resolved = self.model.instances.get(instance_id)
        if resolved is None:
            raise NotFound("process instance", instance_id)
        return resolved

    def _claim_id(self, holon_id: str):
        if not is_identifier(holon_id):
            raise InvalidState(f"'{holon_id}' is not a valid identifier")
        if holon_id in self.model.holons:
            raise DuplicateId("holon", holon_id)
        if ledger_id_for(holon_id) in self.model.ledger:
            raise DuplicateId("ledger entry", ledger_id_for(holon_id))

    # ------------------------------------------------------------------
    # Creation
    # ------------------------------------------------------------------
    def new_elementary(self, holon_id: str, properties: Mapping[str, Scalar],
                       initial_state: HolonState, physical_descriptor: bytes,
                       holon_type: Optional[str] = None) -> Holon:
        self._claim_id(holon_id)
        check_state(initial_state)

        entry_id = ledger_id_for(holon_id)
        entry = self.model.ledger.create(entry_id, physical_descriptor)
        holon = Holon(
            id=holon_id,
            kind=HolonKind.ELEMENTARY,
            physical=PhysicalPartRef(entry_id, entry.checksum),
            properties={name: Property(name, value) for name, value in properties.items()},
            states=[initial_state],
            holon_type=holon_type,
        )
        self.model.holons[holon_id] = holon
        logger.info(f"[HOLON] created elementary {holon_id} checksum={entry.checksum}")
        return holon

    def assemble(self, constituent_ids: Sequence[str], instance: Union[ProcessInstance, str],
                 new_state: HolonState, holon_id: Optional[str] = None,
                 holon_type: Optional[str] = None, link_physical: bool = True) -> Holon:
        """
        Compose live holons into a new composite. A single constituent models
        the transformation of one holon into a new one.

        With link_physical=False the ledger is left alone and the composite's
        checksum stays empty until merge_physical() runs.
        """
        if not constituent_ids:
            raise EmptyConstituentList()
        instance = self._instance(instance)
        parts = [self._live(cid) for cid in constituent_ids]
        repeated = [cid for cid, n in Counter(constituent_ids).items() if n > 1]
        if repeated:
            raise DuplicateId("constituent", repeated[0])

        holon_id = holon_id or f"{instance.id}:asm"
        self._claim_id(holon_id)
        check_state(new_state)

        if link_physical:
            for part in parts:
                self.model.ledger.get(part.physical.ledger_entry)
        for part in parts:
            part.retired = True

        composite = Holon(
            id=holon_id,
            kind=HolonKind.COMPOSITE,
            physical=PhysicalPartRef(ledger_id_for(holon_id), ""),
            states=[replace(new_state, produced_by=instance.id)],
            constituents=[Constituent(p.id, instance.id) for p in parts],
            holon_type=holon_type,
        )
        self.model.holons[holon_id] = composite
        if link_physical:
            self.merge_physical(holon_id)
        logger.info(f"[HOLON] assembled {holon_id} from {', '.join(constituent_ids)} via {instance.id}")
        return composite

    def disassemble(self, composite_id: str, instance: Union[ProcessInstance, str],
                    part_descriptors: Sequence[bytes],
                    part_ids: Optional[Sequence[str]] = None,
                    link_physical: bool = True) -> List[Holon]:
        source = self._live(composite_id)
        instance = self._instance(instance)
        if not part_descriptors:
            raise EmptyPartList()
        part_ids = list(part_ids) if part_ids else [
            f"{composite_id}/{instance.id}/{k}" for k in range(1, len(part_descriptors) + 1)
        ]
        if len(part_ids) != len(part_descriptors):
            raise InvalidState("one part id is needed per part descriptor")
        for pid in part_ids:
            self._claim_id(pid)
        if link_physical:
            self.model.ledger.get(source.physical.ledger_entry)

        head = source.head
        at = max(head.at, instance.end) if head else instance.end
        attributes = dict(head.attributes) if head else {}

        source.retired = True

        parts = []
        for pid in part_ids:
            part = Holon(
                id=pid,
                kind=HolonKind.COMPOSITE,
                physical=PhysicalPartRef(ledger_id_for(pid), ""),
                properties={k: replace(p) for k, p in source.properties.items()},
                states=[HolonState(instance.id, at, dict(attributes), produced_by=instance.id)],
                constituents=[Constituent(composite_id, instance.id)],
                holon_type=source.holon_type,
            )
            self.model.holons[pid] = part
            parts.append(part)
        if link_physical:
            self.split_physical(composite_id, list(zip(part_ids, part_descriptors)))
        logger.info(f"[HOLON] disassembled {composite_id} into {len(parts)} parts via {instance.id}")
        return parts

    # ------------------------------------------------------------------
    # State history
    # ------------------------------------------------------------------
    def append_state(self, holon_id: str, state: HolonState, instance_id: str) -> Holon:
        holon = self._live(holon_id)
        check_state(state)
        head = holon.head
        if head is not None and state.at < head.at:
            raise TimeRegression(holon_id, head.at, state.at)
        if any(s.state_id == state.state_id for s in holon.states):
            raise DuplicateId("state", f"{holon_id}/{state.state_id}")
        holon.states.append(replace(state, produced_by=instance_id))
        return holon

    def rewrite_physical(self, holon_id: str, process_id: str, occurrence: int) -> str:
        """Physical sub-process stand-in: chain the descriptor, resync the holon."""
        holon = self.get(holon_id)
        ledger = self.model.ledger
        old = ledger.get(holon.physical.ledger_entry)
        entry = ledger.rewrite(holon.physical.ledger_entry,
                               chain_descriptor(old.descriptor, process_id, occurrence))
        holon.physical = PhysicalPartRef(holon.physical.ledger_entry, entry.checksum)
        return entry.checksum

    def merge_physical(self, composite_id: str) -> str:
        """Physical side of an assembly: one ledger entry from the constituents' descriptors."""
        composite = self.get(composite_id)
        sources = [self.get(c.holon_id).physical.ledger_entry for c in composite.constituents]
        entry = self.model.ledger.merge(sources, composite.physical.ledger_entry)
        composite.physical = PhysicalPartRef(composite.physical.ledger_entry, entry.checksum)
        return entry.checksum

    def split_physical(self, source_id: str, parts: Sequence[Tuple[str, bytes]]) -> List[str]:
        """Physical side of a disassembly: one ledger entry per (part id, descriptor)."""
        source = self.get(source_id)
        entries = self.model.ledger.split(
            source.physical.ledger_entry,
            [(ledger_id_for(pid), bytes(desc)) for pid, desc in parts],
        )
        for (pid, _), entry in zip(parts, entries):
            part = self.get(pid)
            part.physical = PhysicalPartRef(part.physical.ledger_entry, entry.checksum)
        return [entry.checksum for entry in entries]

    def in_sync(self, holon_id: str) -> bool:
        holon = self.get(holon_id)
        entry = self.model.ledger.entries.get(holon.physical.ledger_entry)
        return entry is not None and entry.checksum == holon.physical.checksum

    # ------------------------------------------------------------------
    # Genealogy
    # ------------------------------------------------------------------
    def genealogy(self, holon_id: str) -> GenealogyNode:
        self.get(holon_id)
        return self._unfold(holon_id, None, frozenset())

    def _unfold(self, holon_id: str, instance_id: Optional[str], path: frozenset) -> GenealogyNode:
        node = GenealogyNode(holon_id, instance_id)
        holon = self.model.holons.get(holon_id)
        # path guard keeps unvalidated models from recursing forever
        if holon is None or holon_id in path:
            return node
        for link in holon.constituents:
            node.children.append(self._unfold(link.holon_id, link.instance_id, path | {holon_id}))
        return node

    def ancestors(self, holon_id: str) -> List[str]:
        """The holon plus every holon reachable through constituent links."""
        seen: Dict[str, None] = {}
        stack = [holon_id]
        while stack:
            current = stack.pop()
            if current in seen or current not in self.model.holons:
                continue
            seen[current] = None
            stack.extend(c.holon_id for c in self.model.holons[current].constituents)
        return sorted(seen)

    def live_leaves(self) -> List[str]:
        """Elementary holons reachable from live holons, each counted once."""
        reached = set()
        for holon in self.model.holons.values():
            if holon.live:
                reached.update(self.ancestors(holon.id))
        return sorted(h for h in reached if not self.model.holons[h].constituents)

    def live(self) -> Iterable[Holon]:
        return (h for h in self.model.holons.values() if h.live)
