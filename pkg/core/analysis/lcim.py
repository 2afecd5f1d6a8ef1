"""
LCIM classification.

Levels are a ladder of metadata-presence predicates; a process sits at the
highest level whose predicate and all lower ones hold:

    1 documented data       interface (consumes | produces) is nonempty
    2 aligned static data   every interface item is bound to a registered term
    3 aligned dynamic data  a declared behavior model is referenced
    4 harmonized semantics  conceptual links exist and all endpoints resolve

The behavior model's content is never interpreted.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

from core.errors import UnknownProcess
from core.model.types import Process, SystemModel

LEVEL_NAMES = {
    0: "system specific data",
    1: "documented data",
    2: "aligned static data",
    3: "aligned dynamic data",
    4: "harmonized data semantics",
}


@dataclass
class LcimLevel:
    level: int
    justification: List[str] = field(default_factory=list)

    @property
    def name(self) -> str:
        return LEVEL_NAMES[self.level]


def _predicates(model: SystemModel, process: Process) -> List[Tuple[bool, str]]:
    meta = process.lcim_meta
    interface = process.interface
    bound = all(
        ref in meta.reference_bindings and meta.reference_bindings[ref] in model.reference_registry
        for ref in interface
    )
    links_ok = bool(meta.conceptual_links) and all(
        model.resolves(a) and model.resolves(b) for a, b in meta.conceptual_links
    )
    return [
        (bool(interface), f"interface declares {len(interface)} item(s)"),
        (bound, "every interface item is bound to a reference term"),
        (meta.behavior_model is not None and meta.behavior_model in model.behaviors,
         f"behavior model '{meta.behavior_model}' declared"),
        (links_ok, f"{len(meta.conceptual_links)} conceptual link(s) with declared endpoints"),
    ]


def classify_lcim(model: SystemModel, process_id: str) -> LcimLevel:
    process = model.processes.get(process_id)
    if process is None:
        raise UnknownProcess(process_id)
    result = LcimLevel(0)
    for holds, reason in _predicates(model, process):
        if not holds:
            break
        result.level += 1
        result.justification.append(reason)
    return result


def classify_system_lcim(model: SystemModel) -> int:
    """Weakest process level; 0 for a model without processes."""
    if not model.processes:
        return 0
    return min(classify_lcim(model, pid).level for pid in model.processes)
