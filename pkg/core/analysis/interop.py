"""
Process and system interoperability.

A process is interoperable with its system iff each consumed item is
declared as an output of one of its predecessors. Items declared on an
EXTERNAL flow into the process or one of its predecessors count as
predecessor outputs, and an item the process produces itself satisfies its
own consumption.

Each matched item records one witness: the first match in lexicographic
producer-id order. Producers come in three ranks, tried rank by rank and in
id order within a rank:

    1. predecessor processes (process id)
    2. EXTERNAL flows into a predecessor or the process (flow id, rendered
       "@external:<flow id>")
    3. the process itself

Ranks are never merged into one sorted list of rendered ids.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Set

from core.analysis.lcim import classify_lcim
from core.analysis.precedence import OccNode, PrecedenceRelation, build_precedence
from core.errors import UnknownItem, UnknownProcess
from core.model.types import EXTERNAL, ItemRef, Process, SystemModel

logger = logging.getLogger("interop")


class PairKind(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


@dataclass
class InteropVerdict:
    process: str
    interoperable: bool
    unmatched: List[ItemRef] = field(default_factory=list)
    producers: Dict[ItemRef, str] = field(default_factory=dict)


@dataclass
class SystemVerdict:
    horizon: int
    verdicts: Dict[str, InteropVerdict]
    overall: bool


@dataclass
class InteropPair:
    a: str
    b: str
    kind: PairKind
    lcim: int
    flows: List[str] = field(default_factory=list)


def external_witness(flow_id: str) -> str:
    return f"{EXTERNAL}:{flow_id}"


def _process(model: SystemModel, process_id: str) -> Process:
    process = model.processes.get(process_id)
    if process is None:
        raise UnknownProcess(process_id)
    return process


def _witness(model: SystemModel, process: Process, item: ItemRef,
             predecessors: List[str]) -> Optional[str]:
    for qid in predecessors:
        if item in model.processes[qid].produces:
            return qid
    entry_points = set(predecessors) | {process.id}
    for flow in sorted(model.flows.values(), key=lambda f: f.id):
        if flow.is_external_input and flow.target in entry_points and item in flow.declared_items:
            return external_witness(flow.id)
    if item in process.produces:
        return process.id
    return None


def check_process_interop(model: SystemModel, rel: PrecedenceRelation, process_id: str) -> InteropVerdict:
    process = _process(model, process_id)
    target = OccNode(process_id, 1)
    predecessors = sorted({a.process for a, b in rel.pairs
                           if b == target and a.occurrence == 1 and a.process != process_id})
    verdict = InteropVerdict(process_id, True)
    for item in sorted(process.consumes):
        witness = _witness(model, process, item, predecessors)
        if witness is None:
            verdict.unmatched.append(item)
        else:
            verdict.producers[item] = witness
    verdict.interoperable = not verdict.unmatched
    return verdict


def check_system_interop(model: SystemModel, horizon: int,
                         rel: Optional[PrecedenceRelation] = None) -> SystemVerdict:
    rel = rel or build_precedence(model, horizon)
    verdicts = {pid: check_process_interop(model, rel, pid) for pid in sorted(model.processes)}
    overall = all(v.interoperable for v in verdicts.values())
    failing = [pid for pid, v in verdicts.items() if not v.interoperable]
    logger.info(f"[INTEROP] K={horizon}: overall={overall}"
                + (f", failing: {', '.join(failing)}" if failing else ""))
    return SystemVerdict(horizon, verdicts, overall)


def classify_pair(model: SystemModel, p: str, q: str) -> PairKind:
    left, right = _process(model, p), _process(model, q)
    if left.enterprise_level == right.enterprise_level:
        return PairKind.HORIZONTAL
    return PairKind.VERTICAL


def _check_item(model: SystemModel, item: ItemRef):
    if not model.resolves(item):
        raise UnknownItem(item.token)


def producers_of(model: SystemModel, item: ItemRef) -> Set[str]:
    _check_item(model, item)
    return {pid for pid, p in model.processes.items() if item in p.produces}


def consumers_of(model: SystemModel, item: ItemRef) -> Set[str]:
    _check_item(model, item)
    return {pid for pid, p in model.processes.items() if item in p.consumes}


def interop_pairs(model: SystemModel) -> List[InteropPair]:
    """Every flow-connected process pair, unordered, with its classification."""
    connected: Dict[tuple, List[str]] = {}
    for flow in model.flows.values():
        if EXTERNAL in (flow.source, flow.target) or flow.source == flow.target:
            continue
        key = tuple(sorted((flow.source, flow.target)))
        connected.setdefault(key, []).append(flow.id)
    pairs = []
    for (a, b), flows in sorted(connected.items()):
        level = min(classify_lcim(model, a).level, classify_lcim(model, b).level)
        pairs.append(InteropPair(a, b, classify_pair(model, a, b), level, sorted(flows)))
    return pairs
