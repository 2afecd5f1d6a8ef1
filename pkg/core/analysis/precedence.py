"""
Occurrence-expanded precedence.

Process P1 precedes P2 when a path of flows leads from P1 to P2. Cycles are
unrolled over a horizon of K occurrences: forward flows link p@i -> q@i,
cycle-closing (back) flows link p@i -> q@(i+1), and every process succeeds
itself p@i -> p@(i+1). The relation is the transitive closure of that DAG.

Back flows come from one deterministic depth-first traversal: roots are the
EXTERNAL-fed processes in id order, then any process not yet reached, in id
order; outgoing flows are followed sorted by (target, flow id). A flow into a
process still on the DFS stack closes a cycle (self-loops included).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, NamedTuple, Set, Tuple

import networkx as nx

from core.errors import InvalidHorizon, InvalidModel, OutOfHorizon
from core.model.types import EXTERNAL, Flow, SystemModel
from core.model.validation import validate

logger = logging.getLogger("interop")


class OccNode(NamedTuple):
    process: str
    occurrence: int

    def __str__(self) -> str:
        return f"{self.process}@{self.occurrence}"


@dataclass
class PrecedenceRelation:
    horizon: int
    pairs: FrozenSet[Tuple[OccNode, OccNode]] = frozenset()
    back_edges: FrozenSet[str] = frozenset()
    processes: Tuple[str, ...] = ()
    edges: FrozenSet[Tuple[OccNode, OccNode]] = field(default=frozenset(), compare=False)

    def nodes(self) -> List[OccNode]:
        return [OccNode(p, i) for p in self.processes for i in range(1, self.horizon + 1)]

    def predecessors(self, node: OccNode) -> List[OccNode]:
        return sorted(a for a, b in self.pairs if b == node)

    def sorted_pairs(self) -> List[Tuple[OccNode, OccNode]]:
        return sorted(self.pairs)


def check_horizon(horizon) -> int:
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise InvalidHorizon(horizon)
    return horizon


def _process_flows(model: SystemModel) -> List[Flow]:
    return [f for f in model.flows.values() if f.source != EXTERNAL and f.target != EXTERNAL]


def find_back_edges(model: SystemModel) -> Set[str]:
    outgoing: Dict[str, List[Flow]] = {pid: [] for pid in model.processes}
    for flow in _process_flows(model):
        outgoing[flow.source].append(flow)
    for flows in outgoing.values():
        flows.sort(key=lambda f: (f.target, f.id))

    fed = sorted({f.target for f in model.flows.values() if f.is_external_input})
    roots = fed + [pid for pid in sorted(model.processes) if pid not in fed]

    white, gray, black = 0, 1, 2
    color = {pid: white for pid in model.processes}
    back: Set[str] = set()
    for root in roots:
        if color[root] != white:
            continue
        color[root] = gray
        stack = [(root, iter(outgoing[root]))]
        while stack:
            node, it = stack[-1]
            flow = next(it, None)
            if flow is None:
                color[node] = black
                stack.pop()
                continue
            if color[flow.target] == gray:
                back.add(flow.id)
            elif color[flow.target] == white:
                color[flow.target] = gray
                stack.append((flow.target, iter(outgoing[flow.target])))
    return back


def expanded_graph(model: SystemModel, horizon: int, back: Set[str]) -> nx.DiGraph:
    graph = nx.DiGraph()
    for pid in model.processes:
        for i in range(1, horizon + 1):
            graph.add_node(OccNode(pid, i))
            if i < horizon:
                graph.add_edge(OccNode(pid, i), OccNode(pid, i + 1))
    for flow in _process_flows(model):
        if flow.id in back:
            for i in range(1, horizon):
                graph.add_edge(OccNode(flow.source, i), OccNode(flow.target, i + 1))
        else:
            for i in range(1, horizon + 1):
                graph.add_edge(OccNode(flow.source, i), OccNode(flow.target, i))
    return graph


def build_precedence(model: SystemModel, horizon: int) -> PrecedenceRelation:
    check_horizon(horizon)
    violations = validate(model)
    if violations:
        raise InvalidModel(violations)

    back = find_back_edges(model)
    graph = expanded_graph(model, horizon, back)
    closure = nx.transitive_closure_dag(graph)
    relation = PrecedenceRelation(
        horizon=horizon,
        pairs=frozenset(closure.edges()),
        back_edges=frozenset(back),
        processes=tuple(sorted(model.processes)),
        edges=frozenset(graph.edges()),
    )
    logger.info(f"[PRECEDENCE] K={horizon}: {len(relation.pairs)} pairs, "
                f"back edges: {', '.join(sorted(back)) or 'none'}")
    return relation


def precedes(rel: PrecedenceRelation, a: OccNode, b: OccNode) -> bool:
    for node in (a, b):
        if not 1 <= node.occurrence <= rel.horizon:
            raise OutOfHorizon(node, rel.horizon)
    return (a, b) in rel.pairs


def to_dot(model: SystemModel, rel: PrecedenceRelation) -> str:
    """Graphviz rendering of the occurrence graph; back edges dashed."""
    back_pairs: Set[Tuple[OccNode, OccNode]] = set()
    for flow in _process_flows(model):
        if flow.id in rel.back_edges:
            for i in range(1, rel.horizon):
                back_pairs.add((OccNode(flow.source, i), OccNode(flow.target, i + 1)))

    lines = ["digraph precedence {", "  rankdir=LR;"]
    for node in sorted(rel.nodes()):
        lines.append(f'  "{node}";')
    for a, b in sorted(rel.edges):
        style = " [style=dashed]" if (a, b) in back_pairs else ""
        lines.append(f'  "{a}" -> "{b}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"
