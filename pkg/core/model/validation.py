"""
Model-wide constraint checking.

validate() never raises and never mutates: problems come back as Violation
records with stable codes.

    E-H-001  elementary holon has constituents
    E-H-002  genealogy (constituent) cycle
    E-H-003  composite holon without constituents
    E-H-004  physical checksum differs from the ledger
    E-M-001  dangling reference
    E-S-001  state time regression
    E-S-002  invalid attribute (unnamed, or non-temporal value under class=time)
    E-P-001  unresolvable ItemRef
    E-P-002  declared item name contains ':'
    E-R-001  duplicate id
    E-F-001  flow with both endpoints EXTERNAL
    E-I-001  instance timing inconsistent
    E-I-002  instance resources miss a required capability
    E-V-001  non-finite number (nan, inf) in an attribute, property or run value
"""

from collections import Counter
from typing import Iterable, List

import networkx as nx

from core.model.types import (
    EXTERNAL,
    AttributeClass,
    HolonKind,
    ItemRef,
    SystemModel,
    Violation,
)
from core.model.values import is_finite, is_temporal


def validate(model: SystemModel) -> List[Violation]:
    found: List[Violation] = []
    for check in (_check_ids, _check_holon_types, _check_holons, _check_genealogy, _check_processes,
                  _check_flows, _check_instances, _check_scenarios):
        found.extend(check(model))
    return sorted(set(found))


def reference_violations(violations: Iterable[Violation]) -> List[Violation]:
    return [v for v in violations if v.code == "E-M-001"]


def _dangling(subject: str, what: str, ident: str) -> Violation:
    return Violation("E-M-001", subject, f"{what} '{ident}' does not resolve")


def _unresolved(model: SystemModel, subject: str, role: str, refs: Iterable[ItemRef]) -> List[Violation]:
    return [Violation("E-P-001", subject, f"{role} item '{ref.token}' is not declared")
            for ref in refs if not model.resolves(ref)]


def _check_ids(model: SystemModel) -> List[Violation]:
    out = []
    for kind, table in (("site", model.sites), ("actor", model.actors), ("resource", model.resources),
                        ("holon-type", model.holon_types), ("holon", model.holons),
                        ("process", model.processes), ("flow", model.flows),
                        ("instance", model.instances), ("scenario", model.scenarios)):
        for key, obj in table.items():
            if key != obj.id:
                out.append(Violation("E-R-001", key, f"{kind} registered under '{key}' has id '{obj.id}'"))
    for scenario in model.scenarios.values():
        for run_id, n in Counter(r.id for r in scenario.runs).items():
            if n > 1:
                out.append(Violation("E-R-001", f"{scenario.id}/{run_id}", "run id repeated in scenario"))
    return out


def _non_finite(subject: str, what: str, value) -> List[Violation]:
    if is_finite(value):
        return []
    return [Violation("E-V-001", subject, f"{what} holds the non-finite number {value!r}")]


def _check_holon_types(model: SystemModel) -> List[Violation]:
    out = []
    for holon_type in model.holon_types.values():
        # item tokens are split on ':' from the right
        for name in sorted(set(holon_type.attributes) | holon_type.properties):
            if ":" in name:
                out.append(Violation("E-P-002", holon_type.id, f"item name '{name}' contains ':'"))
    return out


def _check_holons(model: SystemModel) -> List[Violation]:
    out = []
    for holon in model.holons.values():
        hid = holon.id
        if holon.kind == HolonKind.ELEMENTARY and holon.constituents:
            out.append(Violation("E-H-001", hid, "elementary holon has constituents"))
        if holon.kind == HolonKind.COMPOSITE and not holon.constituents:
            out.append(Violation("E-H-003", hid, "composite holon has no constituents"))
        if holon.holon_type is not None and holon.holon_type not in model.holon_types:
            out.append(_dangling(hid, "holon type", holon.holon_type))

        entry = model.ledger.entries.get(holon.physical.ledger_entry)
        if entry is None:
            out.append(_dangling(hid, "ledger entry", holon.physical.ledger_entry))
        elif entry.checksum != holon.physical.checksum:
            out.append(Violation("E-H-004", hid, "physical checksum differs from ledger"))

        for name in sorted(holon.properties):
            out.extend(_non_finite(hid, f"property '{name}'", holon.properties[name].value))

        for link in holon.constituents:
            if link.holon_id not in model.holons:
                out.append(_dangling(hid, "constituent", link.holon_id))
            if link.instance_id not in model.instances:
                out.append(_dangling(hid, "composing instance", link.instance_id))

        for state_id, n in Counter(s.state_id for s in holon.states).items():
            if n > 1:
                out.append(Violation("E-R-001", f"{hid}/{state_id}", "state id repeated in holon"))
        previous = None
        for state in holon.states:
            subject = f"{hid}/{state.state_id}"
            if previous is not None and state.at < previous.at:
                out.append(Violation("E-S-001", subject, "state timestamp precedes the previous state"))
            previous = state
            if state.produced_by is not None and state.produced_by not in model.instances:
                out.append(_dangling(subject, "producing instance", state.produced_by))
            for key, attr in state.attributes.items():
                if not attr.name or key != attr.name:
                    out.append(Violation("E-S-002", subject, f"attribute '{key}' is unnamed or misfiled"))
                elif attr.attr_class == AttributeClass.TIME and not is_temporal(attr.value):
                    out.append(Violation("E-S-002", subject, f"time attribute '{attr.name}' is not temporal"))
                out.extend(_non_finite(subject, f"attribute '{key}'", attr.value))
    return out


def _check_genealogy(model: SystemModel) -> List[Violation]:
    graph = nx.DiGraph()
    graph.add_nodes_from(model.holons)
    for holon in model.holons.values():
        for link in holon.constituents:
            if link.holon_id in model.holons:
                graph.add_edge(holon.id, link.holon_id)
    if nx.is_directed_acyclic_graph(graph):
        return []
    out = []
    for component in nx.strongly_connected_components(graph):
        members = sorted(component)
        if len(members) > 1 or graph.has_edge(members[0], members[0]):
            out.append(Violation("E-H-002", members[0],
                                 f"genealogy cycle through {', '.join(members)}"))
    return out


def _check_processes(model: SystemModel) -> List[Violation]:
    out = []
    for process in model.processes.values():
        pid = process.id
        out.extend(_unresolved(model, pid, "consumed", sorted(process.consumes)))
        out.extend(_unresolved(model, pid, "produced", sorted(process.produces)))
        meta = process.lcim_meta
        out.extend(_unresolved(model, pid, "bound", sorted(meta.reference_bindings)))
        for ref, term in meta.reference_bindings.items():
            if term not in model.reference_registry:
                out.append(_dangling(pid, "reference term", term))
        if meta.behavior_model is not None and meta.behavior_model not in model.behaviors:
            out.append(_dangling(pid, "behavior model", meta.behavior_model))
        for a, b in sorted(meta.conceptual_links):
            out.extend(_unresolved(model, pid, "linked", [a, b]))
    return out


def _check_flows(model: SystemModel) -> List[Violation]:
    out = []
    for flow in model.flows.values():
        fid = flow.id
        if flow.source == EXTERNAL and flow.target == EXTERNAL:
            out.append(Violation("E-F-001", fid, "both endpoints are EXTERNAL"))
        for end in (flow.source, flow.target):
            if end != EXTERNAL and end not in model.processes:
                out.append(_dangling(fid, "process", end))
        if flow.carries is not None and flow.carries not in model.holon_types:
            out.append(_dangling(fid, "holon type", flow.carries))
        out.extend(_unresolved(model, fid, "declared", sorted(flow.declared_items)))
    return out


def _check_instances(model: SystemModel) -> List[Violation]:
    out = []
    for instance in model.instances.values():
        iid = instance.id
        process = model.processes.get(instance.process)
        if process is None:
            out.append(_dangling(iid, "process", instance.process))
        if instance.occurrence < 1:
            out.append(Violation("E-I-001", iid, "occurrence must be positive"))
        if instance.start > instance.end:
            out.append(Violation("E-I-001", iid, "start is after end"))
        elif instance.elapsed != instance.end - instance.start:
            out.append(Violation("E-I-001", iid, "elapsed differs from end - start"))
        for ref in instance.inputs + instance.outputs:
            holon = model.holons.get(ref.holon_id)
            if holon is None:
                out.append(_dangling(iid, "holon", ref.holon_id))
            elif all(s.state_id != ref.state_id for s in holon.states):
                out.append(_dangling(iid, "state", f"{ref.holon_id}/{ref.state_id}"))
        provided = set()
        for rid in sorted(instance.used):
            resource = model.resources.get(rid)
            if resource is None:
                out.append(_dangling(iid, "resource", rid))
            else:
                provided |= resource.provides
        if process is not None:
            for capability in sorted(process.requires - provided):
                out.append(Violation("E-I-002", iid, f"no used resource provides '{capability}'"))
    return out


def _check_scenarios(model: SystemModel) -> List[Violation]:
    out = []
    for scenario in model.scenarios.values():
        for run in scenario.runs:
            subject = f"{scenario.id}/{run.id}"
            if run.process not in model.processes:
                out.append(_dangling(subject, "process", run.process))
            for rid in run.resources:
                if rid not in model.resources:
                    out.append(_dangling(subject, "resource", rid))
            out.extend(_unresolved(model, subject, "set", sorted(run.values)))
            for ref in sorted(run.values):
                out.extend(_non_finite(subject, f"set value '{ref.token}'", run.values[ref]))
    return out
