"""
Model IO: the canonical .holx interchange format.

parse_model() turns document bytes into a SystemModel (or exactly one of
XmlSyntax / SchemaViolation / ModelReferenceError); serialize_model() writes
the canonical form: fixed section order, members sorted by id, attributes
sorted by name, 2-space indentation, UTF-8, LF. Equal models produce
byte-identical documents.

The grammar lives in data/schemas/holonic.schema.xml.
"""

import logging
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from lxml import etree

from core.errors import InvalidModel, ModelReferenceError, SchemaViolation, XmlSyntax
from core.model.ledger import LedgerEntry
from core.model.types import (
    Actor,
    Attribute,
    AttributeClass,
    Constituent,
    EnterpriseLevel,
    Flow,
    FlowKind,
    Holon,
    HolonKind,
    HolonState,
    HolonType,
    ItemKind,
    ItemRef,
    LcimMetadata,
    Operation,
    PhysicalPartRef,
    Process,
    ProcessInstance,
    Property,
    Resource,
    ResourceKind,
    RunDirective,
    Scenario,
    Site,
    StateRef,
    SystemModel,
)
from core.model.validation import reference_violations, validate
from core.model.values import (
    duration_ms,
    format_scalar,
    format_timestamp,
    is_identifier,
    parse_scalar,
    parse_timestamp,
)
from core.schema import load_schema

logger = logging.getLogger("model_io")

Document = etree._Element

FORMAT_VERSION = "1"
FILE_EXTENSION = ".holx"
ROOT = "holonic-model"


def _parser() -> etree.XMLParser:
    return etree.XMLParser(resolve_entities=False, no_network=True, remove_comments=True,
                           remove_pis=True, huge_tree=False)


def read_document(document_bytes: Union[bytes, str]) -> Document:
    """Parse raw XML; syntax problems become XmlSyntax with line/column."""
    if isinstance(document_bytes, str):
        document_bytes = document_bytes.encode("utf-8")
    try:
        return etree.fromstring(document_bytes, _parser())
    except etree.XMLSyntaxError as exc:
        line, column = exc.position if exc.position else (0, 0)
        raise XmlSyntax(exc.msg or str(exc), line, column) from None


def write_document(root: Document) -> bytes:
    return etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="UTF-8")


# ============================================================================
# WRITING
# ============================================================================

def _el(parent: Optional[Document], tag: str, attrs: Dict[str, Optional[str]]) -> Document:
    node = etree.Element(tag) if parent is None else etree.SubElement(parent, tag)
    for key in sorted(attrs):
        if attrs[key] is not None:
            node.set(key, attrs[key])
    return node


def _bool(flag: bool) -> str:
    return "true" if flag else "false"


def _item_attrs(ref: ItemRef) -> Dict[str, str]:
    return {"type": ref.holon_type, "item": ref.item, "kind": ref.item_kind.value}


def model_to_tree(model: SystemModel, include_scenarios: bool = True) -> Document:
    """Canonical element tree of a model (no validity check)."""
    root = _el(None, ROOT, {"version": FORMAT_VERSION})

    sites = _el(root, "sites", {})
    for site in sorted(model.sites.values(), key=lambda s: s.id):
        _el(sites, "site", {"id": site.id, "name": site.name, "geo": site.geo})

    actors = _el(root, "actors", {})
    for actor in sorted(model.actors.values(), key=lambda a: a.id):
        _el(actors, "actor", {"id": actor.id, "name": actor.name, "internal": _bool(actor.internal)})

    resources = _el(root, "resources", {})
    for resource in sorted(model.resources.values(), key=lambda r: r.id):
        node = _el(resources, "resource", {"id": resource.id, "kind": resource.kind.value})
        for capability in sorted(resource.provides):
            _el(node, "provides", {"capability": capability})

    types = _el(root, "holon-types", {})
    for holon_type in sorted(model.holon_types.values(), key=lambda t: t.id):
        node = _el(types, "holon-type", {"id": holon_type.id})
        for name in sorted(holon_type.attributes):
            _el(node, "attribute-decl", {"name": name, "class": holon_type.attributes[name].value})
        for name in sorted(holon_type.properties):
            _el(node, "property-decl", {"name": name})

    references = _el(root, "references", {})
    for term in sorted(model.reference_registry):
        _el(references, "term", {"id": term})
    for behavior_id in sorted(model.behaviors):
        _el(references, "behavior", {"id": behavior_id, "description": model.behaviors[behavior_id]})

    holons = _el(root, "holons", {})
    for holon in sorted(model.holons.values(), key=lambda h: h.id):
        _write_holon(holons, holon, model)

    processes = _el(root, "processes", {})
    for process in sorted(model.processes.values(), key=lambda p: p.id):
        _write_process(processes, process)

    flows = _el(root, "flows", {})
    for flow in sorted(model.flows.values(), key=lambda f: f.id):
        node = _el(flows, "flow", {"id": flow.id, "from": flow.source, "to": flow.target,
                                   "kind": flow.flow_kind.value, "carries": flow.carries})
        for ref in sorted(flow.declared_items):
            _el(node, "declared", _item_attrs(ref))

    instances = _el(root, "instances", {})
    for instance in sorted(model.instances.values(), key=lambda i: i.id):
        node = _el(instances, "instance", {
            "id": instance.id,
            "process": instance.process,
            "occurrence": str(instance.occurrence),
            "start": format_timestamp(instance.start),
            "end": format_timestamp(instance.end),
            "elapsed": str(duration_ms(instance.elapsed)),
        })
        for ref in instance.inputs:
            _el(node, "input", {"holon": ref.holon_id, "state": ref.state_id})
        for ref in instance.outputs:
            _el(node, "output", {"holon": ref.holon_id, "state": ref.state_id})
        for resource_id in sorted(instance.used):
            _el(node, "used", {"resource": resource_id})

    if include_scenarios:
        for scenario in sorted(model.scenarios.values(), key=lambda s: s.id):
            _write_scenario(root, scenario)
    return root


def _write_holon(parent: Document, holon: Holon, model: SystemModel):
    node = _el(parent, "holon", {"id": holon.id, "kind": holon.kind.value,
                                 "retired": _bool(holon.retired), "type": holon.holon_type})
    for name in sorted(holon.properties):
        text, tag = format_scalar(holon.properties[name].value)
        _el(node, "property", {"name": name, "value": text, "type": tag})
    for state in holon.states:
        state_node = _el(node, "state", {"id": state.state_id, "at": format_timestamp(state.at),
                                         "produced-by": state.produced_by})
        for name in sorted(state.attributes):
            attr = state.attributes[name]
            text, tag = format_scalar(attr.value)
            _el(state_node, "attribute", {"name": attr.name, "class": attr.attr_class.value,
                                          "value": text, "type": tag, "unit": attr.unit})
    entry = model.ledger.entries.get(holon.physical.ledger_entry)
    _el(node, "physical", {
        "ledger": holon.physical.ledger_entry,
        "checksum": holon.physical.checksum,
        "descriptor": entry.descriptor.hex() if entry is not None else "",
    })
    for link in holon.constituents:
        _el(node, "constituent", {"ref": link.holon_id, "instance": link.instance_id})


def _write_process(parent: Document, process: Process):
    node = _el(parent, "process", {
        "id": process.id,
        "name": process.name,
        "level": process.enterprise_level.value,
        "operation": None if process.operation == Operation.TRANSFORM else process.operation.value,
        "physical": None if process.physical else "false",
    })
    for ref in sorted(process.consumes):
        _el(node, "consumes", _item_attrs(ref))
    for ref in sorted(process.produces):
        _el(node, "produces", _item_attrs(ref))
    for capability in sorted(process.requires):
        _el(node, "requires", {"capability": capability})
    meta = process.lcim_meta
    if not meta.is_empty():
        lcim = _el(node, "lcim", {})
        for ref in sorted(meta.reference_bindings, key=lambda r: r.token):
            _el(lcim, "binding", {"item": ref.token, "term": meta.reference_bindings[ref]})
        if meta.behavior_model is not None:
            _el(lcim, "behavior", {"ref": meta.behavior_model})
        for a, b in sorted(meta.conceptual_links, key=lambda link: (link[0].token, link[1].token)):
            _el(lcim, "link", {"a": a.token, "b": b.token})


def _write_scenario(root: Document, scenario: Scenario):
    node = _el(root, "scenario", {
        "id": scenario.id,
        "clock-start": format_timestamp(scenario.clock_start) if scenario.clock_start else None,
        "step-ms": str(scenario.step_ms) if scenario.step_ms is not None else None,
    })
    for run in scenario.runs:
        run_node = _el(node, "run", {"id": run.id, "process": run.process, "fault": run.fault,
                                     "parts": str(run.parts) if run.parts is not None else None})
        for holon_id in run.inputs:
            _el(run_node, "input", {"holon": holon_id})
        for resource_id in run.resources:
            _el(run_node, "use", {"resource": resource_id})
        for ref in sorted(run.values, key=lambda r: r.token):
            text, tag = format_scalar(run.values[ref])
            _el(run_node, "set", {"item": ref.token, "value": text, "type": tag})


def serialize_model(model: SystemModel) -> bytes:
    violations = validate(model)
    if violations:
        raise InvalidModel(violations)
    return write_document(model_to_tree(model))


def save_model(model: SystemModel, path: Union[str, Path]):
    Path(path).write_bytes(serialize_model(model))
    logger.info(f"[WRITE] {path}")


# ============================================================================
# READING
# ============================================================================

class _Reader:
    """Builds a model from a schema-checked tree, tracking element paths."""

    def __init__(self, root: Document):
        self.root = root
        self.model = SystemModel()

    def path(self, node: Document) -> str:
        parts = []
        while node is not None:
            parts.append(node.tag)
            node = node.getparent()
        return "/" + "/".join(reversed(parts))

    def value(self, node: Document, attr: str, convert: Callable = str, optional: bool = False):
        raw = node.get(attr)
        if raw is None:
            if optional:
                return None
            raise SchemaViolation(f"{self.path(node)}/@{attr}", "required attribute missing")
        try:
            return convert(raw)
        except (ValueError, TypeError) as exc:
            raise SchemaViolation(f"{self.path(node)}/@{attr}", f"bad value '{raw}': {exc}") from None

    def ident(self, node: Document, attr: str = "id", optional: bool = False) -> Optional[str]:
        return self.value(node, attr, _identifier, optional)

    def put(self, table: Dict, key: str, obj, node: Document):
        if key in table:
            raise SchemaViolation(self.path(node), f"duplicate id '{key}'")
        table[key] = obj

    def item(self, node: Document) -> ItemRef:
        return ItemRef(self.ident(node, "type"), self.value(node, "kind", ItemKind), self.ident(node, "item"))

    def children(self, node: Document, tag: str) -> List[Document]:
        return [c for c in node if c.tag == tag]

    # ------------------------------------------------------------------
    def build(self) -> SystemModel:
        for section in self.root:
            handler = getattr(self, "_read_" + section.tag.replace("-", "_"))
            handler(section)
        return self.model

    def _read_sites(self, section):
        for node in section:
            site = Site(self.ident(node), self.value(node, "name"), self.value(node, "geo", optional=True))
            self.put(self.model.sites, site.id, site, node)

    def _read_actors(self, section):
        for node in section:
            actor = Actor(self.ident(node), self.value(node, "name"), self.value(node, "internal", _flag))
            self.put(self.model.actors, actor.id, actor, node)

    def _read_resources(self, section):
        for node in section:
            resource = Resource(self.ident(node), self.value(node, "kind", ResourceKind),
                                {self.ident(c, "capability") for c in node})
            self.put(self.model.resources, resource.id, resource, node)

    def _read_holon_types(self, section):
        for node in section:
            holon_type = HolonType(self.ident(node))
            for child in node:
                name = self.ident(child, "name")
                if child.tag == "attribute-decl":
                    self.put(holon_type.attributes, name, self.value(child, "class", AttributeClass), child)
                else:
                    if name in holon_type.properties:
                        raise SchemaViolation(self.path(child), f"duplicate property '{name}'")
                    holon_type.properties.add(name)
            self.put(self.model.holon_types, holon_type.id, holon_type, node)

    def _read_references(self, section):
        for node in section:
            ident = self.ident(node)
            if node.tag == "term":
                if ident in self.model.reference_registry:
                    raise SchemaViolation(self.path(node), f"duplicate id '{ident}'")
                self.model.reference_registry.add(ident)
            else:
                self.put(self.model.behaviors, ident, self.value(node, "description", optional=True), node)

    def _read_holons(self, section):
        for node in section:
            properties: Dict[str, Property] = {}
            states: List[HolonState] = []
            constituents: List[Constituent] = []
            physical = None
            for child in node:
                if child.tag == "property":
                    name = self.ident(child, "name")
                    prop = Property(name, self.scalar(child))
                    self.put(properties, name, prop, child)
                elif child.tag == "state":
                    states.append(self._state(child))
                elif child.tag == "physical":
                    if physical is not None:
                        raise SchemaViolation(self.path(child), "holon has more than one physical part")
                    physical = child
                else:
                    constituents.append(Constituent(self.ident(child, "ref"), self.ident(child, "instance")))
            if physical is None:
                raise SchemaViolation(self.path(node) + "/physical", "physical part missing")
            entry_id = self.ident(physical, "ledger")
            ref = PhysicalPartRef(entry_id, self.value(physical, "checksum", _checksum))
            descriptor = self.value(physical, "descriptor", bytes.fromhex)
            if entry_id in self.model.ledger.entries:
                raise SchemaViolation(self.path(physical) + "/@ledger", f"ledger entry '{entry_id}' shared")
            self.model.ledger.entries[entry_id] = LedgerEntry.of(descriptor)
            holon = Holon(
                id=self.ident(node),
                kind=self.value(node, "kind", HolonKind),
                physical=ref,
                properties=properties,
                states=states,
                constituents=constituents,
                retired=self.value(node, "retired", _flag),
                holon_type=self.ident(node, "type", optional=True),
            )
            self.put(self.model.holons, holon.id, holon, node)

    def _state(self, node) -> HolonState:
        attributes: Dict[str, Attribute] = {}
        for child in node:
            name = self.ident(child, "name")
            attr = Attribute(name, self.value(child, "class", AttributeClass), self.scalar(child),
                             self.value(child, "unit", optional=True))
            self.put(attributes, name, attr, child)
        return HolonState(self.ident(node), self.value(node, "at", parse_timestamp), attributes,
                          self.ident(node, "produced-by", optional=True))

    def scalar(self, node):
        tag = node.get("type")
        return self.value(node, "value", lambda raw: parse_scalar(raw, tag))

    def _read_processes(self, section):
        for node in section:
            process = Process(
                id=self.ident(node),
                name=self.value(node, "name"),
                enterprise_level=self.value(node, "level", EnterpriseLevel),
                operation=self.value(node, "operation", Operation, optional=True) or Operation.TRANSFORM,
                physical=self.value(node, "physical", _flag, optional=True) is not False,
            )
            for child in node:
                if child.tag == "consumes":
                    process.consumes.add(self.item(child))
                elif child.tag == "produces":
                    process.produces.add(self.item(child))
                elif child.tag == "requires":
                    process.requires.add(self.ident(child, "capability"))
                else:
                    process.lcim_meta = self._lcim(child)
            self.put(self.model.processes, process.id, process, node)

    def _lcim(self, node) -> LcimMetadata:
        meta = LcimMetadata()
        for child in node:
            if child.tag == "binding":
                ref = self.value(child, "item", ItemRef.from_token)
                if ref in meta.reference_bindings:
                    raise SchemaViolation(self.path(child), f"item '{ref.token}' bound twice")
                meta.reference_bindings[ref] = self.ident(child, "term")
            elif child.tag == "behavior":
                if meta.behavior_model is not None:
                    raise SchemaViolation(self.path(child), "more than one behavior model")
                meta.behavior_model = self.ident(child, "ref")
            else:
                meta.conceptual_links.add((self.value(child, "a", ItemRef.from_token),
                                           self.value(child, "b", ItemRef.from_token)))
        return meta

    def _read_flows(self, section):
        for node in section:
            flow = Flow(
                id=self.ident(node),
                source=self.ident(node, "from"),
                target=self.ident(node, "to"),
                flow_kind=self.value(node, "kind", FlowKind),
                carries=self.ident(node, "carries", optional=True),
                declared_items={self.item(c) for c in node},
            )
            self.put(self.model.flows, flow.id, flow, node)

    def _read_instances(self, section):
        for node in section:
            instance = ProcessInstance(
                id=self.ident(node),
                process=self.ident(node, "process"),
                occurrence=self.value(node, "occurrence", int),
                start=self.value(node, "start", parse_timestamp),
                end=self.value(node, "end", parse_timestamp),
                elapsed=self.value(node, "elapsed", _duration),
            )
            for child in node:
                if child.tag == "used":
                    instance.used.add(self.ident(child, "resource"))
                else:
                    ref = StateRef(self.ident(child, "holon"), self.ident(child, "state"))
                    (instance.inputs if child.tag == "input" else instance.outputs).append(ref)
            self.put(self.model.instances, instance.id, instance, node)

    def _read_scenario(self, node):
        scenario = Scenario(
            id=self.ident(node),
            clock_start=self.value(node, "clock-start", parse_timestamp, optional=True),
            step_ms=self.value(node, "step-ms", _positive, optional=True),
        )
        for run_node in node:
            run = RunDirective(
                id=self.ident(run_node),
                process=self.ident(run_node, "process"),
                fault=self.value(run_node, "fault", optional=True),
                parts=self.value(run_node, "parts", _positive, optional=True),
            )
            for child in run_node:
                if child.tag == "input":
                    run.inputs.append(self.ident(child, "holon"))
                elif child.tag == "use":
                    run.resources.append(self.ident(child, "resource"))
                else:
                    ref = self.value(child, "item", ItemRef.from_token)
                    self.put(run.values, ref, self.scalar(child), child)
            scenario.runs.append(run)
        self.put(self.model.scenarios, scenario.id, scenario, node)


def _identifier(raw: str) -> str:
    if not is_identifier(raw):
        raise ValueError("identifiers are nonempty and contain no whitespace")
    return raw


def _flag(raw: str) -> bool:
    if raw not in ("true", "false"):
        raise ValueError("expected true or false")
    return raw == "true"


def _checksum(raw: str) -> str:
    if len(raw) != 16 or any(c not in "0123456789abcdef" for c in raw):
        raise ValueError("checksum is 16 lowercase hex digits")
    return raw


def _positive(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise ValueError("must be >= 1")
    return value


def _duration(raw: str):
    return parse_scalar(raw, "duration")


def check_document(root: Document, schema_id: str = "holonic"):
    issues = load_schema(schema_id).issues(root, limit=1)
    if issues:
        path, message = issues[0]
        raise SchemaViolation(path, message)


def model_from_tree(root: Document) -> SystemModel:
    check_document(root)
    model = _Reader(root).build()
    dangling = reference_violations(validate(model))
    if dangling:
        raise ModelReferenceError(dangling)
    return model


def parse_model(document_bytes: Union[bytes, str]) -> SystemModel:
    model = model_from_tree(read_document(document_bytes))
    logger.info(f"[PARSE] {len(model.processes)} processes, {len(model.flows)} flows, "
                f"{len(model.holons)} holons")
    return model


def load_model(path: Union[str, Path]) -> SystemModel:
    return parse_model(Path(path).read_bytes())
