"""
Declarative meta-model mappings.

A MappingSpec is a list of rules read from a mapping-spec document:

    <rule id="material-lot">
      <select kind="holon"/>
      <guard attr="retired" op="eq" value="false"/>
      <emit element="material-lot" into="material-lots">
        <attr name="id" expr="@id"/>
        <rule id="lot-property"> ... </rule>
      </emit>
    </rule>

compile_mapping() resolves every selector and constructor against the source
and target grammars; apply_document() interprets the compiled rules over a
source element tree. Top-level rules are first-match-wins per section
member; members nothing matches go to the unmapped report.
"""

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from lxml import etree

from core.errors import (
    DuplicateRuleId,
    InvalidModel,
    MappingSpecError,
    SchemaViolationInOutput,
    SourceMismatch,
    UnknownSourceElement,
    UnknownTargetElement,
)
from core.model.types import SystemModel
from core.model.validation import validate
from core.persistence.model_io import Document, model_to_tree, read_document, write_document
from core.schema import ElementDecl, MetaSchema, load_schema

logger = logging.getLogger("transform")

GUARD_OPS = ("eq", "ne", "in", "present", "absent")


@dataclass(frozen=True)
class MetaModelId:
    id: str
    level: str = "M2"

    def __str__(self) -> str:
        return f"{self.id}@{self.level}"


# ============================================================================
# RULE LANGUAGE
# ============================================================================

@dataclass(frozen=True)
class Expr:
    kind: str        # attr, literal, text
    value: str = ""

    @classmethod
    def parse(cls, text: str) -> "Expr":
        if text == "text()":
            return cls("text")
        if text.startswith("@") and len(text) > 1:
            return cls("attr", text[1:])
        if len(text) >= 2 and text[0] == "'" and text[-1] == "'":
            return cls("literal", text[1:-1])
        raise MappingSpecError(f"bad expression '{text}'")

    def evaluate(self, node: Document) -> Optional[str]:
        if self.kind == "attr":
            return node.get(self.value)
        if self.kind == "literal":
            return self.value
        return (node.text or "").strip()


@dataclass(frozen=True)
class Guard:
    attr: str
    op: str
    value: Optional[str] = None

    def holds(self, node: Document) -> bool:
        actual = node.get(self.attr)
        if self.op == "present":
            return actual is not None
        if self.op == "absent":
            return actual is None
        if self.op == "eq":
            return actual == self.value
        if self.op == "ne":
            return actual != self.value
        return actual is not None and actual in self.value.split()


@dataclass
class Emit:
    element: Optional[str]                  # None = transparent
    into: Optional[str] = None
    attrs: List[Tuple[str, Expr]] = field(default_factory=list)
    rules: List["Rule"] = field(default_factory=list)


@dataclass
class Rule:
    id: str
    kind: str
    guards: List[Guard]
    emit: Emit

    def matches(self, node: Document) -> bool:
        return node.tag == self.kind and all(g.holds(node) for g in self.guards)


@dataclass
class MappingSpec:
    id: str
    source: MetaModelId
    target: MetaModelId
    rules: List[Rule] = field(default_factory=list)

    def all_rules(self):
        stack = list(reversed(self.rules))
        while stack:
            rule = stack.pop()
            yield rule
            stack.extend(reversed(rule.emit.rules))


def _elements(node: Document):
    return [c for c in node if isinstance(c.tag, str)]


def _read_rule(node: Document) -> Rule:
    kind, guards, emit = None, [], None
    for child in _elements(node):
        if child.tag == "select":
            kind = child.get("kind")
        elif child.tag == "guard":
            op = child.get("op")
            if op in ("eq", "ne", "in") and child.get("value") is None:
                raise MappingSpecError(f"rule '{node.get('id')}': guard '{op}' needs a value")
            guards.append(Guard(child.get("attr"), op, child.get("value")))
        else:
            emit = Emit(element=child.get("element"), into=child.get("into"))
            for part in _elements(child):
                if part.tag == "attr":
                    emit.attrs.append((part.get("name"), Expr.parse(part.get("expr"))))
                else:
                    emit.rules.append(_read_rule(part))
    if kind is None or emit is None:
        raise MappingSpecError(f"rule '{node.get('id')}' needs one select and one emit")
    return Rule(node.get("id"), kind, guards, emit)


def mapping_spec_from_tree(root: Document) -> MappingSpec:
    issues = load_schema("mapping-spec").issues(root, limit=1)
    if issues:
        path, message = issues[0]
        raise MappingSpecError(f"{path}: {message}")
    return MappingSpec(
        id=root.get("id"),
        source=MetaModelId(root.get("source"), root.get("source-level")),
        target=MetaModelId(root.get("target"), root.get("target-level")),
        rules=[_read_rule(node) for node in _elements(root)],
    )


def parse_mapping_spec(document_bytes: Union[bytes, str]) -> MappingSpec:
    return mapping_spec_from_tree(read_document(document_bytes))


def load_mapping_spec(path: Union[str, Path]) -> MappingSpec:
    return parse_mapping_spec(Path(path).read_bytes())


# ============================================================================
# COMPILATION
# ============================================================================

@dataclass
class Mapping:
    spec: MappingSpec
    source_schema: MetaSchema
    target_schema: MetaSchema
    index: Dict[str, List[Rule]] = field(default_factory=dict)
    identity: bool = False

    @property
    def id(self) -> str:
        return self.spec.id

    @property
    def source(self) -> MetaModelId:
        return self.spec.source

    @property
    def target(self) -> MetaModelId:
        return self.spec.target

    @property
    def rule_count(self) -> int:
        return len(self.spec.rules)


def identity_mapping(schema_id: str) -> Mapping:
    schema = load_schema(schema_id)
    meta = MetaModelId(schema.id, schema.level)
    return Mapping(MappingSpec(f"{schema_id}-identity", meta, meta), schema, schema, identity=True)


def compile_mapping(spec: MappingSpec) -> Mapping:
    source = load_schema(spec.source.id)
    target = load_schema(spec.target.id)

    seen = set()
    for rule in spec.all_rules():
        if rule.id in seen:
            raise DuplicateRuleId(rule.id)
        seen.add(rule.id)

    members = source.section_members()
    mapping = Mapping(spec, source, target)
    for rule in spec.rules:
        if rule.kind not in members:
            raise UnknownSourceElement(rule.id, rule.kind)
        if rule.emit.element is None:
            raise UnknownTargetElement(rule.id, "(none)")
        if rule.emit.into not in target.sections:
            raise UnknownTargetElement(rule.id, str(rule.emit.into))
        _check_rule(mapping, rule, source.section_of(rule.kind), rule.emit.into)
        mapping.index.setdefault(rule.kind, []).append(rule)
    logger.info(f"[COMPILE] {spec.id}: {len(spec.rules)} top-level rules, {len(seen)} in total")
    return mapping


def _check_rule(mapping: Mapping, rule: Rule, source_parent: str, target_parent: str):
    source_decl = mapping.source_schema.element(source_parent, rule.kind)
    if source_decl is None:
        raise UnknownSourceElement(rule.id, rule.kind)
    for guard in rule.guards:
        if guard.attr not in source_decl.attributes:
            raise UnknownSourceElement(rule.id, f"{rule.kind}/@{guard.attr}")

    emit = rule.emit
    if emit.element is None:
        if emit.attrs or emit.into:
            raise MappingSpecError(f"rule '{rule.id}': a transparent emit takes no attributes")
        for child in emit.rules:
            _check_rule(mapping, child, rule.kind, target_parent)
        return

    parent = target_parent
    if emit.into is not None and emit.into != target_parent:
        if mapping.target_schema.element(target_parent, emit.into) is None:
            raise UnknownTargetElement(rule.id, f"{target_parent}/{emit.into}")
        parent = emit.into
    target_decl: Optional[ElementDecl] = mapping.target_schema.element(parent, emit.element)
    if target_decl is None:
        raise UnknownTargetElement(rule.id, f"{parent}/{emit.element}")
    for name, expr in emit.attrs:
        if name not in target_decl.attributes:
            raise UnknownTargetElement(rule.id, f"{emit.element}/@{name}")
        if expr.kind == "attr" and expr.value not in source_decl.attributes:
            raise UnknownSourceElement(rule.id, f"{rule.kind}/@{expr.value}")
    for child in emit.rules:
        _check_rule(mapping, child, rule.kind, emit.element)


# ============================================================================
# APPLICATION
# ============================================================================

@dataclass(frozen=True)
class UnmappedEntry:
    kind: str
    id: str
    path: str


@dataclass
class TransformResult:
    document: Document
    matched: int
    unmapped: List[UnmappedEntry] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        return write_document(self.document)


def _first_match(rules: List[Rule], node: Document) -> Optional[Rule]:
    for rule in rules:
        if rule.matches(node):
            return rule
    return None


def _target_section(mapping: Mapping, root: Document, name: str) -> Document:
    order = mapping.target_schema.sections
    for existing in root:
        if existing.tag == name:
            return existing
    position = sum(1 for existing in root if order.index(existing.tag) < order.index(name))
    section = etree.Element(name)
    root.insert(position, section)
    return section


def _construct(rule: Rule, node: Document, parent: Document):
    emit = rule.emit
    if emit.element is None:
        _apply_children(emit.rules, node, parent)
        return
    if emit.into is not None and emit.into != parent.tag:
        wrapper = next((c for c in parent if c.tag == emit.into), None)
        if wrapper is None:
            wrapper = etree.SubElement(parent, emit.into)
        parent = wrapper
    element = etree.SubElement(parent, emit.element)
    values = {}
    for name, expr in emit.attrs:
        value = expr.evaluate(node)
        if value is not None:
            values[name] = value
    for name in sorted(values):
        element.set(name, values[name])
    _apply_children(emit.rules, node, element)


def _apply_children(rules: List[Rule], node: Document, parent: Document):
    if not rules:
        return
    for child in _elements(node):
        rule = _first_match(rules, child)
        if rule is not None:
            _construct(rule, child, parent)


def _new_root(schema: MetaSchema) -> Document:
    root = etree.Element(schema.root)
    decl = schema.element(None, schema.root)
    if decl is not None:
        for name in sorted(decl.attributes):
            if decl.attributes[name].fixed is not None:
                root.set(name, decl.attributes[name].fixed)
    return root


def apply_document(document: Document, mapping: Mapping) -> TransformResult:
    """Interpret a compiled mapping over any document of its source meta-model."""
    if document.tag != mapping.source_schema.root:
        raise SourceMismatch(mapping.source_schema.root, document.tag)

    if mapping.identity:
        members = sum(len(_elements(section)) for section in _elements(document))
        return TransformResult(copy.deepcopy(document), members)

    root = _new_root(mapping.target_schema)
    matched = 0
    unmapped: List[UnmappedEntry] = []
    for section in _elements(document):
        counts: Dict[str, int] = {}
        for member in _elements(section):
            counts[member.tag] = counts.get(member.tag, 0) + 1
            rule = _first_match(mapping.index.get(member.tag, []), member)
            if rule is None:
                path = f"/{document.tag}/{section.tag}/{member.tag}[{counts[member.tag]}]"
                unmapped.append(UnmappedEntry(member.tag, member.get("id", ""), path))
                continue
            matched += 1
            _construct(rule, member, _target_section(mapping, root, rule.emit.into))

    issues = mapping.target_schema.issues(root)
    if issues:
        raise SchemaViolationInOutput([f"{path}: {message}" for path, message in issues])
    logger.info(f"[TRANSFORM] {mapping.id}: {matched} matched, {len(unmapped)} unmapped")
    return TransformResult(root, matched, unmapped)


def apply(model: SystemModel, mapping: Mapping) -> TransformResult:
    if mapping.source.id != "holonic":
        raise SourceMismatch("holonic", mapping.source.id)
    violations = validate(model)
    if violations:
        raise InvalidModel(violations)
    return apply_document(model_to_tree(model, include_scenarios=False), mapping)
