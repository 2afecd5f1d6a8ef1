"""
Document grammars.

Every document family holx reads or writes (holonic models, the B2MML and
UEML subsets, mapping specs) is described by a small grammar file under
data/schemas/. A grammar declares elements by (parent, name), their
attributes, and which root children are sections; section order in the
file is the canonical order.

    <schema id="..." level="M2" root="...">
      <element name="root-name"> <attribute name="version" required="true" fixed="1"/> </element>
      <element name="sites" parent="root-name" section="true"/>
      <element name="site" parent="sites">
        <attribute name="id" required="true"/>
        <attribute name="kind" required="true" values="a b c"/>
      </element>
    </schema>
"""

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple

from lxml import etree

from core.errors import UnknownMetaModel
from data import SCHEMA_DIR

M_LEVELS = ("M0", "M1", "M2", "M3")


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    required: bool = False
    fixed: Optional[str] = None
    values: Optional[Tuple[str, ...]] = None


@dataclass
class ElementDecl:
    name: str
    parent: Optional[str]
    attributes: Dict[str, AttributeDecl] = field(default_factory=dict)
    section: bool = False
    multiple: bool = False
    text: bool = False


@dataclass
class MetaSchema:
    id: str
    level: str
    root: str
    elements: Dict[Tuple[Optional[str], str], ElementDecl] = field(default_factory=dict)
    sections: List[str] = field(default_factory=list)

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------
    def element(self, parent: Optional[str], name: str) -> Optional[ElementDecl]:
        return self.elements.get((parent, name))

    def children_of(self, parent: str) -> Set[str]:
        return {name for (p, name) in self.elements if p == parent}

    def section_of(self, member: str) -> Optional[str]:
        for section in self.sections:
            if (section, member) in self.elements:
                return section
        return None

    def section_members(self) -> Set[str]:
        return {name for (p, name) in self.elements if p in self.sections}

    def is_repeatable_section(self, section: str) -> bool:
        decl = self.element(self.root, section)
        return bool(decl and decl.multiple)

    # ------------------------------------------------------------------
    # Checking
    # ------------------------------------------------------------------
    def issues(self, root: etree._Element, limit: Optional[int] = None) -> List[Tuple[str, str]]:
        """Return (path, message) pairs, in document order."""
        found: List[Tuple[str, str]] = []

        def report(path: str, message: str) -> bool:
            found.append((path, message))
            return limit is not None and len(found) >= limit

        if root.tag != self.root:
            report(f"/{root.tag}", f"root element must be '{self.root}'")
            return found
        root_decl = self.element(None, self.root)
        if self._check_attributes(root, root_decl, f"/{root.tag}", report):
            return found
        if _stray_text(root.text) and report(f"/{root.tag}", "unexpected text content"):
            return found

        seen_sections: List[str] = []
        for child in _elements(root):
            path = f"/{root.tag}/{child.tag}"
            if _stray_text(child.tail) and report(path, "unexpected text after element"):
                return found
            if child.tag not in self.sections:
                if report(path, "unknown element"):
                    return found
                continue
            if seen_sections:
                last = seen_sections[-1]
                if self.sections.index(child.tag) < self.sections.index(last):
                    if report(path, f"section out of order (after '{last}')"):
                        return found
                elif child.tag == last and not self.is_repeatable_section(child.tag):
                    if report(path, "section repeated"):
                        return found
            seen_sections.append(child.tag)
            if self._walk(child, root.tag, path, report):
                return found
        return found

    def _walk(self, node: etree._Element, parent: str, path: str, report) -> bool:
        decl = self.element(parent, node.tag)
        if decl is None:
            return report(path, "unknown element")
        if self._check_attributes(node, decl, path, report):
            return True
        if not decl.text and _stray_text(node.text):
            if report(path, "unexpected text content"):
                return True
        for child in _elements(node):
            if not decl.text and _stray_text(child.tail):
                if report(f"{path}/{child.tag}", "unexpected text after element"):
                    return True
            if self._walk(child, node.tag, f"{path}/{child.tag}", report):
                return True
        return False

    @staticmethod
    def _check_attributes(node, decl: ElementDecl, path: str, report) -> bool:
        for name in sorted(node.attrib):
            spec = decl.attributes.get(name)
            if spec is None:
                if report(f"{path}/@{name}", "unknown attribute"):
                    return True
                continue
            value = node.attrib[name]
            if spec.fixed is not None and value != spec.fixed:
                if report(f"{path}/@{name}", f"must be '{spec.fixed}'"):
                    return True
            elif spec.values is not None and value not in spec.values:
                if report(f"{path}/@{name}", f"'{value}' is not one of {' '.join(spec.values)}"):
                    return True
        for name, spec in sorted(decl.attributes.items()):
            if spec.required and name not in node.attrib:
                if report(f"{path}/@{name}", "required attribute missing"):
                    return True
        return False


def _stray_text(text) -> bool:
    return bool(text and text.strip())


def _elements(node: etree._Element):
    # comments and processing instructions carry no model content
    return (c for c in node if isinstance(c.tag, str))


def schema_from_tree(root: etree._Element) -> MetaSchema:
    schema = MetaSchema(id=root.get("id"), level=root.get("level", "M2"), root=root.get("root"))
    if schema.level not in M_LEVELS:
        raise ValueError(f"schema '{schema.id}' has unknown level '{schema.level}'")
    for node in _elements(root):
        if node.tag != "element":
            raise ValueError(f"schema '{schema.id}': unexpected <{node.tag}>")
        decl = ElementDecl(
            name=node.get("name"),
            parent=node.get("parent"),
            section=node.get("section") == "true",
            multiple=node.get("multiple") == "true",
            text=node.get("text") == "true",
        )
        for attr in _elements(node):
            values = attr.get("values")
            decl.attributes[attr.get("name")] = AttributeDecl(
                name=attr.get("name"),
                required=attr.get("required") == "true",
                fixed=attr.get("fixed"),
                values=tuple(values.split()) if values else None,
            )
        schema.elements[(decl.parent, decl.name)] = decl
        if decl.section:
            schema.sections.append(decl.name)
    return schema


def load_schema_file(path: Path) -> MetaSchema:
    return schema_from_tree(etree.parse(str(path)).getroot())


@lru_cache(maxsize=None)
def load_schema(schema_id: str) -> MetaSchema:
    """Load a shipped grammar by id (data/schemas/<id>.schema.xml)."""
    path = SCHEMA_DIR / f"{schema_id}.schema.xml"
    if not path.is_file():
        raise UnknownMetaModel(schema_id)
    return load_schema_file(path)
