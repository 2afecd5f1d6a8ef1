"""Built-in conversions to and from the B2MML and UEML subsets."""

from typing import Optional, Union

from lxml import etree

from core.errors import SchemaViolation
from core.model.types import SystemModel
from core.persistence.model_io import Document, model_from_tree, read_document
from core.schema import load_schema
from core.transform.mapping import TransformResult, apply, apply_document
from core.transform.registry import B2MML, HOLONIC, UEML, MappingRegistry, default_registry


def to_b2mml_subset(model: SystemModel, registry: Optional[MappingRegistry] = None) -> TransformResult:
    return apply(model, (registry or default_registry()).get(HOLONIC, B2MML))


def to_ueml_subset(model: SystemModel, registry: Optional[MappingRegistry] = None) -> TransformResult:
    return apply(model, (registry or default_registry()).get(HOLONIC, UEML))


def from_b2mml_subset(document: Union[Document, bytes, str],
                      registry: Optional[MappingRegistry] = None) -> SystemModel:
    """Rebuild a holonic model from a B2MML-subset document."""
    root = document if isinstance(document, etree._Element) else read_document(document)
    issues = load_schema(B2MML).issues(root, limit=1)
    if issues:
        path, message = issues[0]
        raise SchemaViolation(path, message)
    result = apply_document(root, (registry or default_registry()).get(B2MML, HOLONIC))
    return model_from_tree(result.document)