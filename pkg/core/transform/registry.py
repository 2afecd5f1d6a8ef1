"""
Mapping registry.

Holds compiled mappings keyed by (source meta-model, target meta-model) and
answers the bidirectional-mapping interoperability question: two
meta-models are interoperable iff a mapping exists in each direction.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from core.errors import NotFound, UnknownMetaModel
from core.transform.mapping import Mapping, MetaModelId, compile_mapping, identity_mapping, load_mapping_spec
from data import MAPPING_DIR

logger = logging.getLogger("transform")

HOLONIC = "holonic"
B2MML = "b2mml-subset"
UEML = "ueml-subset"

BUILTIN_SPECS = (
    "holonic-to-b2mml.mapping.xml",
    "b2mml-to-holonic.mapping.xml",
    "holonic-to-ueml.mapping.xml",
)

MetaModelRef = Union[MetaModelId, str]


def _meta_id(ref: MetaModelRef) -> str:
    return ref.id if isinstance(ref, MetaModelId) else ref


class MappingRegistry:
    def __init__(self):
        self.mappings: Dict[Tuple[str, str], Mapping] = {}
        self.metamodels: Dict[str, MetaModelId] = {}

    def register(self, mapping: Mapping) -> Mapping:
        key = (mapping.source.id, mapping.target.id)
        if key in self.mappings:
            logger.warning(f"[REGISTRY] replacing mapping {key[0]} -> {key[1]}")
        self.mappings[key] = mapping
        self.metamodels.setdefault(mapping.source.id, mapping.source)
        self.metamodels.setdefault(mapping.target.id, mapping.target)
        return mapping

    def register_file(self, path: Union[str, Path]) -> Mapping:
        return self.register(compile_mapping(load_mapping_spec(path)))

    def register_identity(self, schema_id: str) -> Mapping:
        return self.register(identity_mapping(schema_id))

    def get(self, source: MetaModelRef, target: MetaModelRef) -> Mapping:
        key = (_meta_id(source), _meta_id(target))
        mapping = self.mappings.get(key)
        if mapping is None:
            raise NotFound("mapping", f"{key[0]} -> {key[1]}")
        return mapping

    def pairs(self) -> List[Tuple[str, str]]:
        return sorted(self.mappings)

    def metamodels_interoperable(self, a: MetaModelRef, b: MetaModelRef) -> bool:
        a_id, b_id = _meta_id(a), _meta_id(b)
        for ident in (a_id, b_id):
            if ident not in self.metamodels:
                raise UnknownMetaModel(ident)
        return (a_id, b_id) in self.mappings and (b_id, a_id) in self.mappings

    @classmethod
    def builtin(cls, directory: Optional[Path] = None) -> "MappingRegistry":
        registry = cls()
        directory = directory or MAPPING_DIR
        for name in BUILTIN_SPECS:
            registry.register_file(directory / name)
        return registry


def metamodels_interoperable(registry: MappingRegistry, a: MetaModelRef, b: MetaModelRef) -> bool:
    return registry.metamodels_interoperable(a, b)


_default: Optional[MappingRegistry] = None


def default_registry() -> MappingRegistry:
    """Shipped mappings, compiled once per process."""
    global _default
    if _default is None:
        _default = MappingRegistry.builtin()
    return _default
