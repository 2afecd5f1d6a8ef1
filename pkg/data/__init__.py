"""Shipped resources: grammars, mapping specs and example models."""

from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent
SCHEMA_DIR = DATA_DIR / "schemas"
MAPPING_DIR = DATA_DIR / "mappings"
EXAMPLE_DIR = DATA_DIR / "examples"
