"""Schema file loading and discovery of the built-in catalog."""
from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, List

from pydantic import ValidationError

from .errors import SchemaError
from .state import SubstitutionSchema

logger = logging.getLogger(__name__)

SCHEMAS_DIR = Path(__file__).parent / "schemas"


def load_schema(file_path: str | Path) -> SubstitutionSchema:
    """Load and shape-check a single schema file.

    Args:
        file_path: Path to a UTF-8 JSON schema file

    Returns:
        The parsed SubstitutionSchema

    Raises:
        SchemaError: If the file is missing or unreadable, not JSON, or has the wrong shape
    """
    path = Path(file_path)

    if not path.exists():
        raise SchemaError(f"Schema not found: {path}")
    if path.suffix.lower() != ".json":
        raise SchemaError(f"Unsupported file extension: {path.suffix}. Supported: .json")

    try:
        raw = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaError(f"{path}: not UTF-8 text ({exc.reason})") from exc
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc.strerror or exc})") from exc

    try:
        return SubstitutionSchema.model_validate_json(raw)
    except ValidationError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def discover_schema_files(schemas_dir: str | Path = SCHEMAS_DIR) -> List[Path]:
    """All ``*.json`` files in a directory (non-recursive), sorted."""
    path = Path(schemas_dir)
    if not path.exists():
        return []
    return sorted(path.glob("*.json"))


@lru_cache(maxsize=1)
def builtin_schemas() -> Dict[str, SubstitutionSchema]:
    """The shipped catalog keyed by schema name, in name order."""
    catalog = {}
    for path in discover_schema_files(SCHEMAS_DIR):
        schema = load_schema(path)
        catalog[schema.name] = schema
    logger.debug("loaded %d built-in schemas", len(catalog))
    return dict(sorted(catalog.items()))


def resolve_schema(name_or_path: str) -> SubstitutionSchema:
    """A built-in name, or otherwise a path to a schema file."""
    catalog = builtin_schemas()
    if name_or_path in catalog:
        return catalog[name_or_path]
    if Path(name_or_path).exists():
        return load_schema(name_or_path)
    raise SchemaError(
        f"unknown schema {name_or_path!r}; built-ins are {', '.join(catalog)} or pass a file path"
    )
