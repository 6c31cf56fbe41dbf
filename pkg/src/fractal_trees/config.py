from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .errors import ConfigError


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}={raw!r} is not an integer") from exc
    if value < 0:
        raise ConfigError(f"{name}={raw!r} must be non-negative")
    return value


@dataclass(frozen=True)
class Settings:
    build_vertex_cap: int = 2_000_000   # build_graph refuses larger V_n
    oracle_vertex_cap: int = 700        # determinant oracles
    probabilistic_vertex_cap: int = 150  # charpoly oracle
    digit_cap: int = 1_000_000          # full integer expansion of tau
    db_path: str = "fractal_trees.sqlite"
    record: bool = False

    def with_overrides(self, **changes) -> "Settings":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def get_settings() -> Settings:
    return Settings(
        build_vertex_cap=_env_int("FRACTAL_TREES_BUILD_CAP", Settings.build_vertex_cap),
        oracle_vertex_cap=_env_int("FRACTAL_TREES_ORACLE_CAP", Settings.oracle_vertex_cap),
        probabilistic_vertex_cap=_env_int(
            "FRACTAL_TREES_PROBABILISTIC_CAP", Settings.probabilistic_vertex_cap
        ),
        digit_cap=_env_int("FRACTAL_TREES_DIGIT_CAP", Settings.digit_cap),
        db_path=os.getenv("FRACTAL_TREES_DB", Settings.db_path),
        record=os.getenv("FRACTAL_TREES_RECORD", "0").strip().lower() in ("1", "true", "yes"),
    )
