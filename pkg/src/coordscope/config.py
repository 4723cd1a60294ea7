"""Run configuration: TOML file plus command-line overrides."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .graphcore.hierarchy import LINKAGES, METRICS


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


PATH_FIELDS = ("input", "users", "stories", "vocab", "fields")
# fields that never influence artifact content
NON_SEMANTIC = set(PATH_FIELDS) | {"out_dir", "threads"}


@dataclass
class RunConfig:
    input: Path | None = None
    users: Path | None = None
    stories: Path | None = None
    vocab: Path | None = None
    fields: Path | None = None
    out_dir: Path = Path("coordscope-out")
    max_bad_lines: int = 0
    window_seconds: int = 60
    min_edge_weight: int = 2
    min_spokes: int = 10
    copypasta_window: int = 10
    threshold: str | float = "auto"
    hist_bins: int = 100
    louvain_resolution: float = 1.0
    linkage: str = "average"
    metric: str = "euclidean"
    seed: int = 42
    threads: int = 1

    @classmethod
    def from_file(cls, path: str | Path) -> RunConfig:
        cfg = cls()
        cfg.update(load_config_file(path))
        return cfg

    def update(self, values: dict) -> None:
        known = {f.name for f in fields(self)}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
            if value is None:
                continue
            if key in PATH_FIELDS or key == "out_dir":
                value = Path(value)
            setattr(self, key, value)

    def validate(self, required: tuple[str, ...] = ()) -> None:
        for name in required:
            if getattr(self, name) is None:
                raise ConfigError(name, "required but not set")
        for name in PATH_FIELDS:
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigError(name, f"file not found: {path}")
        ints = {
            "max_bad_lines": 0, "window_seconds": 1, "min_edge_weight": 1, "min_spokes": 1,
            "copypasta_window": 2, "hist_bins": 2, "threads": 1,
        }
        for name, lo in ints.items():
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < lo:
                raise ConfigError(name, f"must be an integer >= {lo}, got {value!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ConfigError("seed", f"must be an integer, got {self.seed!r}")
        if self.threshold != "auto":
            try:
                t = float(self.threshold)
            except (TypeError, ValueError):
                raise ConfigError("threshold", f"must be 'auto' or a number in [0, 1], got {self.threshold!r}") from None
            if not 0.0 <= t <= 1.0:
                raise ConfigError("threshold", f"must be in [0, 1], got {t}")
            self.threshold = t
        if not isinstance(self.louvain_resolution, (int, float)) or self.louvain_resolution <= 0:
            raise ConfigError("louvain_resolution", "must be a positive number")
        if self.linkage not in LINKAGES:
            raise ConfigError("linkage", f"must be one of {LINKAGES}")
        if self.metric not in METRICS:
            raise ConfigError("metric", f"must be one of {METRICS}")

    def semantic(self) -> dict:
        data = asdict(self)
        return {k: v for k, v in data.items() if k not in NON_SEMANTIC}

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config_file(path: str | Path) -> dict:
    """Read a TOML file; keys may sit at top level or inside any table."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from None
    flat: dict = {}
    for key, value in data.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def load_field_map(path: str | Path) -> dict[str, str]:
    """Field-name mapping (canonical name -> input key path) from JSON or TOML."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
    else:
        data = load_config_file(path)
    if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
        raise ConfigError("fields", "mapping must be a table of strings")
    return data
