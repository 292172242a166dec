"""Run configuration: a YAML/JSON file, overridden by command-line flags."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import yaml

from .detectors import DetectorPolicy
from .errors import ConfigError
from .github import DEFAULT_API, DEFAULT_TOKEN_ENV
from .history import DEFAULT_ANCHOR
from .source import DEFAULT_EXCLUSIONS, EXTENSIONS

FORMATS = ("csv", "json")


@dataclass
class ScanConfig:
    roots: list[Path] = field(default_factory=list)
    exclusions: tuple[str, ...] = DEFAULT_EXCLUSIONS
    extensions: tuple[str, ...] = EXTENSIONS
    policy: DetectorPolicy = field(default_factory=DetectorPolicy)
    out_dir: Path = Path("fpmine-out")
    formats: tuple[str, ...] = ("csv",)
    anchor: float = DEFAULT_ANCHOR
    token_env: str = DEFAULT_TOKEN_ENV
    api_url: str = DEFAULT_API
    jobs: int = 1
    limit: int = 1000
    alpha: float = 0.05
    hypotheses: int = 5
    comment_kind: str | None = None  # leading | trailing | None (pooled)

    def validate(self, require_roots: bool = True) -> "ScanConfig":
        if require_roots and not self.roots:
            raise ConfigError("at least one root is required")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad or not self.formats:
            raise ConfigError(f"formats must be a non-empty subset of {FORMATS}, got {list(self.formats)}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.limit < 1:
            raise ConfigError("limit must be >= 1")
        if not 0 < self.alpha < 1 or self.hypotheses < 1:
            raise ConfigError("alpha must be in (0, 1) and hypotheses >= 1")
        if self.comment_kind not in (None, "leading", "trailing"):
            raise ConfigError(f"comment kind must be leading or trailing, got {self.comment_kind!r}")
        for ext in self.extensions:
            if not ext.startswith("."):
                raise ConfigError(f"extension {ext!r} must start with '.'")
        return self

    def as_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["roots"] = [str(r) for r in self.roots]
        d["out_dir"] = str(self.out_dir)
        d["policy"] = self.policy.as_dict()
        d["exclusions"] = list(self.exclusions)
        d["extensions"] = list(self.extensions)
        d["formats"] = list(self.formats)
        return d


def read_manifest(path: Path) -> list[Path]:
    """Roots listed in a manifest: one path per line, or a YAML/JSON list.

    Relative entries resolve against the manifest's directory.
    """
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml", ".json"):
        data = yaml.safe_load(text)
        if isinstance(data, Mapping):
            data = data.get("roots")
        if not isinstance(data, list):
            raise ConfigError(f"{path}: manifest must be a list of paths")
        entries = [str(x) for x in data]
    else:
        entries = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    return [p if p.is_absolute() else path.parent / p for p in map(Path, entries)]


def expand_roots(items) -> list[Path]:
    roots: list[Path] = []
    for item in items:
        p = Path(item)
        if p.is_file():
            roots.extend(read_manifest(p))
        else:
            roots.append(p)
    return roots


_SCALARS = {f.name for f in fields(ScanConfig)} - {"roots", "policy"}


def from_mapping(data: Mapping[str, Any], base: Path | None = None) -> ScanConfig:
    cfg = ScanConfig()
    unknown = set(data) - _SCALARS - {"roots", "policy", "manifest"}
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    base = base or Path(".")

    def rel(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    roots = [rel(r) for r in data.get("roots") or []]
    if data.get("manifest"):
        roots.append(rel(data["manifest"]))
    cfg.roots = expand_roots(roots)
    if "policy" in data:
        pol = data["policy"] or {}
        if not isinstance(pol, Mapping):
            raise ConfigError("policy must be a mapping")
        try:
            cfg.policy = DetectorPolicy(**pol)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad policy: {exc}") from exc
    for key in _SCALARS & set(data):
        value = data[key]
        if key in ("exclusions", "extensions", "formats"):
            value = tuple(value)
        elif key == "out_dir":
            value = rel(value)
        setattr(cfg, key, value)
    return cfg


def load_config(path: str | Path) -> ScanConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping")
    return from_mapping(data, path.parent)
