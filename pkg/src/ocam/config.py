"""Run configuration loaded from JSON, with command-line overrides."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from datetime import date
from pathlib import Path
from typing import Optional, Union

from .model import DEFAULT_EPOCH, ComponentSpec, parse_date
from .report import FORMATS

INPUT_KEYS = ("prs", "tickets", "td_issues", "affiliations", "aliases", "sizes")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ComponentSource:
    spec: ComponentSpec
    commits: Optional[Path] = None  # JSONL commit export
    git_log: Optional[Path] = None  # numstat text
    source_tree: Optional[Path] = None  # fallback for sizes


@dataclass(frozen=True)
class RunConfig:
    epoch: date = DEFAULT_EPOCH
    components: tuple = ()
    inputs: dict = field(default_factory=dict)
    alpha: float = 0.05
    min_n: int = 5
    merge_commits: bool = False
    window_weeks: int = 1
    strict_measures: bool = False
    force_segmentation: bool = False
    no_segmentation: bool = False
    strict: bool = False
    store_dir: Path = Path("store")
    output_dir: Path = Path("out")
    format: str = "json"
    jobs: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.min_n < 2:
            raise ConfigError("min_n must be >= 2")
        if self.window_weeks < 1:
            raise ConfigError("window_weeks must be >= 1")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.epoch.weekday() != 0:
            raise ConfigError(f"epoch {self.epoch} is not a Monday")
        if self.force_segmentation and self.no_segmentation:
            raise ConfigError("force_segmentation and no_segmentation are exclusive")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with every non-``None`` override applied (flags win)."""
        known = {f.name for f in fields(self)}
        clean = {k: v for k, v in overrides.items() if v is not None and k in known}
        for key in ("store_dir", "output_dir"):
            if key in clean:
                clean[key] = Path(clean[key])
        if "epoch" in clean:
            clean["epoch"] = parse_date(clean["epoch"])
        if clean.get("force_segmentation"):
            clean.setdefault("no_segmentation", False)
        if clean.get("no_segmentation"):
            clean.setdefault("force_segmentation", False)
        return replace(self, **clean)

    @property
    def effective_jobs(self) -> int:
        return self.jobs or os.cpu_count() or 1


def _path(base: Path, value) -> Optional[Path]:
    if value in (None, ""):
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def config_from_dict(data: dict, base_dir: Union[str, Path] = ".") -> RunConfig:
    base = Path(base_dir)
    try:
        components = []
        for c in data.get("components", []):
            components.append(ComponentSource(
                spec=ComponentSpec.from_dict(c),
                commits=_path(base, c.get("commits")),
                git_log=_path(base, c.get("git_log")),
                source_tree=_path(base, c.get("source_tree")),
            ))
        inputs = {k: _path(base, v) for k, v in data.get("inputs", {}).items() if v}
        unknown = set(inputs) - set(INPUT_KEYS)
        if unknown:
            raise ConfigError(f"unknown input keys {sorted(unknown)}")
        scalars = {k: data[k] for k in ("alpha", "min_n", "merge_commits", "window_weeks",
                                        "strict_measures", "force_segmentation",
                                        "no_segmentation", "strict", "format", "jobs")
                   if k in data}
        return RunConfig(
            epoch=parse_date(data.get("epoch", DEFAULT_EPOCH.isoformat())),
            components=tuple(components),
            inputs=inputs,
            store_dir=_path(base, data.get("store_dir", "store")),
            output_dir=_path(base, data.get("output_dir", "out")),
            **scalars,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration: {exc!r}") from exc


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return config_from_dict(data, path.parent)


def config_to_dict(cfg: RunConfig) -> dict:
    """Serialisable form of the analysis-relevant settings (no input paths)."""
    return {
        "epoch": cfg.epoch.isoformat(),
        "components": [c.spec.to_dict() for c in cfg.components],
        "alpha": cfg.alpha,
        "min_n": cfg.min_n,
        "merge_commits": cfg.merge_commits,
        "window_weeks": cfg.window_weeks,
        "strict_measures": cfg.strict_measures,
        "force_segmentation": cfg.force_segmentation,
        "no_segmentation": cfg.no_segmentation,
        "format": cfg.format,
    }
