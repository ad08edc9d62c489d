"""
this module provides I/O utilities for loading experiment configs and writing reports,
sample tables and stencils.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Dict, Optional

import yaml

from .config import IOConfig
from .harness import ExperimentReport
from .symbol import Stencil

CONFIG_DIR_ENV = "GMQ_QUASI_CONFIG_DIR"


def load_config(path: str) -> Dict:
    """
    Resolve and load a YAML/JSON config.

    Resolution order:
      1) Absolute path or relative to cwd
      2) $GMQ_QUASI_CONFIG_DIR/path
      3) repo-level configs/path
    """
    path = os.path.expanduser(str(path))
    p = Path(path)
    tried = []

    if p.is_absolute():
        tried.append(str(p))
        if p.exists():
            return _read_config_file(p)
    candidate = Path.cwd() / p
    tried.append(str(candidate))
    if candidate.exists():
        return _read_config_file(candidate)

    env_dir = os.environ.get(CONFIG_DIR_ENV)
    if env_dir:
        candidate = Path(env_dir) / p
        tried.append(str(candidate))
        if candidate.exists():
            return _read_config_file(candidate)

    repo_root = Path(__file__).resolve().parent.parent
    for candidate in (repo_root / "configs" / p, repo_root / p):
        tried.append(str(candidate))
        if candidate.exists():
            return _read_config_file(candidate)

    tried_str = "\n  - ".join(tried)
    raise FileNotFoundError(
        f"Config file not found. Looked for '{path}' in:\n  - {tried_str}"
    )


def _deep_merge(base: Dict, override: Dict) -> Dict:
    """
    Deep merge two dictionaries. Override values take precedence.
    For nested dicts, recursively merge. For lists, override replaces base.
    """
    result = base.copy()
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value
    return result


def _read_config_file(candidate: Path) -> Dict:
    """
    Read a config file and resolve inheritance via its 'extends' field (path relative to
    the file's directory), deep merging the file over its base.
    """
    suffix = candidate.suffix.lower()
    with candidate.open("r") as f:
        if suffix == ".json":
            config = json.load(f)
        else:
            config = yaml.safe_load(f)
    config = config or {}
    if not isinstance(config, dict):
        raise ValueError(f"config {candidate} must contain a mapping at top level")

    if "extends" in config:
        base_path = Path(config.pop("extends"))
        if not base_path.is_absolute():
            base_path = (candidate.parent / base_path).resolve()
        config = _deep_merge(_read_config_file(base_path), config)
    return config


def resolve_out_dir(out_dir: str) -> Path:
    path = Path(out_dir).expanduser()
    if not path.is_absolute():
        path = Path.cwd() / path
    path = path.resolve()
    path.mkdir(parents=True, exist_ok=True)
    return path


def _inside(root: Path, name: str) -> Path:
    target = (root / name).resolve()
    if target.parent != root:
        raise ValueError(f"refusing to write '{name}' outside {root}")
    return target


def write_report(
    report: ExperimentReport,
    io_cfg: IOConfig,
    config_echo: Optional[Dict] = None,
    stencil: Optional[Stencil] = None,
) -> Dict[str, Path]:
    """Write report.json (+ samples.csv, stencil.json); no timestamps, so reruns match."""
    root = resolve_out_dir(io_cfg.out_dir)
    paths: Dict[str, Path] = {}

    payload = report.to_dict()
    if config_echo is not None:
        payload["config"] = {**payload["config"], "resolved": config_echo}
    p = _inside(root, io_cfg.report_name)
    with p.open("w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, default=str)
        f.write("\n")
    paths["report"] = p

    if io_cfg.save_csv and report.samples:
        p = _inside(root, io_cfg.samples_name)
        report.to_frame().to_csv(p, index=False, float_format="%.17g")
        paths["samples"] = p

    if io_cfg.save_stencil and stencil is not None:
        p = _inside(root, "stencil.json")
        p.write_text(stencil.to_json() + "\n", encoding="utf-8")
        paths["stencil"] = p

    return paths


def load_stencil(path: str | Path) -> Stencil:
    with Path(path).open("r", encoding="utf-8") as f:
        return Stencil.from_dict(json.load(f))
