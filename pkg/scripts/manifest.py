"""Run manifests written next to every command's outputs."""

from __future__ import annotations

import hashlib
import json
import platform
import subprocess
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable

from solvers.predictor import write_text_atomic

ROOT = Path(__file__).resolve().parents[1]
MANIFEST_SUFFIX = "_manifest.json"
TRACKED_PACKAGES = ("numpy", "scipy", "pandas", "pyarrow", "PyYAML", "scikit-learn", "joblib")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def git_commit_hash() -> str | None:
    try:
        result = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=ROOT,
            check=True,
            capture_output=True,
            text=True,
        )
        return result.stdout.strip() or None
    except Exception:
        return None


def package_versions(names: Iterable[str] = TRACKED_PACKAGES) -> Dict[str, str | None]:
    versions: Dict[str, str | None] = {}
    for name in names:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def build_manifest(
    command: str,
    config_digest: str | None,
    config_path: str | None,
    seed: int | None,
    outputs: Iterable[Path],
    extra: Dict[str, Any] | None = None,
) -> Dict[str, Any]:
    # the only file of a run that carries timestamps
    files = {}
    for path in outputs:
        if path.exists() and path.is_file():
            files[path.as_posix()] = sha256_file(path)
    return {
        "command": command,
        "generated_at_utc": datetime.now(timezone.utc).isoformat(),
        "python_version": platform.python_version(),
        "package_versions": package_versions(),
        "git_commit_hash": git_commit_hash(),
        "config_path": config_path,
        "config_sha256": config_digest,
        "seed": seed,
        "outputs": files,
        **(extra or {}),
    }


def manifest_path(out_dir: Path, command: str) -> Path:
    return out_dir / f"{command}{MANIFEST_SUFFIX}"


def write_manifest(out_dir: Path, manifest: Dict[str, Any]) -> Path:
    target = manifest_path(out_dir, str(manifest["command"]))
    write_text_atomic(target, json.dumps(manifest, indent=2, sort_keys=True, default=str))
    return target


def load_manifest(out_dir: Path, command: str) -> Dict[str, Any]:
    path = manifest_path(out_dir, command)
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except Exception:
        return {}
