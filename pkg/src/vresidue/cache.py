"""Content-addressed result cache with advisory file locks.

Entries live under ``<root>/<tool version>/<key[:2]>/<key>.json`` where the
key hashes the scene data, method, component and parameters together with
the tool version, so a version bump or any data change is a miss.  The root
is ``$VRESIDUE_CACHE_DIR`` or ``~/.cache/vresidue``.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
from pathlib import Path

from filelock import FileLock

__all__ = ["ResultCache", "cache_root", "cache_key", "ENV_VAR"]

log = logging.getLogger(__name__)

ENV_VAR = "VRESIDUE_CACHE_DIR"


def cache_root() -> Path:
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else Path.home() / ".cache" / "vresidue"


def cache_key(scene_hash: str, method: str, component: str, params: dict, version: str) -> str:
    blob = json.dumps(
        {"scene": scene_hash, "method": method, "component": component, "params": params, "version": version},
        sort_keys=True,
        default=str,
    )
    return hashlib.sha256(blob.encode()).hexdigest()


class ResultCache:
    """Cache of report rows keyed by :func:`cache_key`."""

    def __init__(self, version: str, root=None, enabled: bool = True):
        self.version = version
        self.root = Path(root) if root is not None else cache_root()
        self.enabled = enabled
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> Path:
        return self.root / self.version / key[:2] / f"{key}.json"

    def _lock(self) -> FileLock:
        self.root.mkdir(parents=True, exist_ok=True)
        return FileLock(str(self.root / ".lock"))

    def get(self, key: str):
        """Cached row, or ``None`` on a miss or a corrupt entry."""
        if not self.enabled:
            return None
        p = self._path(key)
        if not p.exists():
            self.misses += 1
            return None
        with self._lock():
            try:
                entry = json.loads(p.read_text())
                if entry.get("key") != key:
                    raise ValueError("key mismatch")
                row = entry["row"]
            except (ValueError, KeyError, OSError) as exc:
                log.warning("ignoring corrupt cache entry %s (%s)", p, exc)
                self.misses += 1
                return None
        self.hits += 1
        return row

    def put(self, key: str, row: dict) -> None:
        if not self.enabled:
            return
        p = self._path(key)
        with self._lock():
            p.parent.mkdir(parents=True, exist_ok=True)
            tmp = p.with_suffix(".tmp")
            tmp.write_text(json.dumps({"key": key, "row": row}, sort_keys=True))
            tmp.replace(p)

    def gc(self) -> dict:
        """Remove entries of other tool versions and unreadable entries."""
        removed_versions, removed_entries = [], 0
        if not self.root.exists():
            return {"root": str(self.root), "removed_versions": [], "removed_entries": 0, "kept_entries": 0}
        kept = 0
        with self._lock():
            for d in sorted(self.root.iterdir()):
                if not d.is_dir():
                    continue
                if d.name != self.version:
                    shutil.rmtree(d)
                    removed_versions.append(d.name)
                    continue
                for f in d.rglob("*"):
                    if not f.is_file():
                        continue
                    try:
                        entry = json.loads(f.read_text())
                        ok = f.suffix == ".json" and entry.get("key") == f.stem and "row" in entry
                    except (ValueError, OSError):
                        ok = False
                    if ok:
                        kept += 1
                    else:
                        f.unlink()
                        removed_entries += 1
        return {"root": str(self.root), "removed_versions": removed_versions,
                "removed_entries": removed_entries, "kept_entries": kept}
