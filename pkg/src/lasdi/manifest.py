"""Run manifest: per-stage artifact hashes for caching and integrity.

manifest.json sits next to the artifacts it describes:

    {
      "version": "0.1.0",
      "stages": {
        "gen-fom": {
          "config_digest": "…",
          "wallclock_s": 12.3,
          "artifacts": {"snapshots.lsnap": "sha256hex", …}
        }, …
      }
    }

Artifact paths are stored relative to the manifest's directory. A stage is
up to date when its config digest is unchanged and every artifact re-hashes
to its recorded value; anything else forces a recompute. verify_manifest
raises HashMismatchError naming the first corrupted file.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import HashMismatchError, IoError

_CHUNK = 1 << 20


def file_sha256(path) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as f:
            while chunk := f.read(_CHUNK):
                h.update(chunk)
    except OSError as exc:
        raise IoError(f"cannot hash {path}: {exc}") from exc
    return h.hexdigest()


def config_digest(d: dict) -> str:
    """Order-independent digest of a JSON-shaped dict."""
    return hashlib.sha256(
        json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


@dataclass
class StageRecord:
    config_digest: str
    wallclock_s: float
    artifacts: dict = field(default_factory=dict)  # rel path -> sha256 hex


@dataclass
class RunManifest:
    root: Path
    version: str = __version__
    stages: dict = field(default_factory=dict)  # stage name -> StageRecord

    @property
    def path(self) -> Path:
        return self.root / "manifest.json"

    def record(self, stage: str, digest: str, paths, wallclock_s: float) -> None:
        arts = {str(Path(p).relative_to(self.root)): file_sha256(p)
                for p in paths}
        self.stages[stage] = StageRecord(config_digest=digest,
                                         wallclock_s=wallclock_s,
                                         artifacts=arts)
        self.version = __version__
        save_manifest(self)

    def up_to_date(self, stage: str, digest: str) -> bool:
        """Skip check: config digest unchanged and every artifact intact.

        A missing artifact means "recompute"; an artifact that exists but
        re-hashes differently under an unchanged config is treated as
        corruption and raises, because silently rebuilding it could mask
        bit rot or manual tampering.
        """
        rec = self.stages.get(stage)
        if rec is None or rec.config_digest != digest:
            return False
        complete = True
        for rel, expected in rec.artifacts.items():
            p = self.root / rel
            if not p.exists():
                complete = False
            elif file_sha256(p) != expected:
                raise HashMismatchError(
                    f"{stage}: artifact {p} does not match its recorded "
                    f"hash; delete it to force a recompute")
        return complete

    def verify_input(self, producer: str, path) -> None:
        """Check a consumed artifact against its producer's recorded hash."""
        rec = self.stages.get(producer)
        rel = str(Path(path).relative_to(self.root))
        if rec is None or rel not in rec.artifacts:
            return  # nothing recorded to check against
        if not Path(path).exists():
            raise IoError(f"{producer} artifact {path} is missing; "
                          f"run that stage first")
        if file_sha256(path) != rec.artifacts[rel]:
            raise HashMismatchError(
                f"{producer}: artifact {path} does not match its recorded "
                f"hash; delete it or rerun the {producer} stage")

    def artifact(self, stage: str, suffix: str) -> Path:
        """Path of the stage's unique artifact with the given suffix."""
        rec = self.stages.get(stage)
        if rec is None:
            raise IoError(f"stage {stage!r} has not produced artifacts yet; "
                          f"run it first")
        hits = [rel for rel in rec.artifacts if rel.endswith(suffix)]
        if len(hits) != 1:
            raise IoError(f"stage {stage!r} has {len(hits)} artifacts "
                          f"matching *{suffix}")
        return self.root / hits[0]


def load_manifest(root) -> RunManifest:
    """Manifest for the run directory; empty if none exists yet."""
    root = Path(root)
    path = root / "manifest.json"
    if not path.exists():
        return RunManifest(root=root)
    try:
        with open(path) as f:
            d = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read manifest {path}: {exc}") from exc
    stages = {name: StageRecord(**rec) for name, rec in d.get("stages", {}).items()}
    return RunManifest(root=root, version=d.get("version", "unknown"),
                       stages=stages)


def save_manifest(m: RunManifest) -> None:
    m.root.mkdir(parents=True, exist_ok=True)
    body = {
        "version": m.version,
        "stages": {
            name: {"config_digest": r.config_digest,
                   "wallclock_s": r.wallclock_s,
                   "artifacts": r.artifacts}
            for name, r in m.stages.items()
        },
    }
    with open(m.path, "w") as f:
        json.dump(body, f, indent=2, sort_keys=True)
        f.write("\n")


def verify_manifest(m: RunManifest) -> int:
    """Re-hash every listed artifact; returns the count checked.

    Raises HashMismatchError naming the first missing or altered file.
    """
    n = 0
    for stage, rec in m.stages.items():
        for rel, expected in rec.artifacts.items():
            p = m.root / rel
            if not p.exists():
                raise HashMismatchError(f"{stage}: artifact {p} is missing")
            actual = file_sha256(p)
            if actual != expected:
                raise HashMismatchError(
                    f"{stage}: artifact {p} hash {actual[:12]}… does not "
                    f"match recorded {expected[:12]}…")
            n += 1
    return n


class StageTimer:
    """Context manager handing the elapsed wallclock to manifest.record."""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
        return False
