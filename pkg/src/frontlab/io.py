"""Deterministic artifact writing: CSV, JSON, atomic replace, manifest checksums."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Iterable, Sequence


def format_float(x: float) -> str:
    """Full double precision with '.' decimal point (17 significant digits)."""
    return format(float(x), ".17g")


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class ArtifactWriter:
    """Writes a run's artifacts atomically and finishes with a manifest.

    On failure, `discard` removes everything already written so no partial
    outputs survive.
    """

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._written: list[Path] = []

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(format_float(v) if isinstance(v, float) else str(v) for v in row))
        data = ("\n".join(lines) + "\n").encode("utf-8")
        path = self.out_dir / name
        _atomic_write_bytes(path, data)
        self._written.append(path)
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        data = (json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n").encode("utf-8")
        path = self.out_dir / name
        _atomic_write_bytes(path, data)
        self._written.append(path)
        return path

    def finish(self) -> Path:
        entries = []
        for path in sorted(self._written, key=lambda p: p.name):
            blob = path.read_bytes()
            entries.append(
                {
                    "name": path.name,
                    "sha256": hashlib.sha256(blob).hexdigest(),
                    "bytes": len(blob),
                }
            )
        manifest = {"artifacts": entries}
        data = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8")
        path = self.out_dir / "manifest.json"
        _atomic_write_bytes(path, data)
        return path

    def discard(self) -> None:
        for path in self._written:
            try:
                path.unlink()
            except OSError:
                pass
        self._written.clear()


def json_safe(x):
    """Replace NaN/inf with None recursively (JSON artifacts must validate)."""
    if isinstance(x, dict):
        return {k: json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [json_safe(v) for v in x]
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            return None
        return x
    return x


SIGN_CONVENTION = (
    "lambda is the principal eigenvalue of the negated operator "
    "-(Delta + c d/dx1 + r); persistence corresponds to lambda < 0"
)
