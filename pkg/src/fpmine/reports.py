"""Report emission: header block plus RFC-4180 CSV or JSON rows.

Every report starts with the same header fields (tool, version, policy,
timestamp, input digests). Only the timestamp varies between runs on the same
inputs; set ``SOURCE_DATE_EPOCH`` to pin it.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__

SCHEMA_VERSION = 1
TOOL = "fpmine"


def report_timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = int(epoch) if epoch and epoch.strip().isdigit() else int(time.time())
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def digest_of(parts: Iterable[str | bytes]) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode() if isinstance(p, str) else p)
        h.update(b"\0")
    return "sha256:" + h.hexdigest()


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


@dataclass
class ReportHeader:
    command: str
    policy: dict[str, Any]
    inputs: dict[str, str] = field(default_factory=dict)
    timestamp: str = field(default_factory=report_timestamp)
    version: str = __version__

    def lines(self) -> list[str]:
        out = [
            f"# tool: {TOOL} {self.command}",
            f"# version: {self.version}",
            f"# policy: {json.dumps(self.policy, sort_keys=True)}",
            f"# timestamp: {self.timestamp}",
        ]
        out += [f"# input: {name} {dig}" for name, dig in sorted(self.inputs.items())]
        return out

    def as_dict(self) -> dict[str, Any]:
        return {
            "tool": TOOL,
            "command": self.command,
            "version": self.version,
            "policy": self.policy,
            "timestamp": self.timestamp,
            "inputs": dict(sorted(self.inputs.items())),
        }


def fmt(value: Any) -> str:
    """CSV cell text; floats use a fixed 10-significant-digit form."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return format(value, ".10g")
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return fmt(value)  # JSON has no inf/nan
    return value


def render_csv(header: ReportHeader, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    for line in header.lines():
        buf.write(line + "\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(
    header: ReportHeader,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    extra: dict[str, Any] | None = None,
) -> str:
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "header": header.as_dict(),
        "columns": list(columns),
        "rows": [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows],
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_table(
    out_dir: Path,
    name: str,
    header: ReportHeader,
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    formats: Sequence[str] = ("csv",),
) -> list[Path]:
    """Write ``name.csv`` and/or ``name.json`` into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for f in formats:
        path = out_dir / f"{name}.{f}"
        text = render_csv(header, columns, rows) if f == "csv" else render_json(header, columns, rows)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written


def write_json(out_dir: Path, name: str, header: ReportHeader, body: dict[str, Any]) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.json"
    doc = {"schema_version": SCHEMA_VERSION, "header": header.as_dict(), **body}
    path.write_text(json.dumps(doc, indent=2, default=fmt) + "\n", encoding="utf-8")
    return path


def strip_header(text: str) -> str:
    """Report text without the timestamp field, for run-to-run comparison."""
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        doc.get("header", {}).pop("timestamp", None)
        return json.dumps(doc, sort_keys=True)
    return "".join(ln for ln in text.splitlines(keepends=True) if not ln.startswith("# timestamp:"))
