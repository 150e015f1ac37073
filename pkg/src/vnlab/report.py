"""Experiment reports: canonical JSON, RFC 4180 CSV, content hashing.

Records are flat dicts with a stable key order.  Reals are rendered with 17
significant digits so emitted artifacts are byte-reproducible for identical
configurations; wall-clock timing lives outside the records section.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field


def fmt_real(x: float) -> str:
    return format(float(x), ".17g")


def _normalize(obj):
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return float(fmt_real(obj))
    if isinstance(obj, int):
        return obj
    if isinstance(obj, complex):
        return {"re": _normalize(obj.real), "im": _normalize(obj.imag)}
    return str(obj)


def canonical_json(obj) -> str:
    return json.dumps(_normalize(obj), sort_keys=True, separators=(",", ":"))


def content_hash(*payloads) -> str:
    """Content hash over configuration and input payloads (order-sensitive)."""
    h = hashlib.sha256()
    for payload in payloads:
        if isinstance(payload, bytes):
            h.update(payload)
        elif isinstance(payload, str):
            h.update(payload.encode("utf-8"))
        else:
            h.update(canonical_json(payload).encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


@dataclass
class ExperimentReport:
    command: str
    config: dict
    input_hash: str
    records: list
    summary: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    timing_seconds: float = 0.0
    version: int = 1

    def records_json(self) -> str:
        """Canonical JSON of the records section only (byte-reproducible)."""
        return canonical_json(self.records)

    def to_json(self) -> str:
        body = {
            "version": self.version,
            "command": self.command,
            "config": _normalize(self.config),
            "input_hash": self.input_hash,
            "records": _normalize(self.records),
            "summary": _normalize(self.summary),
            "warnings": list(self.warnings),
            "timing_seconds": self.timing_seconds,
        }
        return json.dumps(body, indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        return records_csv(self.records)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return fmt_real(value)
    if isinstance(value, complex):
        return f"{fmt_real(value.real)}+{fmt_real(value.imag)}j"
    return str(value)


def records_csv(records) -> str:
    """RFC 4180 table of flat record dicts; header from the first record."""
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    if not records:
        return ""
    header = list(records[0].keys())
    writer.writerow(header)
    for rec in records:
        writer.writerow([_csv_cell(rec.get(col)) for col in header])
    return buf.getvalue()
