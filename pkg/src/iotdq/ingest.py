"""Dataset ingestion: NDJSON, CSV, and JSON-array sources to packets.

Timestamps are normalized to integer epoch milliseconds. Numeric values
below 1e11 are read as epoch seconds (fractions allowed), larger ones as
epoch milliseconds; strings are parsed as RFC 3339 / ISO 8601, naive
times taken as UTC. Nested objects are flattened with dotted paths.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from .errors import DatasetRejectedError, IngestFormatError
from .metrics_iat import packet_key
from .model import AssessmentConfig, DataPacket, SensorStream

__all__ = [
    "FORMATS",
    "IngestError",
    "RawDataset",
    "parse_timestamp",
    "iter_records",
    "parse_dataset",
    "group_by_sensor",
    "compute_iats",
]

FORMATS = ("ndjson", "csv", "json_array")

_EPOCH_MS_FLOOR = 1e11  # numeric timestamps at or above this are milliseconds
_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_MISSING = object()


@dataclass(frozen=True, slots=True)
class IngestError:
    """One malformed record: its position in the source and the cause."""

    record_index: int
    reason: str


@dataclass(slots=True)
class RawDataset:
    """A dataset source awaiting parsing; packet_count is filled post-parse."""

    format: str
    source: bytes
    packet_count: int = 0

    def parse(
        self, config: AssessmentConfig
    ) -> tuple[list[DataPacket], list[IngestError]]:
        packets, errors = parse_dataset(self.source, self.format, config)
        self.packet_count = len(packets)
        return packets, errors


def parse_timestamp(value: Any) -> int:
    """Normalize a record timestamp to integer epoch milliseconds."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a timestamp")
    if isinstance(value, (int, float)):
        v = float(value)
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError("non-finite timestamp")
        if abs(v) >= _EPOCH_MS_FLOOR:
            return int(round(v))
        return int(round(v * 1000.0))
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty timestamp")
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(text)
        except ValueError as exc:
            raise ValueError(f"unparseable timestamp {value!r}") from exc
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(round(dt.timestamp() * 1000.0))
    raise ValueError(f"unsupported timestamp type {type(value).__name__}")


def _coerce_csv_value(text: str) -> Any:
    if text == "":
        return None
    lowered = text.lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    if _INT_RE.match(text):
        return int(text)
    if _FLOAT_RE.match(text):
        return float(text)
    return text


def iter_records(
    source: bytes, format: str
) -> Iterator[tuple[int, "Mapping[str, Any] | None", "str | None"]]:
    """Yield (record_index, record, error_reason) triples from raw bytes.

    Exactly one of record / error_reason is set per yielded item. Record
    indices are positions in the record sequence (blank NDJSON lines are
    skipped without consuming an index).
    """
    if format == "ndjson":
        index = 0
        for line in source.splitlines():
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except ValueError as exc:
                yield index, None, f"invalid JSON: {exc}"
            else:
                if isinstance(record, dict):
                    yield index, record, None
                else:
                    yield index, None, "record is not a JSON object"
            index += 1
        return
    if format == "csv":
        try:
            text = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IngestFormatError(f"CSV source is not UTF-8: {exc}") from exc
        reader = csv.DictReader(
            io.StringIO(text, newline=""), restkey=None, restval=_MISSING
        )
        if reader.fieldnames is None:
            return
        for index, row in enumerate(reader):
            if None in row:
                yield index, None, "row has more fields than the header"
                continue
            record = {
                k: _coerce_csv_value(v) for k, v in row.items() if v is not _MISSING
            }
            yield index, record, None
        return
    if format == "json_array":
        try:
            doc = json.loads(source)
        except ValueError as exc:
            raise IngestFormatError(f"source is not valid JSON: {exc}") from exc
        if not isinstance(doc, list):
            raise IngestFormatError("JSON source must be an array of objects")
        for index, record in enumerate(doc):
            if isinstance(record, dict):
                yield index, record, None
            else:
                yield index, None, "record is not a JSON object"
        return
    raise IngestFormatError(f"unknown dataset format: {format!r}")


def flatten_attributes(
    record: Mapping[str, Any], skip: frozenset[str]
) -> dict[str, Any]:
    """Flatten nested objects with dotted paths; reject non-scalar leaves."""
    out: dict[str, Any] = {}
    stack: list[tuple[str, Mapping[str, Any]]] = [("", record)]
    while stack:
        prefix, mapping = stack.pop()
        for key, value in mapping.items():
            if not prefix and key in skip:
                continue
            path = f"{prefix}{key}"
            if isinstance(value, dict):
                stack.append((f"{path}.", value))
            elif isinstance(value, (list, tuple)):
                raise ValueError(f"attribute {path!r} has a non-scalar value")
            else:
                out[path] = value
    return out


def _packet_from_record(
    record: Mapping[str, Any], config: AssessmentConfig
) -> DataPacket:
    if config.timestamp_field not in record:
        raise ValueError(f"missing timestamp field {config.timestamp_field!r}")
    timestamp_ms = parse_timestamp(record[config.timestamp_field])
    raw_id = record.get(config.sensor_id_field)
    if isinstance(raw_id, bool) or raw_id is None:
        raise ValueError(f"missing sensor id field {config.sensor_id_field!r}")
    if isinstance(raw_id, int):
        sensor_id = str(raw_id)
    elif isinstance(raw_id, str) and raw_id.strip():
        sensor_id = raw_id
    else:
        raise ValueError("sensor id must be a non-empty string or integer")
    skip = frozenset((config.timestamp_field, config.sensor_id_field))
    attributes = flatten_attributes(record, skip)
    return DataPacket(
        sensor_id=sensor_id, timestamp_ms=timestamp_ms, attributes=attributes
    )


def parse_dataset(
    source: bytes, format: str, config: AssessmentConfig
) -> tuple[list[DataPacket], list[IngestError]]:
    """Parse raw bytes into packets; malformed records become IngestErrors.

    Raises DatasetRejectedError when more than half of the records are
    malformed, and IngestFormatError for unreadable sources.
    """
    packets: list[DataPacket] = []
    errors: list[IngestError] = []
    for index, record, reason in iter_records(source, format):
        if record is None:
            errors.append(IngestError(index, reason or "malformed record"))
            continue
        try:
            packets.append(_packet_from_record(record, config))
        except ValueError as exc:
            errors.append(IngestError(index, str(exc)))
    total = len(packets) + len(errors)
    if total and len(errors) * 2 > total:
        raise DatasetRejectedError(
            f"{len(errors)} of {total} records malformed (more than half)"
        )
    return packets, errors


def _iats_from_sorted(
    packets: Sequence[DataPacket], duplicate_key: str
) -> tuple[np.ndarray, int]:
    """Deduplicated IATs (seconds) and unique count from sorted packets."""
    seen: set = set()
    ts: list[int] = []
    for p in packets:
        key = packet_key(p, duplicate_key)
        if key not in seen:
            seen.add(key)
            ts.append(p.timestamp_ms)
    arr = np.asarray(ts, dtype=np.int64)
    if arr.size < 2:
        return np.empty(0, dtype=np.float64), int(arr.size)
    return np.diff(arr) / 1000.0, int(arr.size)


def group_by_sensor(
    packets: Sequence[DataPacket], duplicate_key: str = "id_timestamp"
) -> list[SensorStream]:
    """One time-sorted stream per sensor, first-appearance order, stable ties."""
    order: dict[str, list[DataPacket]] = {}
    for p in packets:
        order.setdefault(p.sensor_id, []).append(p)
    streams: list[SensorStream] = []
    for sensor_id, group in order.items():
        group.sort(key=lambda p: p.timestamp_ms)
        iats, unique = _iats_from_sorted(group, duplicate_key)
        streams.append(
            SensorStream(
                sensor_id=sensor_id,
                packets=tuple(group),
                iat_seconds=iats,
                unique_count=unique,
            )
        )
    return streams


def compute_iats(
    stream: SensorStream, duplicate_key: str = "id_timestamp"
) -> list[float]:
    """Inter-arrival times in seconds over the deduplicated sorted stream."""
    iats, _unique = _iats_from_sorted(stream.packets, duplicate_key)
    return [float(x) for x in iats]
