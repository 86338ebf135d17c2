"""Weighted aggregation into a QualityReport and canonical serialization.

Serialization is canonical so that byte equality is meaningful: fixed
top-level key order, metric entries in M1..M6 order, evidence and
per-sensor maps sorted by key, floats pre-rounded to 12 significant
digits, compact separators, trailing newline.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Sequence

from .errors import AggregationError
from .model import (
    DIMENSIONS,
    METRIC_IDS,
    MetricResult,
    QualityReport,
    _normalize_weights,
)
from .version import __version__

__all__ = ["aggregate", "serialize_report", "deserialize_report"]


def _c12(x: float) -> float:
    """Quantize to 12 significant digits; identity for short decimals."""
    return float(f"{x:.12g}")


def _canonical(value: Any, sort_keys: bool) -> Any:
    if isinstance(value, float):
        return _c12(value)
    if isinstance(value, Mapping):
        items = sorted(value.items()) if sort_keys else value.items()
        return {str(k): _canonical(v, sort_keys) for k, v in items}
    if isinstance(value, (list, tuple)):
        return [_canonical(v, sort_keys) for v in value]
    return value


def aggregate(
    results: Sequence[MetricResult],
    weights: Mapping[str, float],
    *,
    dataset_fingerprint: str = "",
    created_at: str | None = None,
    per_sensor: Mapping[str, Mapping[str, Any]] | None = None,
    tool_version: str = __version__,
) -> QualityReport:
    """Renormalize weights over applicable metrics and build the report.

    Metrics absent from results are recorded as inapplicable; duplicate
    entries for one metric are rejected.
    """
    by_id: dict[str, MetricResult] = {}
    for r in results:
        if r.metric_id in by_id:
            raise AggregationError(f"duplicate result for {r.metric_id}")
        by_id[r.metric_id] = r
    ordered = tuple(
        by_id.get(m, MetricResult.inapplicable(m)) for m in METRIC_IDS
    )
    raw, normalized, agg = _normalize_weights(ordered, weights)
    return QualityReport(
        per_metric=ordered,
        weights_raw=raw,
        weights_normalized=normalized,
        aggregate_score=agg,
        dataset_fingerprint=dataset_fingerprint,
        tool_version=tool_version,
        created_at=created_at,
        per_sensor=dict(per_sensor) if per_sensor is not None else None,
    )


def serialize_report(report: QualityReport) -> bytes:
    """Render the canonical JSON bytes of a report."""
    metrics = []
    for r in report.per_metric:
        metrics.append(
            {
                "id": r.metric_id,
                "dimension": DIMENSIONS[r.metric_id],
                "score": _canonical(r.score, True) if r.score is not None else None,
                "numerator_count": r.numerator_count,
                "denominator_count": r.denominator_count,
                "evidence": _canonical(r.evidence, True),
            }
        )
    doc = {
        "version": report.tool_version,
        "dataset_fingerprint": report.dataset_fingerprint,
        "created_at": report.created_at,
        "metrics": metrics,
        "per_sensor": (
            _canonical(report.per_sensor, True)
            if report.per_sensor is not None
            else None
        ),
        "weights": {
            "raw": {m: _c12(report.weights_raw.get(m, 0.0)) for m in METRIC_IDS},
            "normalized": {
                m: _c12(report.weights_normalized[m])
                for m in METRIC_IDS
                if m in report.weights_normalized
            },
        },
        "aggregate_score": _c12(report.aggregate_score),
    }
    text = json.dumps(doc, separators=(",", ":"), allow_nan=False)
    return text.encode("utf-8") + b"\n"


def deserialize_report(data: "bytes | str") -> QualityReport:
    """Rebuild a QualityReport from canonical JSON bytes."""
    try:
        doc = json.loads(data)
    except ValueError as exc:
        raise AggregationError(f"report is not valid JSON: {exc}") from exc
    expected = {
        "version",
        "dataset_fingerprint",
        "created_at",
        "metrics",
        "per_sensor",
        "weights",
        "aggregate_score",
    }
    if not isinstance(doc, dict) or set(doc) != expected:
        raise AggregationError("report does not have the canonical shape")
    results = []
    for entry in doc["metrics"]:
        results.append(
            MetricResult(
                metric_id=entry["id"],
                score=entry["score"],
                numerator_count=entry["numerator_count"],
                denominator_count=entry["denominator_count"],
                evidence=entry["evidence"],
            )
        )
    return QualityReport(
        per_metric=tuple(results),
        weights_raw=doc["weights"]["raw"],
        weights_normalized=doc["weights"]["normalized"],
        aggregate_score=doc["aggregate_score"],
        dataset_fingerprint=doc["dataset_fingerprint"],
        tool_version=doc["version"],
        created_at=doc["created_at"],
        per_sensor=doc["per_sensor"],
    )
