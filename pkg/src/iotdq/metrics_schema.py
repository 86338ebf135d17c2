"""Schema-adherence metrics: mandatory presence (M4), unknown attributes (M5),
format conformity (M6). All three are per-packet violation ratios over the
verdicts produced by the schema module."""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from .model import MetricResult
from .schema import FORMAT_KINDS, PacketVerdict

__all__ = ["m4_mandatory", "m5_unknown", "m6_format"]


def _by_attribute(
    verdicts: Sequence[PacketVerdict], kinds: frozenset[str]
) -> dict[str, int]:
    counter: Counter[str] = Counter()
    for v in verdicts:
        for attribute, kind in v.detail:
            if kind in kinds:
                counter[attribute] += 1
    return dict(sorted(counter.items()))


def m4_mandatory(verdicts: Sequence[PacketVerdict]) -> MetricResult:
    """Share of packets carrying every mandatory attribute."""
    total = len(verdicts)
    if total == 0:
        return MetricResult.inapplicable("M4")
    bad = sum(1 for v in verdicts if v.missing_mandatory)
    evidence = {"by_attribute": _by_attribute(verdicts, frozenset({"missing"}))}
    return MetricResult.ratio("M4", bad, total, evidence)


def m5_unknown(verdicts: Sequence[PacketVerdict]) -> MetricResult:
    """Share of packets free of attributes the schema does not declare."""
    total = len(verdicts)
    if total == 0:
        return MetricResult.inapplicable("M5")
    bad = sum(1 for v in verdicts if v.has_unknown)
    evidence = {"by_attribute": _by_attribute(verdicts, frozenset({"unknown"}))}
    return MetricResult.ratio("M5", bad, total, evidence)


def m6_format(verdicts: Sequence[PacketVerdict]) -> MetricResult:
    """Share of packets whose present, known attributes match their formats."""
    total = len(verdicts)
    if total == 0:
        return MetricResult.inapplicable("M6")
    bad = sum(1 for v in verdicts if v.has_format_error)
    evidence = {"by_attribute": _by_attribute(verdicts, FORMAT_KINDS)}
    return MetricResult.ratio("M6", bad, total, evidence)
