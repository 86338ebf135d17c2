"""Schema-adherence metric scores over packet verdicts."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iotdq.metrics_schema import m4_mandatory, m5_unknown, m6_format
from iotdq.model import DataPacket
from iotdq.schema import PacketVerdict, parse_schema, validate_packet

SCHEMA = parse_schema(
    {
        "properties": {
            "pm25": {"type": "number", "minimum": 0, "maximum": 500},
            "temperature": {"type": "number"},
        },
        "required": ["pm25", "temperature"],
    }
)


def _verdicts(attribute_maps: list[dict], checks: str = "types_only") -> list[PacketVerdict]:
    return [
        validate_packet(DataPacket("s1", i, attrs), SCHEMA, format_checks=checks)
        for i, attrs in enumerate(attribute_maps)
    ]


class TestM4:
    def test_one_missing_among_four(self) -> None:
        verdicts = _verdicts(
            [
                {"pm25": 1.0, "temperature": 2.0},
                {"pm25": 1.0, "temperature": 2.0},
                {"pm25": 1.0},
                {"pm25": 1.0, "temperature": 2.0},
            ]
        )
        result = m4_mandatory(verdicts)
        assert result.score == 0.75
        assert result.numerator_count == 1
        assert result.denominator_count == 4
        assert result.evidence["by_attribute"] == {"temperature": 1}

    def test_packet_missing_both_counts_once(self) -> None:
        verdicts = _verdicts([{}, {"pm25": 1.0, "temperature": 2.0}])
        result = m4_mandatory(verdicts)
        assert result.score == 0.5
        assert result.evidence["by_attribute"] == {"pm25": 1, "temperature": 1}

    def test_empty_is_inapplicable(self) -> None:
        assert m4_mandatory([]).score is None


class TestM5:
    def test_unknown_attribute_share(self) -> None:
        verdicts = _verdicts(
            [
                {"pm25": 1.0, "temperature": 2.0, "debug": 1},
                {"pm25": 1.0, "temperature": 2.0},
            ]
        )
        result = m5_unknown(verdicts)
        assert result.score == 0.5
        assert result.evidence["by_attribute"] == {"debug": 1}

    def test_several_unknowns_in_one_packet_count_once(self) -> None:
        verdicts = _verdicts(
            [{"pm25": 1.0, "temperature": 2.0, "a": 1, "b": 2}] * 2
        )
        result = m5_unknown(verdicts)
        assert result.score == 0.0
        assert result.numerator_count == 2
        assert result.evidence["by_attribute"] == {"a": 2, "b": 2}

    def test_empty_is_inapplicable(self) -> None:
        assert m5_unknown([]).score is None


class TestM6:
    def test_type_violation_share(self) -> None:
        verdicts = _verdicts(
            [
                {"pm25": "high", "temperature": 2.0},
                {"pm25": 1.0, "temperature": 2.0},
                {"pm25": 1.0, "temperature": 2.0},
                {"pm25": 1.0, "temperature": 2.0},
            ]
        )
        result = m6_format(verdicts)
        assert result.score == 0.75
        assert result.evidence["by_attribute"] == {"pm25": 1}

    def test_full_checks_count_range_violations(self) -> None:
        maps = [{"pm25": 900.0, "temperature": 2.0}, {"pm25": 1.0, "temperature": 2.0}]
        assert m6_format(_verdicts(maps, "types_only")).score == 1.0
        assert m6_format(_verdicts(maps, "full")).score == 0.5

    def test_missing_attribute_is_not_a_format_error(self) -> None:
        verdicts = _verdicts([{"pm25": 1.0}])
        assert m6_format(verdicts).score == 1.0
        assert m4_mandatory(verdicts).score == 0.0

    def test_unknown_attribute_is_not_a_format_error(self) -> None:
        verdicts = _verdicts([{"pm25": 1.0, "temperature": 2.0, "x": object()}])
        assert m6_format(verdicts).score == 1.0
        assert m5_unknown(verdicts).score == 0.0

    def test_empty_is_inapplicable(self) -> None:
        assert m6_format([]).score is None


class TestCrossMetricIndependence:
    @settings(max_examples=100, deadline=None)
    @given(
        flags=st.lists(
            st.tuples(st.booleans(), st.booleans(), st.booleans()),
            min_size=1,
            max_size=40,
        )
    )
    def test_each_score_counts_only_its_own_flag(
        self, flags: list[tuple[bool, bool, bool]]
    ) -> None:
        maps = []
        for missing, unknown, bad_type in flags:
            attrs: dict = {"pm25": "x" if bad_type else 1.0, "temperature": 2.0}
            if missing:
                del attrs["temperature"]
            if unknown:
                attrs["extra"] = 1
            maps.append(attrs)
        verdicts = _verdicts(maps)
        n = len(flags)
        assert m4_mandatory(verdicts).score == 1.0 - sum(f[0] for f in flags) / n
        assert m5_unknown(verdicts).score == 1.0 - sum(f[1] for f in flags) / n
        assert m6_format(verdicts).score == 1.0 - sum(f[2] for f in flags) / n
