"""Shared fixtures and dataset-building helpers."""

from __future__ import annotations

import json
from typing import Any, Iterable, Mapping

import pytest

from iotdq import parse_schema
from iotdq.schema import SchemaDocument
from iotdq.synthgen import DEFAULT_SCHEMA


def ndjson_bytes(records: Iterable[Mapping[str, Any]]) -> bytes:
    lines = [json.dumps(dict(r), separators=(",", ":")) for r in records]
    return ("\n".join(lines) + "\n").encode("utf-8")


@pytest.fixture
def demo_schema_bytes() -> bytes:
    return json.dumps(DEFAULT_SCHEMA).encode("utf-8")


@pytest.fixture
def demo_schema(demo_schema_bytes: bytes) -> SchemaDocument:
    return parse_schema(demo_schema_bytes)
