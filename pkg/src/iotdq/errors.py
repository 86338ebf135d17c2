"""Exception hierarchy shared across the package."""

from __future__ import annotations

__all__ = [
    "IotDqError",
    "ConfigError",
    "IngestFormatError",
    "DatasetRejectedError",
    "SchemaError",
    "DegenerateIatError",
    "AggregationError",
    "GenSpecError",
    "SealingError",
    "AttestationError",
    "WorkflowError",
    "ReportNotReady",
]


class IotDqError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(IotDqError):
    """Invalid assessment configuration."""


class IngestFormatError(IotDqError):
    """Unreadable source or unknown dataset format."""


class DatasetRejectedError(IotDqError):
    """Dataset unfit for assessment (more than half of records malformed)."""


class SchemaError(IotDqError):
    """Malformed schema document or schema invariant violation."""


class DegenerateIatError(IotDqError):
    """Mode estimation failed: no positive modal bin down to 1 ms."""


class AggregationError(IotDqError):
    """No applicable metric to aggregate, or weights unusable."""


class GenSpecError(IotDqError):
    """Synthetic generator spec is infeasible or out of range."""


class SealingError(IotDqError):
    """Sealed envelope malformed, tampered, or addressed to another key."""


class AttestationError(IotDqError):
    """Enclave code hash does not match the pinned expectation."""


class WorkflowError(IotDqError):
    """Proxy interaction failed (transport, status, or protocol error)."""


class ReportNotReady(WorkflowError):
    """Assessment still queued or running; retry later."""
