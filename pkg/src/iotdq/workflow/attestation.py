"""Code-hash attestation stub for the simulated enclave.

The hash covers every Python source file of this package (sorted
relative paths, path and content both digested), standing in for a real
TEE measurement. A hardware attestation backend can replace this module
without touching the rest of the workflow.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import AttestationError

__all__ = ["AttestationStub", "compute_code_hash"]


def compute_code_hash() -> str:
    """Digest of the package's Python sources."""
    root = Path(__file__).resolve().parent.parent
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*.py")):
        rel = path.relative_to(root).as_posix()
        digest.update(rel.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(path.read_bytes())
        digest.update(b"\x00")
    return digest.hexdigest()


@dataclass(frozen=True, slots=True)
class AttestationStub:
    """Published enclave identity: code measurement and sealing key."""

    code_hash: str
    enclave_public_key: bytes

    def to_json(self) -> bytes:
        doc = {
            "code_hash": self.code_hash,
            "enclave_public_key": base64.b64encode(self.enclave_public_key).decode(
                "ascii"
            ),
        }
        return json.dumps(doc, sort_keys=True).encode("utf-8")

    @classmethod
    def from_json(cls, data: "bytes | str") -> "AttestationStub":
        try:
            doc = json.loads(data)
            return cls(
                code_hash=doc["code_hash"],
                enclave_public_key=base64.b64decode(doc["enclave_public_key"]),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise AttestationError(f"malformed attestation stub: {exc}") from exc
