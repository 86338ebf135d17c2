"""Zero-trust proxy: ciphertext-only object store plus assessment queue.

The proxy never sees plaintext payloads; it stores sealed envelopes,
their non-sensitive routing metadata (content kind, domain label, reply
key), and the assessment queue. Every route is guarded by a bearer
token bound to one role, and any (role, route) pair outside the scope
table answers 403.

Routes:
    PUT  /objects                      assessee: dataset|schema; assessor: config; enclave: report
    GET  /objects/{id}                 enclave: dataset|schema|config; assessee: report
    GET  /attestation                  any role
    POST /attestation                  enclave
    POST /assessments                  assessor
    GET  /assessments/{id}             assessor, assessee
    POST /assessments/claim            enclave
    POST /assessments/{id}/complete    enclave
"""

from __future__ import annotations

import json
import logging
import os
import secrets
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any

from .sealing import envelope_key_ids
from ..errors import SealingError

__all__ = [
    "CONTENT_KINDS",
    "ROLES",
    "AccessToken",
    "SealedObject",
    "ProxyServer",
    "proxy_serve",
]

logger = logging.getLogger(__name__)

CONTENT_KINDS = ("dataset", "schema", "config", "report")
ROLES = ("assessee", "assessor", "enclave")

PUT_SCOPES: dict[str, frozenset[str]] = {
    "dataset": frozenset({"assessee"}),
    "schema": frozenset({"assessee"}),
    "config": frozenset({"assessor"}),
    "report": frozenset({"enclave"}),
}
GET_SCOPES: dict[str, frozenset[str]] = {
    "dataset": frozenset({"enclave"}),
    "schema": frozenset({"enclave"}),
    "config": frozenset({"enclave"}),
    "report": frozenset({"assessee"}),
}

DEFAULT_MAX_OBJECT_BYTES = 1 << 30  # dataset size cap
DEFAULT_TOKEN_TTL = 24 * 3600.0


def _scope_of(principal: str) -> frozenset[tuple[str, str]]:
    scope = set()
    for kind, roles in PUT_SCOPES.items():
        if principal in roles:
            scope.add((kind, "put"))
    for kind, roles in GET_SCOPES.items():
        if principal in roles:
            scope.add((kind, "get"))
    return frozenset(scope)


@dataclass(frozen=True, slots=True)
class AccessToken:
    """Bearer credential bound to one role."""

    token: str
    principal: str
    expiry: float

    @property
    def scope(self) -> frozenset[tuple[str, str]]:
        return _scope_of(self.principal)

    @property
    def expired(self) -> bool:
        return time.time() >= self.expiry


@dataclass(frozen=True, slots=True)
class SealedObject:
    """Stored ciphertext plus its routing metadata."""

    object_id: str
    ciphertext: bytes
    recipient_key_id: str
    sender_key_id: str
    content_kind: str
    created_at: float
    domain: str = ""
    reply_public_key: str = ""


class _Store:
    """Disk-backed object store and in-memory assessment queue."""

    def __init__(self, store_dir: str) -> None:
        self.root = Path(store_dir)
        self.objects_dir = self.root / "objects"
        self.objects_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._assessments: dict[str, dict[str, Any]] = {}
        self._queue: list[str] = []
        self._attestation: "bytes | None" = None

    def _write_atomic(self, path: Path, data: bytes) -> None:
        tmp = path.with_suffix(path.suffix + f".tmp{os.getpid()}")
        tmp.write_bytes(data)
        os.replace(tmp, path)

    def put_object(
        self, kind: str, envelope: bytes, domain: str, reply_public_key: str
    ) -> SealedObject:
        recipient, sender = envelope_key_ids(envelope)
        obj = SealedObject(
            object_id=secrets.token_hex(16),
            ciphertext=envelope,
            recipient_key_id=recipient,
            sender_key_id=sender,
            content_kind=kind,
            created_at=time.time(),
            domain=domain,
            reply_public_key=reply_public_key,
        )
        meta = {
            "object_id": obj.object_id,
            "recipient_key_id": obj.recipient_key_id,
            "sender_key_id": obj.sender_key_id,
            "content_kind": obj.content_kind,
            "created_at": obj.created_at,
            "domain": obj.domain,
            "reply_public_key": obj.reply_public_key,
        }
        with self._lock:
            self._write_atomic(
                self.objects_dir / f"{obj.object_id}.bin", obj.ciphertext
            )
            self._write_atomic(
                self.objects_dir / f"{obj.object_id}.json",
                json.dumps(meta, sort_keys=True).encode("utf-8"),
            )
        return obj

    def get_object(self, object_id: str) -> "SealedObject | None":
        meta_path = self.objects_dir / f"{object_id}.json"
        bin_path = self.objects_dir / f"{object_id}.bin"
        if not meta_path.exists() or not bin_path.exists():
            return None
        meta = json.loads(meta_path.read_bytes())
        return SealedObject(ciphertext=bin_path.read_bytes(), **meta)

    def set_attestation(self, stub: bytes) -> None:
        with self._lock:
            self._attestation = stub
            self._write_atomic(self.root / "attestation.json", stub)

    def get_attestation(self) -> "bytes | None":
        return self._attestation

    def create_assessment(
        self, dataset_id: str, schema_id: str, config_id: str, domain: str
    ) -> "dict[str, Any] | str":
        """New queued assessment, or an error code string."""
        dataset = self.get_object(dataset_id)
        schema = self.get_object(schema_id)
        config = self.get_object(config_id)
        if dataset is None or schema is None or config is None:
            return "unknown_object"
        if dataset.domain != domain:
            return "domain_mismatch"
        record = {
            "assessment_id": secrets.token_hex(16),
            "dataset_id": dataset_id,
            "schema_id": schema_id,
            "config_id": config_id,
            "domain": domain,
            "state": "pending",
            "report_id": None,
            "created_at": time.time(),
        }
        with self._lock:
            self._assessments[record["assessment_id"]] = record
            self._queue.append(record["assessment_id"])
            self._persist_assessments()
        return dict(record)

    def get_assessment(self, assessment_id: str) -> "dict[str, Any] | None":
        with self._lock:
            record = self._assessments.get(assessment_id)
            return dict(record) if record else None

    def claim_assessment(self) -> "dict[str, Any] | None":
        with self._lock:
            while self._queue:
                assessment_id = self._queue.pop(0)
                record = self._assessments.get(assessment_id)
                if record and record["state"] == "pending":
                    record["state"] = "running"
                    self._persist_assessments()
                    return dict(record)
            return None

    def complete_assessment(
        self, assessment_id: str, state: str, report_id: "str | None"
    ) -> bool:
        with self._lock:
            record = self._assessments.get(assessment_id)
            if record is None or record["state"] != "running":
                return False
            record["state"] = state
            record["report_id"] = report_id
            record["completed_at"] = time.time()
            self._persist_assessments()
            return True

    def _persist_assessments(self) -> None:
        self._write_atomic(
            self.root / "assessments.json",
            json.dumps(self._assessments, sort_keys=True).encode("utf-8"),
        )


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: "ProxyServer"

    def log_message(self, format: str, *args: Any) -> None:
        logger.debug("%s %s", self.address_string(), format % args)

    def _send(self, status: int, body: bytes, content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, doc: dict) -> None:
        self._send(status, json.dumps(doc, sort_keys=True).encode("utf-8"))

    def _fail(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _authenticate(self) -> "AccessToken | None":
        header = self.headers.get("Authorization", "")
        if header.startswith("Bearer "):
            token = self.server.lookup_token(header[7:].strip())
            if token is not None and not token.expired:
                return token
        self._fail(401, "invalid or expired token")
        return None

    def _read_body(self) -> "bytes | None":
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            self._fail(400, "bad content length")
            return None
        if length > self.server.max_object_bytes:
            self._fail(413, "object exceeds the size cap")
            self.close_connection = True
            return None
        return self.rfile.read(length)

    def do_PUT(self) -> None:  # noqa: N802 (http.server naming)
        token = self._authenticate()
        if token is None:
            return
        if self.path.rstrip("/") != "/objects":
            self._fail(404, "no such route")
            return
        kind = self.headers.get("X-Content-Kind", "")
        if kind not in CONTENT_KINDS:
            self._fail(400, "unknown content kind")
            return
        if token.principal not in PUT_SCOPES[kind]:
            self._fail(403, "out of scope")
            return
        body = self._read_body()
        if body is None:
            return
        try:
            obj = self.server.store.put_object(
                kind,
                body,
                domain=self.headers.get("X-Domain", ""),
                reply_public_key=self.headers.get("X-Reply-Key", ""),
            )
        except SealingError as exc:
            self._fail(400, str(exc))
            return
        self._send_json(201, {"object_id": obj.object_id})

    def do_GET(self) -> None:  # noqa: N802
        token = self._authenticate()
        if token is None:
            return
        parts = [p for p in self.path.split("/") if p]
        if parts == ["attestation"]:
            stub = self.server.store.get_attestation()
            if stub is None:
                self._fail(404, "no attestation registered")
            else:
                self._send(200, stub)
            return
        if len(parts) == 2 and parts[0] == "objects":
            obj = self.server.store.get_object(parts[1])
            if obj is None or token.principal not in GET_SCOPES.get(
                obj.content_kind, frozenset()
            ):
                # Hide existence from out-of-scope roles only when allowed
                # kinds exist; unknown ids answer 404 for everyone.
                if obj is None:
                    self._fail(404, "no such object")
                else:
                    self._fail(403, "out of scope")
                return
            self.send_response(200)
            self.send_header("Content-Type", "application/octet-stream")
            self.send_header("Content-Length", str(len(obj.ciphertext)))
            self.send_header("X-Content-Kind", obj.content_kind)
            self.send_header("X-Domain", obj.domain)
            self.send_header("X-Reply-Key", obj.reply_public_key)
            self.end_headers()
            self.wfile.write(obj.ciphertext)
            return
        if len(parts) == 2 and parts[0] == "assessments":
            if token.principal not in ("assessor", "assessee"):
                self._fail(403, "out of scope")
                return
            record = self.server.store.get_assessment(parts[1])
            if record is None:
                self._fail(404, "no such assessment")
            else:
                self._send_json(200, record)
            return
        self._fail(404, "no such route")

    def do_POST(self) -> None:  # noqa: N802
        token = self._authenticate()
        if token is None:
            return
        parts = [p for p in self.path.split("/") if p]
        if parts == ["attestation"]:
            if token.principal != "enclave":
                self._fail(403, "out of scope")
                return
            body = self._read_body()
            if body is None:
                return
            self.server.store.set_attestation(body)
            self._send_json(200, {"status": "registered"})
            return
        if parts == ["assessments"]:
            if token.principal != "assessor":
                self._fail(403, "out of scope")
                return
            body = self._read_body()
            if body is None:
                return
            try:
                doc = json.loads(body)
                dataset_id = doc["dataset_id"]
                schema_id = doc["schema_id"]
                config_id = doc["config_id"]
                domain = doc.get("domain", "")
            except (ValueError, KeyError, TypeError):
                self._fail(400, "malformed assessment request")
                return
            outcome = self.server.store.create_assessment(
                dataset_id, schema_id, config_id, domain
            )
            if outcome == "unknown_object":
                self._fail(404, "referenced object not found")
            elif outcome == "domain_mismatch":
                self._fail(409, "config domain does not match the dataset")
            else:
                self._send_json(201, outcome)
            return
        if parts == ["assessments", "claim"]:
            if token.principal != "enclave":
                self._fail(403, "out of scope")
                return
            record = self.server.store.claim_assessment()
            if record is None:
                self._send(204, b"", "text/plain")
            else:
                self._send_json(200, record)
            return
        if len(parts) == 3 and parts[0] == "assessments" and parts[2] == "complete":
            if token.principal != "enclave":
                self._fail(403, "out of scope")
                return
            body = self._read_body()
            if body is None:
                return
            try:
                doc = json.loads(body)
                state = doc["state"]
                report_id = doc.get("report_id")
            except (ValueError, KeyError, TypeError):
                self._fail(400, "malformed completion")
                return
            if state not in ("done", "failed"):
                self._fail(400, "state must be done or failed")
                return
            if self.server.store.complete_assessment(parts[1], state, report_id):
                self._send_json(200, {"status": "recorded"})
            else:
                self._fail(404, "no running assessment with that id")
            return
        self._fail(404, "no such route")


class ProxyServer(ThreadingHTTPServer):
    """Embeddable proxy; issues one bearer token per role at startup."""

    daemon_threads = True

    def __init__(
        self,
        store_dir: str,
        host: str = "127.0.0.1",
        port: int = 0,
        max_object_bytes: int = DEFAULT_MAX_OBJECT_BYTES,
        token_ttl: float = DEFAULT_TOKEN_TTL,
    ) -> None:
        super().__init__((host, port), _Handler)
        self.store = _Store(store_dir)
        self.max_object_bytes = max_object_bytes
        expiry = time.time() + token_ttl
        self._tokens = {
            role: AccessToken(
                token=secrets.token_urlsafe(24), principal=role, expiry=expiry
            )
            for role in ROLES
        }
        self._by_secret = {t.token: t for t in self._tokens.values()}
        self._thread: "threading.Thread | None" = None
        credentials = {role: t.token for role, t in self._tokens.items()}
        (self.store.root / "credentials.json").write_bytes(
            json.dumps(credentials, sort_keys=True).encode("utf-8")
        )

    @property
    def base_url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def token_for(self, role: str) -> str:
        return self._tokens[role].token

    def lookup_token(self, secret: str) -> "AccessToken | None":
        return self._by_secret.get(secret)

    def start(self) -> None:
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=5)
        self.server_close()


def proxy_serve(
    store_dir: str,
    bind_addr: str = "127.0.0.1:0",
    max_object_bytes: int = DEFAULT_MAX_OBJECT_BYTES,
) -> None:
    """Run the proxy in the foreground; prints the per-role tokens."""
    host, _, port_text = bind_addr.partition(":")
    server = ProxyServer(
        store_dir,
        host=host or "127.0.0.1",
        port=int(port_text or "0"),
        max_object_bytes=max_object_bytes,
    )
    print(f"proxy listening on {server.base_url}")
    for role in ROLES:
        print(f"token[{role}] = {server.token_for(role)}")
    print(f"credentials written to {server.store.root / 'credentials.json'}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
