"""Decryptor server and Alice's client over a plain TCP stream.

One connection carries exactly one request frame and one reply frame.
The server loads a single decryptor keystore; the consumed flag is written
back to that file before any response frame is sent, so a restarted
server keeps refusing a session it has already answered.
"""

from __future__ import annotations

import logging
import os
import socket
import socketserver
import threading

from .errors import (
    InvalidRequestError,
    MalformedFrameError,
    ProtocolError,
    SingleUseViolation,
)
from .keystore import KeystoreRecord, keystore_load, keystore_save
from .protocol import (
    BlindRequest,
    BlindResponse,
    CiphertextBatch,
    ErrorReason,
    ErrorReply,
    alice_finish,
    alice_receive,
    alice_request,
    decryptor_respond,
)
from .wire import decode_frame, encode_frame, read_frame

log = logging.getLogger(__name__)

CONNECTION_TIMEOUT = 10.0
_NO_SESSION = bytes(16)


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host or "127.0.0.1", int(port)


class _Handler(socketserver.StreamRequestHandler):
    timeout = CONNECTION_TIMEOUT

    def handle(self) -> None:
        server: DecryptorServer = self.server  # type: ignore[assignment]
        reply = server.answer(self.rfile)
        try:
            self.wfile.write(encode_frame(reply, server.view.p))
            self.wfile.flush()
        except OSError as exc:
            log.warning("could not deliver reply: %s", exc)


class DecryptorServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], keystore_path: str | os.PathLike) -> None:
        self.keystore_path = keystore_path
        self.record: KeystoreRecord = keystore_load(keystore_path)
        if self.record.role != "decryptor":
            raise ProtocolError(f"serve needs a decryptor keystore, got {self.record.role}")
        self.view = self.record.to_view()
        super().__init__(address, _Handler)

    @property
    def address(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def _persist_consumed(self) -> None:
        self.record = self.record.with_consumed()
        keystore_save(self.record, self.keystore_path)

    def answer(self, stream) -> BlindResponse | ErrorReply:
        session_id = self.view.session_id
        try:
            msg = decode_frame(read_frame(stream), self.view.p)
        except (MalformedFrameError, socket.timeout, OSError) as exc:
            log.info("malformed frame: %s", exc)
            return ErrorReply(_NO_SESSION, ErrorReason.MALFORMED_FRAME)
        if not isinstance(msg, BlindRequest):
            return ErrorReply(msg.session_id, ErrorReason.INVALID_REQUEST)
        try:
            return decryptor_respond(self.view, msg, on_consume=self._persist_consumed)
        except SingleUseViolation:
            return ErrorReply(session_id, ErrorReason.SINGLE_USE_VIOLATION)
        except ProtocolError as exc:
            log.info("rejected request: %s", exc)
            return ErrorReply(msg.session_id, ErrorReason.INVALID_REQUEST)


def start_server(keystore_path: str | os.PathLike, host: str = "127.0.0.1", port: int = 0) -> DecryptorServer:
    """Start a server on a background thread; call ``shutdown()`` then ``server_close()``."""
    server = DecryptorServer((host, port), keystore_path)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    return server


def exchange(address: tuple[str, int], frame: bytes, timeout: float = CONNECTION_TIMEOUT) -> bytes:
    with socket.create_connection(address, timeout=timeout) as sock:
        sock.sendall(frame)
        sock.shutdown(socket.SHUT_WR)
        with sock.makefile("rb") as stream:
            return read_frame(stream)


_ERRORS = {
    ErrorReason.SINGLE_USE_VIOLATION: SingleUseViolation,
    ErrorReason.INVALID_REQUEST: InvalidRequestError,
    ErrorReason.MALFORMED_FRAME: MalformedFrameError,
}


def fetch(alice: KeystoreRecord, batch_frame: bytes, i: int, address: tuple[str, int]) -> int:
    """Run Alice's side end to end and return the plaintext of ciphertext ``i`` (1-based)."""
    if alice.role != "alice":
        raise ProtocolError(f"fetch needs an alice keystore, got {alice.role}")
    view = alice.to_view()
    batch = decode_frame(batch_frame, view.p)
    if not isinstance(batch, CiphertextBatch):
        raise ProtocolError("batch file does not hold a ciphertext batch frame")
    state = alice_receive(view, batch)
    request = alice_request(state, i, view)
    reply = decode_frame(exchange(address, encode_frame(request, view.p)), view.p)
    if isinstance(reply, ErrorReply):
        raise _ERRORS[reply.reason](f"decryptor refused: {reply.reason.name.lower()}")
    if not isinstance(reply, BlindResponse):
        raise ProtocolError(f"unexpected reply {type(reply).__name__}")
    return alice_finish(state, reply, view)
