"""Line-protocol query server over a loaded model.

One request per line:

    NN <token> <k> <libraryId>   ->  k lines "<token>\\t<cosine>" then a blank line
    SIM <tok1> <tok2>            ->  one line with the cosine

Malformed requests get a single ``ERR <message>`` line; the connection and the
process stay up.  The model is read-only after load, so any number of handler
threads can share it without locks.
"""

from __future__ import annotations

import socketserver
import threading

from .evaluate import NeighborIndex
from .model import EmbeddingModel

__all__ = ["QueryServer", "handle_request"]


def handle_request(index: NeighborIndex, line: str) -> list:
    """Response lines for one request line (no trailing newlines)."""
    parts = line.split()
    if not parts:
        return ["ERR empty request"]
    verb = parts[0]
    if verb == "NN":
        if len(parts) != 4:
            return ["ERR usage: NN <token> <k> <libraryId>"]
        token = parts[1]
        try:
            k = int(parts[2])
            library = int(parts[3])
        except ValueError:
            return ["ERR k and libraryId must be integers"]
        if k < 1:
            return ["ERR k must be >= 1"]
        if token not in index.model.dictionary.token_to_id:
            return ["ERR unknown token"]
        results = index.nearest(token, k, library)
        return [f"{name}\t{score:.6f}" for name, score in results] + [""]
    if verb == "SIM":
        if len(parts) != 3:
            return ["ERR usage: SIM <tok1> <tok2>"]
        vocab = index.model.dictionary.token_to_id
        if parts[1] not in vocab or parts[2] not in vocab:
            return ["ERR unknown token"]
        try:
            return [f"{index.similarity(parts[1], parts[2]):.6f}"]
        except ValueError as exc:
            return [f"ERR {exc}"]
    return [f"ERR unknown command {verb}"]


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        index = self.server.index  # type: ignore[attr-defined]
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").rstrip("\r\n")
            response = "\n".join(handle_request(index, line)) + "\n"
            try:
                self.wfile.write(response.encode("utf-8"))
                self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                return


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class QueryServer:
    """TCP server answering NN/SIM queries; port 0 picks a free port."""

    def __init__(self, model: EmbeddingModel, host: str = "127.0.0.1", port: int = 0):
        self._server = _Server((host, port), _Handler)
        self._server.index = NeighborIndex(model)
        self._thread = None

    @property
    def address(self):
        return self._server.server_address

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    def serve_forever(self):
        self._server.serve_forever()

    def start_background(self):
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def shutdown(self):
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
