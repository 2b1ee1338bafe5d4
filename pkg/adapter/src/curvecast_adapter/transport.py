"""Connections to a running estimation engine.

The engine speaks a newline-delimited JSON protocol: one request line in,
one response line out.  Both transports expose that as ``exchange``.  Any
connection-level failure closes the transport and raises ``TransportError``;
the next call opens a fresh connection, so callers can simply retry.  What
the lines mean is the client layer's business.
"""

from __future__ import annotations

import socket
import subprocess
from typing import Optional, Sequence

from .errors import TransportError

_CLOSE_WAIT = 5.0

DEFAULT_SERVE_COMMAND = ("curvecast", "serve", "--transport", "stdio")


class Transport:
    """One-line-in, one-line-out connection to an engine."""

    def open(self) -> None:
        raise NotImplementedError

    def exchange(self, line: str) -> str:
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError

    def __enter__(self) -> "Transport":
        self.open()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


class StdioTransport(Transport):
    """Engine as a child process, lines over its stdin/stdout.

    ``command`` is the full argv of an engine that serves the protocol over
    stdio; ``serve_args`` appends flags such as ``--profile`` or ``--e-max``.
    The default expects the ``curvecast`` CLI on PATH.  Note a respawned
    child is a fresh engine: sessions do not survive a stdio reconnect.
    """

    def __init__(
        self,
        command: Sequence[str] = DEFAULT_SERVE_COMMAND,
        serve_args: Sequence[str] = (),
    ):
        self._argv = [*command, *serve_args]
        self._proc: Optional[subprocess.Popen] = None

    def open(self) -> None:
        if self._proc is not None:
            if self._proc.poll() is None:
                return
            self.close()
        try:
            self._proc = subprocess.Popen(
                self._argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise TransportError(f"cannot start engine {self._argv[0]!r}: {exc}") from exc

    def exchange(self, line: str) -> str:
        self.open()
        proc = self._proc
        assert proc is not None and proc.stdin is not None and proc.stdout is not None
        try:
            proc.stdin.write(line + "\n")
            proc.stdin.flush()
        except (OSError, ValueError) as exc:
            self.close()
            raise TransportError(f"engine write failed: {exc}") from exc
        reply = proc.stdout.readline()
        if reply == "":
            self.close()
            raise TransportError("engine closed the connection")
        return reply.rstrip("\n")

    def close(self) -> None:
        if self._proc is None:
            return
        proc, self._proc = self._proc, None
        for pipe in (proc.stdin, proc.stdout):
            if pipe is not None:
                try:
                    pipe.close()
                except OSError:
                    pass
        try:
            proc.wait(timeout=_CLOSE_WAIT)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


class TcpTransport(Transport):
    """Engine behind a TCP socket, one line per message.

    The engine outlives connections, so a reconnect after a failure resumes
    the same sessions.
    """

    def __init__(self, host: str, port: int, timeout: float = 10.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self._sock: Optional[socket.socket] = None
        self._reader = None

    def open(self) -> None:
        if self._sock is not None:
            return
        try:
            sock = socket.create_connection((self.host, self.port), timeout=self.timeout)
        except OSError as exc:
            raise TransportError(f"cannot connect to {self.host}:{self.port}: {exc}") from exc
        self._sock = sock
        self._reader = sock.makefile("r", encoding="utf-8")

    def exchange(self, line: str) -> str:
        self.open()
        assert self._sock is not None and self._reader is not None
        try:
            self._sock.sendall((line + "\n").encode("utf-8"))
            reply = self._reader.readline()
        except OSError as exc:
            self.close()
            raise TransportError(f"engine connection failed: {exc}") from exc
        if reply == "":
            self.close()
            raise TransportError("engine closed the connection")
        return reply.rstrip("\n")

    def close(self) -> None:
        if self._sock is None:
            return
        sock, self._sock = self._sock, None
        reader, self._reader = self._reader, None
        if reader is not None:
            try:
                reader.close()
            except OSError:
                pass
        try:
            sock.close()
        except OSError:
            pass
