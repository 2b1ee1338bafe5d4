import socket
import socketserver
import sys
import threading

import pytest

from curvecast_adapter import StdioTransport, TcpTransport, TransportError

ECHO_CHILD = """\
import sys
for line in sys.stdin:
    sys.stdout.write(line)
    sys.stdout.flush()
"""

ONE_SHOT_CHILD = """\
import sys
line = sys.stdin.readline()
sys.stdout.write(line)
sys.stdout.flush()
"""


@pytest.fixture
def child_script(tmp_path):
    def write(body: str) -> tuple[str, ...]:
        path = tmp_path / "child.py"
        path.write_text(body, encoding="utf-8")
        return (sys.executable, str(path))

    return write


def test_stdio_exchange_round_trip(child_script):
    with StdioTransport(command=child_script(ECHO_CHILD)) as transport:
        assert transport.exchange("hello") == "hello"
        assert transport.exchange('{"x": 1}') == '{"x": 1}'


def test_stdio_missing_binary_is_retryable(tmp_path):
    transport = StdioTransport(command=(str(tmp_path / "no-such-engine"),))
    with pytest.raises(TransportError, match="cannot start engine"):
        transport.open()


def test_stdio_child_death_then_respawn(child_script):
    transport = StdioTransport(command=child_script(ONE_SHOT_CHILD))
    assert transport.exchange("first") == "first"
    # The child exits after one line; the failure closes the transport and
    # the next call spawns a fresh child.
    with pytest.raises(TransportError):
        transport.exchange("second")
    assert transport.exchange("third") == "third"
    transport.close()


def test_stdio_close_is_idempotent(child_script):
    transport = StdioTransport(command=child_script(ECHO_CHILD))
    assert transport.exchange("ping") == "ping"
    transport.close()
    transport.close()


class _EchoHandler(socketserver.StreamRequestHandler):
    def handle(self):
        for line in self.rfile:
            self.wfile.write(line)
            self.wfile.flush()


class _OneLineHandler(socketserver.StreamRequestHandler):
    def handle(self):
        line = self.rfile.readline()
        if line:
            self.wfile.write(line)
            self.wfile.flush()


@pytest.fixture
def tcp_server():
    servers = []

    def start(handler) -> int:
        server = socketserver.ThreadingTCPServer(("127.0.0.1", 0), handler)
        server.daemon_threads = True
        threading.Thread(target=server.serve_forever, daemon=True).start()
        servers.append(server)
        return server.server_address[1]

    yield start
    for server in servers:
        server.shutdown()
        server.server_close()


def test_tcp_exchange_round_trip(tcp_server):
    port = tcp_server(_EchoHandler)
    with TcpTransport("127.0.0.1", port) as transport:
        assert transport.exchange("one") == "one"
        assert transport.exchange("two") == "two"


def test_tcp_connect_refused_is_retryable():
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    transport = TcpTransport("127.0.0.1", port, timeout=1.0)
    with pytest.raises(TransportError, match="cannot connect"):
        transport.open()


def test_tcp_reconnects_after_server_hangup(tcp_server):
    port = tcp_server(_OneLineHandler)
    transport = TcpTransport("127.0.0.1", port)
    for _ in range(3):
        # Each connection serves one line then hangs up; the failed exchange
        # closes the transport and the next one reconnects.
        assert transport.exchange("ping") == "ping"
        with pytest.raises(TransportError):
            transport.exchange("pong")
    transport.close()
