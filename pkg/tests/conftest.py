"""
Shared test helpers: source path setup, fixture access, a dict-backed
fetcher and golden-file comparison.
"""

import os
import socket
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from config.settings import Config  # noqa: E402
from quantum.circuit import circuit_from_text  # noqa: E402
from utils.fetcher import FetchError  # noqa: E402

FIXTURES = ROOT / "fixtures"
CIRCUIT_NAMES = ["bell", "ghz3", "flip", "toffoli", "swap", "phases"]


class StaticFetcher:
    """Fetcher answering from a dict; ``default`` answers every other URL"""

    def __init__(self, resources=None, default=None):
        self.resources = dict(resources or {})
        self.default = default
        self.calls = []

    def fetch(self, url: str) -> str:
        self.calls.append(url)
        if url in self.resources:
            return self.resources[url]
        if self.default is not None:
            return self.default
        raise FetchError(url, "not found")


def fixture_path(*parts: str) -> Path:
    return FIXTURES.joinpath(*parts)


def read_fixture(*parts: str) -> str:
    return fixture_path(*parts).read_text(encoding="utf-8")


def load_ir(name: str):
    return circuit_from_text(read_fixture("circuits", f"{name}.ir"))


def assert_golden(name: str, seed: int, body: str) -> None:
    """Byte-compare against fixtures/counts/<name>.<seed>.json.

    Set QSF_RECORD_GOLDEN=1 to (re)write the file instead.
    """
    path = fixture_path("counts", f"{name}.{seed}.json")
    if os.environ.get("QSF_RECORD_GOLDEN") == "1":
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(body.encode("utf-8"))
        return
    assert path.exists(), f"golden file {path} is missing"
    assert path.read_bytes() == body.encode("utf-8")


def free_port() -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def free_port_range(size: int = 20) -> tuple:
    """A range starting at an ephemeral port the OS just handed out"""
    start = free_port()
    end = min(start + size - 1, 65535)
    return start, end


@pytest.fixture
def config(tmp_path):
    settings = Config()
    settings.STATE_DIR = str(tmp_path / "state")
    settings.PORT_RANGE = (8000, 8999)
    settings.BIND_HOST = "127.0.0.1"
    settings.ADVERTISE_HOST = "127.0.0.1"
    settings.DRAIN_TIMEOUT = 2.0
    settings.MOCK_REMOTE_CREDENTIAL = None
    settings.MOCK_REMOTE_FAIL = None
    return settings
