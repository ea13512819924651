import os
from typing import Optional, Tuple
from dotenv import load_dotenv

load_dotenv()


def _env(name: str, default: Optional[str] = None) -> Optional[str]:
    value = os.getenv(f"QSF_{name}")
    return value if value not in (None, "") else default


def parse_port_range(text: str) -> Tuple[int, int]:
    """Parse a ``START-END`` port range string"""
    try:
        start_text, end_text = text.split("-", 1)
        start, end = int(start_text), int(end_text)
    except ValueError:
        raise ValueError(f"Invalid port range '{text}', expected START-END")
    if not (1 <= start <= end <= 65535):
        raise ValueError(f"Invalid port range '{text}', ports must satisfy 1 <= START <= END <= 65535")
    return start, end


class Config:
    """Settings read from QSF_* environment variables (and .env).

    Values are read per instance rather than as class attributes at import:
    CLI flags and tests override one Config without touching any other.
    """

    def __init__(self):
        # Deployer API
        self.PORT = int(_env('PORT', '9000'))
        self.BIND_HOST = _env('BIND_HOST', '127.0.0.1')
        self.PORT_RANGE = parse_port_range(_env('PORT_RANGE', '8000-8999'))
        self.STATE_DIR = _env('STATE_DIR', '.qsf-state')
        self.ADVERTISE_HOST = _env('ADVERTISE_HOST', '127.0.0.1')

        # Fetching and execution
        self.FETCH_TIMEOUT = float(_env('FETCH_TIMEOUT', '10.0'))
        self.MAX_QUBITS = int(_env('MAX_QUBITS', '24'))
        self.DRAIN_TIMEOUT = float(_env('DRAIN_TIMEOUT', '5.0'))

        # Instance supervisor
        self.SUPERVISOR = _env('SUPERVISOR', 'in-process')
        self.EXTERNAL_COMMAND = _env(
            'EXTERNAL_COMMAND',
            'qsf serve {bundle_dir} --port {port} --host {host}'
        )

        # mock-remote backend behaviour
        self.MOCK_REMOTE_CREDENTIAL = _env('MOCK_REMOTE_CREDENTIAL')
        self.MOCK_REMOTE_FAIL = _env('MOCK_REMOTE_FAIL')

        # Logging Configuration
        self.LOG_LEVEL = _env('LOG_LEVEL', 'INFO')
        self.LOG_FILE = _env('LOG_FILE')

    @property
    def port_range_text(self) -> str:
        return f"{self.PORT_RANGE[0]}-{self.PORT_RANGE[1]}"

    def base_url(self, port: int) -> str:
        return f"http://{self.ADVERTISE_HOST}:{port}"
