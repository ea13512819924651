"""
Port Registry

Hands out the lowest free port of a configured range. Reservation and the
OS bind check happen under one lock, so concurrent deploys never receive the
same port.
"""

import socket
import threading
from typing import Callable, FrozenSet


class PortExhaustedError(Exception):
    def __init__(self, start: int, end: int):
        super().__init__(f"no free port in {start}-{end}")
        self.code = "E_NO_PORTS"
        self.message = str(self)


def os_port_free(port: int, host: str = "127.0.0.1") -> bool:
    """True when ``host:port`` can be bound right now"""
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
        except OSError:
            return False
    return True


class PortRegistry:
    def __init__(self, start: int, end: int, port_is_free: Callable[[int], bool] = os_port_free):
        if not 1 <= start <= end <= 65535:
            raise ValueError(f"invalid port range {start}-{end}")
        self.start = start
        self.end = end
        self._port_is_free = port_is_free
        self._allocated = set()
        self._lock = threading.Lock()

    @property
    def allocated(self) -> FrozenSet[int]:
        with self._lock:
            return frozenset(self._allocated)

    def allocate(self) -> int:
        """Reserve the lowest port that is neither allocated nor bound by the OS"""
        with self._lock:
            for port in range(self.start, self.end + 1):
                # OS-occupied ports are skipped, not reserved
                if port in self._allocated or not self._port_is_free(port):
                    continue
                self._allocated.add(port)
                return port
        raise PortExhaustedError(self.start, self.end)

    def release(self, port: int) -> None:
        with self._lock:
            self._allocated.discard(port)
