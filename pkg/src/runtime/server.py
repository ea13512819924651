"""
Service Runtime

Serves a ServiceBundle over HTTP with a threaded werkzeug server running in
a background thread. Manifest and circuits are shared read-only between
request threads; each request allocates its own simulator buffer.
"""

import logging
import threading
from typing import Mapping, Optional

from flask import Flask
from werkzeug.serving import make_server

from api.middleware import RequestTracker, setup_middleware
from api.service_routes import create_service_blueprint
from codegen.bundle import ServiceBundle
from runtime.backends import Backend

logger = logging.getLogger(__name__)

DEFAULT_DRAIN_TIMEOUT = 5.0


class ServiceError(Exception):
    """Raised when a service instance cannot be started"""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


def create_service_app(bundle: ServiceBundle, backends: Mapping[str, Backend],
                       tracker: Optional[RequestTracker] = None) -> Flask:
    """Create the Flask application for one service instance"""
    app = Flask(__name__, static_folder=None)
    app.json.sort_keys = False
    app.register_blueprint(create_service_blueprint(bundle, backends))
    setup_middleware(app, tracker or RequestTracker())
    return app


class ServiceHandle:
    """A running service; ``shutdown`` drains in-flight requests, then stops"""

    def __init__(self, bundle: ServiceBundle, server, thread: threading.Thread,
                 tracker: RequestTracker, host: str, port: int, drain_timeout: float):
        self.bundle = bundle
        self.host = host
        self.port = port
        self.drain_timeout = drain_timeout
        self._server = server
        self._thread = thread
        self._tracker = tracker
        self._lock = threading.Lock()
        self._stopped = False

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    @property
    def running(self) -> bool:
        return not self._stopped and self._thread.is_alive()

    def wait(self, timeout: Optional[float] = None) -> None:
        self._thread.join(timeout)

    def shutdown(self, drain_timeout: Optional[float] = None) -> bool:
        """Stop the service. Requests arriving while draining get 503
        E_SHUTTING_DOWN; requests still running after the drain window are
        cut off. Returns False when the window expired. Idempotent."""
        with self._lock:
            if self._stopped:
                return True
            self._stopped = True

        timeout = self.drain_timeout if drain_timeout is None else drain_timeout
        drained = self._tracker.drain(timeout)
        if not drained:
            logger.warning(f"Service on port {self.port} stopped with {self._tracker.active} request(s) in flight")
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=timeout + 1.0)
        logger.info(f"Service '{self.bundle.title}' on port {self.port} stopped")
        return drained


def serve_bundle(bundle: ServiceBundle, port: int, backends: Mapping[str, Backend],
                 host: str = "127.0.0.1", drain_timeout: float = DEFAULT_DRAIN_TIMEOUT) -> ServiceHandle:
    """Start serving ``bundle`` on ``host:port`` and return once the socket is bound"""
    missing = [backend_id for backend_id in bundle.backend_ids if backend_id not in backends]
    if missing:
        raise ServiceError("E_UNKNOWN_BACKEND", f"backend(s) {', '.join(missing)} not configured")

    tracker = RequestTracker()
    app = create_service_app(bundle, backends, tracker)
    try:
        server = make_server(host, port, app, threaded=True)
    except (OSError, SystemExit) as e:
        # werkzeug reports a bind failure by exiting
        raise ServiceError("E_PORT_IN_USE", f"cannot bind {host}:{port} ({e})")

    thread = threading.Thread(target=server.serve_forever, name=f"qsf-service-{port}", daemon=True)
    thread.start()
    logger.info(f"Serving '{bundle.title}' ({len(bundle.manifest)} endpoint(s)) on http://{host}:{port}")
    return ServiceHandle(bundle, server, thread, tracker, host, port, drain_timeout)
