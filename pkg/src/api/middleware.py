"""
API Middleware Module

Request timing and logging, uniform error bodies, and in-flight request
tracking so a service can drain before it stops.
"""

import threading
import time
from typing import Optional

from flask import Response, g, jsonify, request
from werkzeug.exceptions import HTTPException

from schemas.api_schemas import ErrorBody
from utils.logger import get_logger, log_api_event, log_error

logger = get_logger(__name__)


def error_response(code: str, message: str, status_code: int, location: Optional[str] = None) -> tuple:
    """Create the ``{code, message, location?}`` error body"""
    return jsonify(ErrorBody(code=code, message=message, location=location).to_dict()), status_code


class RequestTracker:
    """Counts in-flight requests; once draining, new requests are refused"""

    def __init__(self):
        self._condition = threading.Condition()
        self._active = 0
        self._draining = False

    @property
    def active(self) -> int:
        with self._condition:
            return self._active

    @property
    def draining(self) -> bool:
        return self._draining

    def enter(self) -> bool:
        with self._condition:
            if self._draining:
                return False
            self._active += 1
            return True

    def leave(self) -> None:
        with self._condition:
            self._active -= 1
            self._condition.notify_all()

    def drain(self, timeout: float) -> bool:
        """Stop admitting requests and wait for the active ones; False on timeout"""
        with self._condition:
            self._draining = True
            return self._condition.wait_for(lambda: self._active == 0, timeout=timeout)


def setup_middleware(app, tracker: Optional[RequestTracker] = None):
    @app.before_request
    def before_request():
        g.start_time = time.time()
        g.tracked = False
        if tracker is not None:
            if not tracker.enter():
                return error_response("E_SHUTTING_DOWN", "service is shutting down", 503)
            g.tracked = True

    @app.after_request
    def after_request(response: Response):
        duration = time.time() - g.get('start_time', time.time())
        log_api_event(request.path, request.method, response.status_code, duration)
        return response

    @app.teardown_request
    def teardown_request(exc):
        if g.get('tracked'):
            tracker.leave()

    @app.errorhandler(404)
    def not_found(e):
        return error_response("E_UNKNOWN_ENDPOINT", f"no endpoint {request.method} {request.path}", 404)

    @app.errorhandler(405)
    def method_not_allowed(e):
        return error_response("E_UNKNOWN_ENDPOINT", f"{request.method} is not allowed on {request.path}", 405)

    @app.errorhandler(Exception)
    def unexpected_error(e):
        if isinstance(e, HTTPException):
            return error_response("E_BAD_REQUEST", e.description or e.name, e.code or 400)
        log_error(e, f"{request.method} {request.path}")
        return error_response("E_INTERNAL", "unexpected server error", 500)
