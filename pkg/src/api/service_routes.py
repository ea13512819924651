"""
Service Routes

Blueprint of one generated quantum service: a POST route per manifest entry
plus ``/health``, ``/openapi.yaml`` and an index at ``/``.
"""

import json
from typing import Callable, Mapping

from flask import Blueprint, Response, jsonify, request
from pydantic import ValidationError

from codegen.bundle import ManifestEntry, ServiceBundle
from runtime.backends import Backend, BackendError, UnknownBackendError
from runtime.executor import execute_endpoint
from schemas.api_schemas import RunRequest
from api.middleware import error_response


class RequestBodyError(ValueError):
    def __init__(self, message: str, location: str = "body"):
        super().__init__(message)
        self.message = message
        self.location = location


def parse_run_request(raw: bytes) -> RunRequest:
    """An empty body means all defaults"""
    if not raw.strip():
        return RunRequest()
    try:
        data = json.loads(raw)
    except (ValueError, UnicodeDecodeError) as e:
        raise RequestBodyError(f"body is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise RequestBodyError("body must be a JSON object")
    try:
        return RunRequest.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise RequestBodyError(f"{field}: {first['msg']}", f"body.{field}" if field else "body")


def _run_handler(entry: ManifestEntry, backends: Mapping[str, Backend]) -> Callable[[], Response]:
    def run():
        try:
            run_request = parse_run_request(request.get_data())
        except RequestBodyError as e:
            return error_response("E_BAD_REQUEST", e.message, 400, e.location)

        try:
            result = execute_endpoint(entry, run_request, backends)
        except (UnknownBackendError, BackendError) as e:
            return error_response(e.code, e.message, 502, f"backend.{e.backend_id}")
        return Response(result.to_json(), status=200, mimetype="application/json")

    run.__name__ = f"run_{entry.operation_id}"
    return run


def create_service_blueprint(bundle: ServiceBundle, backends: Mapping[str, Backend]) -> Blueprint:
    service_bp = Blueprint('service', __name__)

    @service_bp.route('/health', methods=['GET'])
    def health_check():
        return jsonify({"status": "ok", "endpoints": len(bundle.manifest)})

    @service_bp.route('/openapi.yaml', methods=['GET'])
    def openapi_document():
        return Response(bundle.effective_openapi, mimetype="application/yaml")

    @service_bp.route('/', methods=['GET'])
    def index():
        return jsonify({
            "title": bundle.title,
            "version": bundle.version,
            "spec_fingerprint": bundle.spec_fingerprint,
            "endpoints": [
                {
                    "path": entry.path,
                    "method": entry.method,
                    "operation_id": entry.operation_id,
                    "backend": entry.backend,
                    "default_shots": entry.default_shots,
                }
                for entry in bundle.manifest
            ],
        })

    for entry in bundle.manifest:
        service_bp.add_url_rule(
            entry.path,
            endpoint=f"run_{entry.operation_id}",
            view_func=_run_handler(entry, backends),
            methods=[entry.method],
        )
    return service_bp
