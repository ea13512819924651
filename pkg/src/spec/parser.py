"""
Spec Parser

Reads an OpenAPI 3.x skeleton carrying the ``x-quantum`` extension into an
``ApiSpec``. Parsing never raises: every problem becomes a Diagnostic and all
of them are returned together.
"""

import hashlib
import keyword
import re
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml

from spec.diagnostics import Diagnostic, error, has_errors, sort_diagnostics, warning
from spec.models import (
    DEFAULT_BACKEND, DEFAULT_SHOTS, MAX_SHOTS,
    ApiSpec, CodeFormat, EndpointDef, QuantumBinding, SourceKind,
)

HTTP_METHODS = {"get", "put", "post", "delete", "options", "head", "patch", "trace"}
PATH_ITEM_KEYS = {"summary", "description", "parameters", "servers"}
BINDING_KEYS = {"quirk-url", "code-url", "code-format", "inline-qasm", "default-shots", "backend"}

_PATH_RE = re.compile(r"/[A-Za-z0-9\-._~/]*")
_IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_BACKEND_RE = re.compile(r"[a-z0-9][a-z0-9\-]*")


class _Mapping(dict):
    """dict that also keeps every key occurrence (duplicates included) with its line"""

    def __init__(self):
        super().__init__()
        self.entries: List[Tuple[Any, Any, int]] = []

    def add(self, key: Any, value: Any, line: int) -> None:
        self.entries.append((key, value, line))
        self[key] = value

    def line_of(self, key: Any, default: int = 0) -> int:
        for entry_key, _, line in self.entries:
            if entry_key == key:
                return line
        return default


class _SpecLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader: _SpecLoader, node: yaml.MappingNode) -> _Mapping:
    loader.flatten_mapping(node)
    mapping = _Mapping()
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        value = loader.construct_object(value_node, deep=True)
        mapping.add(key, value, key_node.start_mark.line + 1)
    return mapping


_SpecLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _entries(mapping: Any) -> List[Tuple[Any, Any, int]]:
    if isinstance(mapping, _Mapping):
        return mapping.entries
    return [(key, value, 0) for key, value in mapping.items()]


def _line_of(mapping: Any, key: Any, default: int) -> int:
    return mapping.line_of(key, default) if isinstance(mapping, _Mapping) else default


def derive_operation_id(path: str) -> str:
    """``/ghz-3`` -> ``ghz_3``"""
    derived = re.sub(r"[^A-Za-z0-9_]", "_", path.strip("/")) or "root"
    return f"op_{derived}" if derived[0].isdigit() else derived


def _read_binding(raw: Any, location: str, line: int, diagnostics: List[Diagnostic]) -> Optional[QuantumBinding]:
    if not isinstance(raw, dict):
        diagnostics.append(error("QSF004", "'x-quantum' must be a mapping with exactly one circuit source", location, line))
        return None

    for key, _, key_line in _entries(raw):
        if key not in BINDING_KEYS:
            diagnostics.append(warning("QSF007", f"unknown key '{key}' is ignored", f"{location}.{key}", key_line or line))

    ok = True
    sources = [kind for kind in SourceKind if kind.value in raw]
    source_kind = sources[0] if len(sources) == 1 else None
    if not sources:
        diagnostics.append(error("QSF004", "no circuit source; set one of quirk-url, code-url, inline-qasm", location, line))
        ok = False
    elif len(sources) > 1:
        names = " and ".join(kind.value for kind in sources)
        diagnostics.append(error("QSF004", f"multiple circuit sources ({names}); set exactly one", location, line))
        ok = False
    elif not isinstance(raw[source_kind.value], str) or not raw[source_kind.value].strip():
        diagnostics.append(error("QSF009", f"'{source_kind.value}' must be a non-empty string", f"{location}.{source_kind.value}", _line_of(raw, source_kind.value, line)))
        ok = False

    shots = raw.get("default-shots", DEFAULT_SHOTS)
    if isinstance(shots, bool) or not isinstance(shots, int) or not 1 <= shots <= MAX_SHOTS:
        diagnostics.append(error("QSF005", f"default-shots must be an integer in [1, {MAX_SHOTS}], got {shots!r}", f"{location}.default-shots", _line_of(raw, "default-shots", line)))
        ok = False

    backend = raw.get("backend", DEFAULT_BACKEND)
    if not isinstance(backend, str) or not _BACKEND_RE.fullmatch(backend):
        diagnostics.append(error("QSF009", f"backend must be an identifier like 'local-simulator', got {backend!r}", f"{location}.backend", _line_of(raw, "backend", line)))
        ok = False

    code_format = None
    if source_kind is SourceKind.CODE_URL:
        code_format = CodeFormat.QASM2
    if "code-format" in raw:
        value = raw["code-format"]
        if source_kind is not None and source_kind is not SourceKind.CODE_URL:
            diagnostics.append(error("QSF009", "code-format only applies to code-url", f"{location}.code-format", _line_of(raw, "code-format", line)))
            ok = False
        elif value not in {fmt.value for fmt in CodeFormat}:
            allowed = ", ".join(fmt.value for fmt in CodeFormat)
            diagnostics.append(error("QSF009", f"code-format must be one of {allowed}, got {value!r}", f"{location}.code-format", _line_of(raw, "code-format", line)))
            ok = False
        else:
            code_format = CodeFormat(value)

    if not ok:
        return None
    return QuantumBinding(
        source_kind=source_kind,
        source=raw[source_kind.value].strip(),
        code_format=code_format,
        default_shots=shots,
        backend=backend,
    )


def _read_operation(path: str, method: str, operation: Any, line: int, diagnostics: List[Diagnostic]) -> Optional[EndpointDef]:
    location = f"paths.{path}.{method.lower()}"
    if operation is None:
        operation = {}
    if not isinstance(operation, dict):
        diagnostics.append(error("QSF002", "operation must be a mapping", location, line))
        return None

    if "x-quantum" not in operation:
        diagnostics.append(error("QSF003", "endpoint has no 'x-quantum' binding", location, line))
        binding = None
    else:
        binding = _read_binding(operation["x-quantum"], f"{location}.x-quantum", _line_of(operation, "x-quantum", line), diagnostics)

    operation_id = operation.get("operationId", derive_operation_id(path))
    if not isinstance(operation_id, str) or not _IDENTIFIER_RE.fullmatch(operation_id) or keyword.iskeyword(operation_id):
        diagnostics.append(error("QSF008", f"operationId must be an identifier (letters, digits, underscore; not starting with a digit), got {operation_id!r}", f"{location}.operationId", _line_of(operation, "operationId", line)))
        return None

    summary = operation.get("summary")
    if binding is None:
        return None
    return EndpointDef(
        path=path,
        method=method.upper(),
        operation_id=operation_id,
        binding=binding,
        summary=summary if isinstance(summary, str) else None,
        line=line,
    )


def _read_path_item(path: Any, item: Any, line: int, diagnostics: List[Diagnostic]) -> List[EndpointDef]:
    location = f"paths.{path}"
    if not isinstance(path, str) or not path.startswith("/"):
        diagnostics.append(error("QSF006", f"path {path!r} must begin with '/'", location, line))
        return []
    if "{" in path or "}" in path:
        diagnostics.append(error("QSF006", "path templating is not supported; use a literal path", location, line))
        return []
    if not _PATH_RE.fullmatch(path):
        diagnostics.append(error("QSF006", "path may only contain unreserved URL characters", location, line))
        return []
    if not isinstance(item, dict):
        diagnostics.append(error("QSF002", "path item must be a mapping of HTTP methods", location, line))
        return []

    endpoints = []
    for key, operation, op_line in _entries(item):
        if key in PATH_ITEM_KEYS or (isinstance(key, str) and key.startswith("x-")):
            continue
        method = str(key).lower()
        if method != "post":
            reason = "only POST is supported" if method in HTTP_METHODS else "not an HTTP method"
            diagnostics.append(error("QSF006", f"'{key}': {reason}", f"{location}.{key}", op_line or line))
            continue
        endpoint = _read_operation(path, "POST", operation, op_line or line, diagnostics)
        if endpoint is not None:
            endpoints.append(endpoint)
    return endpoints


def _read_info(document: Dict[str, Any], diagnostics: List[Diagnostic]) -> Tuple[str, str, Optional[str]]:
    info = document.get("info")
    line = _line_of(document, "info", 1)
    if not isinstance(info, dict):
        diagnostics.append(error("QSF002", "'info' must be a mapping with 'title' and 'version'", "info", line))
        return "", "", None
    title = info.get("title")
    version = info.get("version")
    if not isinstance(title, str) or not title.strip():
        diagnostics.append(error("QSF002", "'info.title' is required", "info.title", _line_of(info, "title", line)))
    # YAML reads unquoted 1.0 as a float
    if isinstance(version, (int, float)) and not isinstance(version, bool):
        version = str(version)
    if not isinstance(version, str) or not version.strip():
        diagnostics.append(error("QSF002", "'info.version' is required", "info.version", _line_of(info, "version", line)))
    description = info.get("description")
    return title or "", version or "", description if isinstance(description, str) else None


def _read_document(document: Any, diagnostics: List[Diagnostic], source_url: Optional[str], fingerprint: str) -> Optional[ApiSpec]:
    if not isinstance(document, dict):
        diagnostics.append(error("QSF002", "document must be a mapping with 'openapi', 'info' and 'paths'", "", 1))
        return None

    missing = [key for key in ("openapi", "info", "paths") if key not in document]
    for key in missing:
        diagnostics.append(error("QSF002", f"missing required '{key}'", key, 1))

    if "openapi" in document and not str(document["openapi"]).startswith("3."):
        diagnostics.append(error("QSF002", f"unsupported openapi version {document['openapi']!r}; expected 3.x", "openapi", _line_of(document, "openapi", 1)))

    title, version, description = ("", "", None)
    if "info" in document:
        title, version, description = _read_info(document, diagnostics)

    endpoints: List[EndpointDef] = []
    if "paths" in document:
        paths = document["paths"]
        line = _line_of(document, "paths", 1)
        if not isinstance(paths, dict) or not paths:
            diagnostics.append(error("QSF002", "'paths' must define at least one endpoint", "paths", line))
        else:
            for path, item, path_line in _entries(paths):
                endpoints.extend(_read_path_item(path, item, path_line or line, diagnostics))
            if not endpoints and not has_errors(diagnostics):
                diagnostics.append(error("QSF002", "'paths' defines no POST operation", "paths", line))

    seen_ids: Dict[str, EndpointDef] = {}
    for endpoint in endpoints:
        first = seen_ids.setdefault(endpoint.operation_id, endpoint)
        if first is not endpoint:
            diagnostics.append(error("QSF008", f"operationId '{endpoint.operation_id}' already used by {first.path}", f"{endpoint.location}.operationId", endpoint.line))

    if has_errors(diagnostics):
        return None
    return ApiSpec(
        title=title,
        version=version,
        endpoints=tuple(endpoints),
        description=description,
        source_url=source_url,
        fingerprint=fingerprint,
    )


def parse_spec(yaml_text: Union[str, bytes], source_url: Optional[str] = None) -> Tuple[Optional[ApiSpec], List[Diagnostic]]:
    """Parse an extended OpenAPI document.

    Returns ``(spec, diagnostics)``; ``spec`` is None whenever an
    error-severity diagnostic was produced. Warnings may accompany a spec.
    """
    try:
        raw = yaml_text if isinstance(yaml_text, bytes) else yaml_text.encode("utf-8")
        text = raw.decode("utf-8")
    except UnicodeError as e:
        return None, [error("QSF001", f"document is not valid UTF-8: {e}", "", 1)]

    fingerprint = hashlib.sha256(raw).hexdigest()
    try:
        document = yaml.load(text, Loader=_SpecLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 1
        problem = getattr(e, "problem", None) or str(e)
        return None, [error("QSF001", f"invalid YAML: {problem}", "", line)]
    except (TypeError, ValueError, RecursionError) as e:
        return None, [error("QSF001", f"invalid YAML structure: {e}", "", 1)]

    diagnostics: List[Diagnostic] = []
    try:
        spec = _read_document(document, diagnostics, source_url, fingerprint)
    except Exception as e:
        # Shapes none of the readers anticipated still end as a diagnostic
        diagnostics.append(error("QSF002", f"unexpected document structure: {e}", "", 1))
        spec = None
    return spec, sort_diagnostics(diagnostics)


def binding_to_dict(binding: QuantumBinding) -> Dict[str, Any]:
    data: Dict[str, Any] = {binding.source_kind.value: binding.source}
    if binding.code_format is not None:
        data["code-format"] = binding.code_format.value
    data["default-shots"] = binding.default_shots
    data["backend"] = binding.backend
    return data


RUN_REQUEST_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "shots": {"type": "integer", "minimum": 1, "maximum": MAX_SHOTS},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
    },
}
RUN_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["counts", "shots", "seed", "backend"],
    "properties": {
        "counts": {"type": "object", "additionalProperties": {"type": "integer"}},
        "shots": {"type": "integer"},
        "seed": {"type": "integer"},
        "backend": {"type": "string"},
    },
}
ERROR_SCHEMA = {
    "type": "object",
    "required": ["code", "message"],
    "properties": {
        "code": {"type": "string"},
        "message": {"type": "string"},
        "location": {"type": "string"},
    },
}


def spec_to_document(spec: ApiSpec, include_schemas: bool = False) -> Dict[str, Any]:
    info: Dict[str, Any] = {"title": spec.title, "version": spec.version}
    if spec.description:
        info["description"] = spec.description
    paths: Dict[str, Any] = {}
    for endpoint in spec.endpoints:
        operation: Dict[str, Any] = {"operationId": endpoint.operation_id}
        if endpoint.summary:
            operation["summary"] = endpoint.summary
        operation["x-quantum"] = binding_to_dict(endpoint.binding)
        if include_schemas:
            operation["requestBody"] = {
                "required": False,
                "content": {"application/json": {"schema": RUN_REQUEST_SCHEMA}},
            }
            operation["responses"] = {
                "200": {"description": "Measurement counts", "content": {"application/json": {"schema": RUN_RESPONSE_SCHEMA}}},
                "400": {"description": "Invalid run request", "content": {"application/json": {"schema": ERROR_SCHEMA}}},
                "502": {"description": "Backend execution failed", "content": {"application/json": {"schema": ERROR_SCHEMA}}},
            }
        paths.setdefault(endpoint.path, {})[endpoint.method.lower()] = operation
    return {"openapi": "3.0.3", "info": info, "paths": paths}


def serialize_spec(spec: ApiSpec, include_schemas: bool = False) -> str:
    """Render the (effective) contract as YAML; deterministic"""
    return yaml.safe_dump(spec_to_document(spec, include_schemas), sort_keys=False, allow_unicode=True)
