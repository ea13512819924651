import hashlib

import pytest

from spec.diagnostics import Severity, render_diagnostics
from spec.models import CodeFormat, SourceKind
from spec.parser import derive_operation_id, parse_spec, serialize_spec, spec_to_document

from tests.conftest import fixture_path, read_fixture

SPEC_FIXTURES = ["bell.yaml", "x_circuit.yaml", "two_endpoints.yaml", "mock_remote.yaml", "negative_control.yaml"]


def codes(diagnostics):
    return [d.code for d in diagnostics]


def test_parse_bell_spec():
    text = read_fixture("specs", "bell.yaml")
    spec, diagnostics = parse_spec(text)
    assert diagnostics == []
    assert spec.title == "Bell service"
    assert spec.version == "1.0"
    (endpoint,) = spec.endpoints
    assert endpoint.path == "/bell"
    assert endpoint.method == "POST"
    assert endpoint.operation_id == "bell"
    assert endpoint.summary == "Prepare and measure a Bell pair"
    assert endpoint.binding.source_kind is SourceKind.QUIRK_URL
    assert endpoint.binding.default_shots == 1024
    assert endpoint.binding.backend == "local-simulator"
    assert spec.fingerprint == hashlib.sha256(text.encode("utf-8")).hexdigest()


def test_defaults_and_derived_operation_id():
    spec, _ = parse_spec(read_fixture("specs", "two_endpoints.yaml"))
    ghz = spec.endpoint("/ghz-3")
    assert ghz.operation_id == "ghz_3"
    assert ghz.binding.source_kind is SourceKind.CODE_URL
    assert ghz.binding.code_format is CodeFormat.QASM2
    assert ghz.binding.default_shots == 1024
    assert spec.endpoint("/bell").binding.default_shots == 2000
    assert spec.description == "A Quirk-bound Bell endpoint and a QASM-bound GHZ endpoint"


@pytest.mark.parametrize("path,expected", [
    ("/bell", "bell"),
    ("/ghz-3", "ghz_3"),
    ("/a/b.c", "a_b_c"),
    ("/3d", "op_3d"),
    ("/", "root"),
])
def test_derive_operation_id(path, expected):
    assert derive_operation_id(path) == expected


def test_inline_qasm_is_kept_verbatim():
    spec, _ = parse_spec(read_fixture("specs", "x_circuit.yaml"))
    binding = spec.endpoints[0].binding
    assert binding.source_kind is SourceKind.INLINE_QASM
    assert binding.source.startswith("OPENQASM 2.0;")
    assert "measure q[0] -> c[0];" in binding.source


@pytest.mark.parametrize("name", SPEC_FIXTURES)
def test_serialize_then_parse_gives_same_spec(name):
    spec, _ = parse_spec(read_fixture("specs", name))
    again, diagnostics = parse_spec(serialize_spec(spec))
    assert diagnostics == []
    assert again == spec


def test_serialize_is_deterministic():
    spec, _ = parse_spec(read_fixture("specs", "two_endpoints.yaml"))
    assert serialize_spec(spec) == serialize_spec(spec)
    assert serialize_spec(spec, include_schemas=True) == serialize_spec(spec, include_schemas=True)


def test_effective_document_has_request_and_response_schemas():
    spec, _ = parse_spec(read_fixture("specs", "bell.yaml"))
    operation = spec_to_document(spec, include_schemas=True)["paths"]["/bell"]["post"]
    schema = operation["requestBody"]["content"]["application/json"]["schema"]
    assert schema["additionalProperties"] is False
    assert set(schema["properties"]) == {"shots", "seed"}
    assert set(operation["responses"]) == {"200", "400", "502"}
    assert operation["x-quantum"]["default-shots"] == 1024


def test_unknown_key_is_only_a_warning():
    text = read_fixture("specs", "bell.yaml").replace("default-shots: 1024", "default-shots: 1024\n        color: blue")
    spec, diagnostics = parse_spec(text)
    assert spec is not None
    assert codes(diagnostics) == ["QSF007"]
    assert diagnostics[0].severity is Severity.WARNING
    assert diagnostics[0].location == "paths./bell.post.x-quantum.color"


def test_all_problems_reported_in_document_order():
    spec, diagnostics = parse_spec(read_fixture("malformed", "unknown_key_bad_backend.yaml"))
    assert spec is None
    assert codes(diagnostics) == ["QSF007", "QSF009"]
    assert [d.line for d in diagnostics] == [10, 11]


def test_shots_diagnostic_location():
    _, diagnostics = parse_spec(read_fixture("malformed", "zero_shots.yaml"))
    (diagnostic,) = diagnostics
    assert diagnostic.code == "QSF005"
    assert diagnostic.location == "paths./none.post.x-quantum.default-shots"
    assert diagnostic.line == 10


def test_yaml_error_has_line():
    _, diagnostics = parse_spec(read_fixture("malformed", "bad_yaml.yaml"))
    assert codes(diagnostics) == ["QSF001"]
    assert diagnostics[0].line >= 2


@pytest.mark.parametrize("text,code", [
    ("", "QSF002"),
    ("- a\n- b\n", "QSF002"),
    ("openapi: 2.0\ninfo: {title: t, version: '1'}\npaths: {/a: {post: {x-quantum: {inline-qasm: x}}}}\n", "QSF002"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {}\n", "QSF002"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {/a: {summary: only}}\n", "QSF002"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {/a: {post: {x-quantum: [1]}}}\n", "QSF004"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {/a: {post: {x-quantum: {inline-qasm: 5}}}}\n", "QSF009"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {/a: {post: {x-quantum: {inline-qasm: x, default-shots: true}}}}\n", "QSF005"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {/a: {post: {x-quantum: {inline-qasm: x, code-format: qasm2}}}}\n", "QSF009"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {'/a/{id}': {post: {x-quantum: {inline-qasm: x}}}}\n", "QSF006"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {a: {post: {x-quantum: {inline-qasm: x}}}}\n", "QSF006"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {/a: {post: {operationId: '9x', x-quantum: {inline-qasm: x}}}}\n", "QSF008"),
    ("openapi: 3.0.0\ninfo: {title: t, version: '1'}\npaths: {/a: {post: {operationId: class, x-quantum: {inline-qasm: x}}}}\n", "QSF008"),
    ("!!python/object/apply:os.system ['true']\n", "QSF001"),
    (b"\xff\xfe\x00", "QSF001"),
])
def test_parse_never_raises(text, code):
    spec, diagnostics = parse_spec(text)
    assert spec is None
    assert code in codes(diagnostics)


def test_unquoted_version_number_is_accepted():
    spec, diagnostics = parse_spec("openapi: 3.0.0\ninfo: {title: t, version: 1.0}\npaths: {/a: {post: {x-quantum: {inline-qasm: x}}}}\n")
    assert diagnostics == []
    assert spec.version == "1.0"


def test_render_diagnostics():
    _, diagnostics = parse_spec(read_fixture("malformed", "zero_shots.yaml"))
    rendered = render_diagnostics(diagnostics)
    assert rendered.startswith("ERROR QSF005 paths./none.post.x-quantum.default-shots:")
    assert rendered.endswith("\n")


def test_malformed_corpus_is_present():
    assert fixture_path("malformed", "expected.json").exists()
