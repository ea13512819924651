"""
Service Bundle

The deployable output of generation: a manifest binding each endpoint to its
circuit plus the emitted artifact texts. Serializes to a directory tree
(``manifest.json``, ``bundle.json``, ``artifacts/``) or to one JSON document.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from codegen.emitters import GENERATOR_VERSION, EmitError, emit_qasm, emit_qiskit
from quantum.circuit import CircuitIR
from spec.diagnostics import Diagnostic, error, has_errors, sort_diagnostics
from spec.models import ApiSpec
from spec.parser import serialize_spec
from spec.validator import duplicate_endpoints, ingest_endpoints
from utils.fetcher import Fetcher
from utils.logger import log_pipeline_event

logger = logging.getLogger(__name__)

EFFECTIVE_OPENAPI = "openapi.effective.yaml"
EMIT_FILTERS = ("qasm", "qiskit", "bundle")


def qasm_artifact(operation_id: str) -> str:
    return f"{operation_id}.qasm"


def qiskit_artifact(operation_id: str) -> str:
    return f"{operation_id}_qiskit.py.txt"


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    method: str
    operation_id: str
    circuit: CircuitIR
    default_shots: int
    backend: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "path": self.path,
            "method": self.method,
            "operation_id": self.operation_id,
            "default_shots": self.default_shots,
            "backend": self.backend,
            "circuit": self.circuit.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ManifestEntry":
        return cls(
            path=data["path"],
            method=data["method"],
            operation_id=data["operation_id"],
            circuit=CircuitIR.from_dict(data["circuit"]),
            default_shots=data["default_shots"],
            backend=data["backend"],
        )


@dataclass(frozen=True)
class ServiceBundle:
    title: str
    version: str
    manifest: Tuple[ManifestEntry, ...]
    emitted: Dict[str, str]
    spec_fingerprint: str
    generator_version: str = GENERATOR_VERSION

    @property
    def effective_openapi(self) -> str:
        return self.emitted[EFFECTIVE_OPENAPI]

    @property
    def backend_ids(self) -> List[str]:
        return sorted({entry.backend for entry in self.manifest})

    def entry(self, path: str, method: str = "POST") -> Optional[ManifestEntry]:
        for entry in self.manifest:
            if entry.path == path and entry.method == method.upper():
                return entry
        return None

    def manifest_dict(self) -> Dict[str, Any]:
        return {
            "title": self.title,
            "version": self.version,
            "spec_fingerprint": self.spec_fingerprint,
            "generator_version": self.generator_version,
            "endpoints": [entry.to_dict() for entry in self.manifest],
        }

    def to_dict(self) -> Dict[str, Any]:
        """Single-document form, as transmitted between deployer and instances"""
        data = self.manifest_dict()
        data["artifacts"] = dict(sorted(self.emitted.items()))
        return data

    def to_json(self) -> str:
        return _dump(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ServiceBundle":
        return cls(
            title=data["title"],
            version=data["version"],
            manifest=tuple(ManifestEntry.from_dict(entry) for entry in data["endpoints"]),
            emitted=dict(data["artifacts"]),
            spec_fingerprint=data["spec_fingerprint"],
            generator_version=data.get("generator_version", GENERATOR_VERSION),
        )

    @classmethod
    def from_json(cls, text: str) -> "ServiceBundle":
        return cls.from_dict(json.loads(text))


def _dump(data: Dict[str, Any]) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def _write(path: Path, text: str) -> None:
    # newline="" keeps bytes identical across platforms
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def generate_bundle(spec: ApiSpec, fetcher: Fetcher) -> Tuple[Optional[ServiceBundle], List[Diagnostic]]:
    """Validate, ingest and emit every endpoint. All-or-nothing: any error
    diagnostic means no bundle."""
    diagnostics = duplicate_endpoints(spec)
    circuits, ingest_diagnostics = ingest_endpoints(spec, fetcher)
    diagnostics.extend(ingest_diagnostics)
    if has_errors(diagnostics):
        log_pipeline_event("generate", "failed", {"title": spec.title, "diagnostics": len(diagnostics)})
        return None, sort_diagnostics(diagnostics)

    emitted: Dict[str, str] = {}
    manifest = []
    for endpoint, circuit in zip(spec.endpoints, circuits):
        binding = endpoint.binding
        try:
            emitted[qasm_artifact(endpoint.operation_id)] = emit_qasm(circuit)
            emitted[qiskit_artifact(endpoint.operation_id)] = emit_qiskit(
                circuit, endpoint.operation_id, spec.fingerprint, binding.default_shots
            )
        except EmitError as e:
            diagnostics.append(error("QSF013", f"E_EMIT: {e}", f"{endpoint.location}.x-quantum", endpoint.line))
            continue
        manifest.append(ManifestEntry(
            path=endpoint.path,
            method=endpoint.method,
            operation_id=endpoint.operation_id,
            circuit=circuit,
            default_shots=binding.default_shots,
            backend=binding.backend,
        ))

    if has_errors(diagnostics):
        log_pipeline_event("generate", "failed", {"title": spec.title, "diagnostics": len(diagnostics)})
        return None, sort_diagnostics(diagnostics)

    emitted[EFFECTIVE_OPENAPI] = serialize_spec(spec, include_schemas=True)
    bundle = ServiceBundle(
        title=spec.title,
        version=spec.version,
        manifest=tuple(manifest),
        emitted=dict(sorted(emitted.items())),
        spec_fingerprint=spec.fingerprint,
    )
    log_pipeline_event("generate", "succeeded", {"title": spec.title, "endpoints": len(manifest), "artifacts": len(emitted)})
    return bundle, sort_diagnostics(diagnostics)


def select_artifacts(bundle: ServiceBundle, emit: str = "bundle") -> Dict[str, str]:
    if emit not in EMIT_FILTERS:
        raise ValueError(f"emit filter must be one of {', '.join(EMIT_FILTERS)}, got '{emit}'")
    if emit == "qasm":
        return {name: text for name, text in bundle.emitted.items() if name.endswith(".qasm")}
    if emit == "qiskit":
        return {name: text for name, text in bundle.emitted.items() if name.endswith("_qiskit.py.txt")}
    return dict(bundle.emitted)


def write_bundle_dir(bundle: ServiceBundle, out_dir: Union[str, Path], emit: str = "bundle") -> List[Path]:
    """Write the directory form; returns the files written, in order"""
    out_dir = Path(out_dir)
    artifacts_dir = out_dir / "artifacts"
    artifacts_dir.mkdir(parents=True, exist_ok=True)

    written = []
    manifest_path = out_dir / "manifest.json"
    _write(manifest_path, _dump(bundle.manifest_dict()))
    written.append(manifest_path)
    if emit == "bundle":
        bundle_path = out_dir / "bundle.json"
        _write(bundle_path, bundle.to_json())
        written.append(bundle_path)

    for name, text in sorted(select_artifacts(bundle, emit).items()):
        path = artifacts_dir / name
        _write(path, text)
        written.append(path)
    logger.debug(f"Wrote {len(written)} bundle file(s) to {out_dir}")
    return written


def read_bundle_dir(bundle_dir: Union[str, Path]) -> ServiceBundle:
    """Load a bundle written with emit='bundle'"""
    return ServiceBundle.from_json(Path(bundle_dir, "bundle.json").read_text(encoding="utf-8"))
