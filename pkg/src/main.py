#!/usr/bin/env python3
"""
Quantum Services Pipeline - Command Line Entry Point

Validates extended OpenAPI specs, generates service bundles, simulates
endpoints locally, deploys through the Deployment API and runs the Deployment
API itself.

Standard output carries only machine-readable results; diagnostics and logs
go to standard error.

Exit codes: 0 success, 1 validation/diagnostics, 2 I/O, 3 generation,
4 deployment.
"""

import argparse
import json
import os
import shutil
import signal
import sys
import tempfile
import threading
from pathlib import Path
from typing import Dict, List, Optional

# Add src directory to Python path
sys.path.insert(0, str(Path(__file__).parent))

import requests
from pydantic import ValidationError
from werkzeug.serving import make_server

from api.deployer_routes import create_deployer_app
from codegen.bundle import EMIT_FILTERS, ManifestEntry, generate_bundle, read_bundle_dir, write_bundle_dir
from config.settings import Config, parse_port_range
from deployer.manager import Deployer
from deployer.supervisor import CREDENTIALS_ENV
from runtime.backends import BackendError, UnknownBackendError, build_backends
from runtime.executor import execute_endpoint
from runtime.server import ServiceError, serve_bundle
from schemas.api_schemas import RunRequest
from spec.diagnostics import Diagnostic, Severity, has_errors, render_diagnostics, sort_diagnostics
from spec.parser import parse_spec
from spec.validator import ingest_endpoint, validate_spec
from utils.fetcher import FetchError, ResourceFetcher, to_url
from utils.logger import get_logger, log_pipeline_event, setup_logging

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_IO = 2
EXIT_GENERATE = 3
EXIT_DEPLOY = 4

logger = get_logger(__name__)


def _err(message: str) -> None:
    sys.stderr.write(message.rstrip("\n") + "\n")


def _print_diagnostics(diagnostics: List[Diagnostic], quiet: bool = False) -> None:
    shown = [d for d in diagnostics if not (quiet and d.severity is Severity.WARNING)]
    sys.stderr.write(render_diagnostics(shown))


def _read_spec(location: str, fetcher: ResourceFetcher):
    """Fetch and parse; FetchError propagates"""
    url = to_url(location)
    return parse_spec(fetcher.fetch(url), source_url=url)


def _load_credentials(path: Optional[str]) -> Dict[str, str]:
    """Raises OSError or ValueError"""
    if not path:
        return {}
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in data.items()):
        raise ValueError("credentials file must be a JSON object mapping provider ids to secrets")
    return data


def cmd_validate(args, config: Config) -> int:
    fetcher = ResourceFetcher(config.FETCH_TIMEOUT)
    try:
        spec, diagnostics = _read_spec(args.spec, fetcher)
    except FetchError as e:
        _err(f"error: {e}")
        return EXIT_IO

    if spec is not None:
        diagnostics = sort_diagnostics(diagnostics + validate_spec(spec, fetcher))
    _print_diagnostics(diagnostics, args.quiet)

    failed = has_errors(diagnostics)
    log_pipeline_event("validate", "failed" if failed else "succeeded", {"spec": args.spec, "diagnostics": len(diagnostics)})
    return EXIT_DIAGNOSTICS if failed else EXIT_OK


def cmd_generate(args, config: Config) -> int:
    fetcher = ResourceFetcher(config.FETCH_TIMEOUT)
    try:
        spec, diagnostics = _read_spec(args.spec, fetcher)
    except FetchError as e:
        _err(f"error: {e}")
        return EXIT_IO
    if spec is None:
        _print_diagnostics(diagnostics, args.quiet)
        return EXIT_DIAGNOSTICS

    bundle, bundle_diagnostics = generate_bundle(spec, fetcher)
    _print_diagnostics(sort_diagnostics(diagnostics + bundle_diagnostics), args.quiet)
    if bundle is None:
        return EXIT_DIAGNOSTICS

    # Written to a sibling staging directory first so a failure leaves out_dir untouched
    out_dir = Path(args.out)
    try:
        out_dir.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=".qsf-generate-", dir=out_dir.parent))
        try:
            written = write_bundle_dir(bundle, staging, args.emit)
            if out_dir.exists():
                shutil.rmtree(out_dir)
            os.replace(staging, out_dir)
        except BaseException:
            shutil.rmtree(staging, ignore_errors=True)
            raise
    except OSError as e:
        _err(f"error: cannot write bundle to {out_dir}: {e}")
        return EXIT_IO

    for path in written:
        print(out_dir / path.relative_to(staging))
    return EXIT_OK


def cmd_simulate(args, config: Config) -> int:
    fetcher = ResourceFetcher(config.FETCH_TIMEOUT)
    try:
        spec, diagnostics = _read_spec(args.spec, fetcher)
    except FetchError as e:
        _err(f"error: {e}")
        return EXIT_IO
    if spec is None:
        _print_diagnostics(diagnostics, args.quiet)
        return EXIT_DIAGNOSTICS

    endpoint = spec.endpoint(args.endpoint)
    if endpoint is None:
        available = ", ".join(e.path for e in spec.endpoints)
        _err(f"error: unknown endpoint POST {args.endpoint}; available: {available}")
        return EXIT_DIAGNOSTICS

    circuit, diagnostic = ingest_endpoint(endpoint, fetcher, spec.source_url)
    if diagnostic is not None:
        _print_diagnostics([diagnostic])
        return EXIT_DIAGNOSTICS

    try:
        run_request = RunRequest(shots=args.shots, seed=args.seed)
    except ValidationError as e:
        _err(f"error: {e.errors()[0]['loc'][0]}: {e.errors()[0]['msg']}")
        return EXIT_DIAGNOSTICS

    entry = ManifestEntry(
        path=endpoint.path,
        method=endpoint.method,
        operation_id=endpoint.operation_id,
        circuit=circuit,
        default_shots=endpoint.binding.default_shots,
        backend=endpoint.binding.backend,
    )
    try:
        result = execute_endpoint(entry, run_request, build_backends({}, config))
    except (BackendError, UnknownBackendError) as e:
        _err(f"error: {e.code}: {e.message}")
        return EXIT_DIAGNOSTICS

    sys.stdout.write(result.to_json() + "\n")
    return EXIT_OK


def _post_deployment(deployer_url: str, spec_url: str, credentials: Dict[str, str], timeout: float) -> int:
    """POST /deployments; prints base_url on success"""
    try:
        response = requests.post(
            f"{deployer_url.rstrip('/')}/deployments",
            json={"spec_url": spec_url, "credentials": credentials},
            timeout=timeout,
        )
        body = response.json()
    except requests.RequestException as e:
        _err(f"error: deployer unreachable at {deployer_url}: {e}")
        return EXIT_DEPLOY
    except ValueError:
        _err(f"error: deployer answered HTTP {response.status_code} without a JSON body")
        return EXIT_DEPLOY

    record = body.get("deployment", body) if isinstance(body, dict) else {}
    if response.status_code == 201 and record.get("status") == "running":
        log_pipeline_event("deploy", "succeeded", {"deployment_id": record.get("id"), "base_url": record.get("base_url")})
        print(record["base_url"])
        return EXIT_OK

    _err(f"error: deployment failed with HTTP {response.status_code}: {body.get('code', '')} {body.get('message', '')}".rstrip())
    failure = [Diagnostic.model_validate(item) for item in record.get("failure") or []]
    _print_diagnostics(failure)
    log_pipeline_event("deploy", "failed", {"status_code": response.status_code})
    return EXIT_DEPLOY


def cmd_deploy(args, config: Config) -> int:
    try:
        credentials = _load_credentials(args.credentials)
    except (OSError, ValueError) as e:
        _err(f"error: cannot read credentials file: {e}")
        return EXIT_IO
    return _post_deployment(args.deployer, to_url(args.spec), credentials, args.timeout)


def cmd_pipeline_run(args, config: Config) -> int:
    fetcher = ResourceFetcher(config.FETCH_TIMEOUT)

    # validate
    try:
        spec, diagnostics = _read_spec(args.spec, fetcher)
    except FetchError as e:
        _err(f"error: {e}")
        log_pipeline_event("validate", "failed", {"spec": args.spec})
        return EXIT_DIAGNOSTICS
    if spec is not None:
        diagnostics = sort_diagnostics(diagnostics + validate_spec(spec, fetcher))
    _print_diagnostics(diagnostics, args.quiet)
    if spec is None or has_errors(diagnostics):
        log_pipeline_event("validate", "failed", {"spec": args.spec, "diagnostics": len(diagnostics)})
        return EXIT_DIAGNOSTICS
    log_pipeline_event("validate", "succeeded", {"spec": args.spec})

    # generate (dry run, in memory)
    bundle, diagnostics = generate_bundle(spec, fetcher)
    if bundle is None:
        _print_diagnostics(diagnostics, args.quiet)
        return EXIT_GENERATE

    # deploy
    try:
        credentials = _load_credentials(args.credentials)
    except (OSError, ValueError) as e:
        _err(f"error: cannot read credentials file: {e}")
        return EXIT_IO
    return _post_deployment(args.deployer, to_url(args.spec), credentials, args.timeout)


def _raise_interrupt(signum, frame):
    raise KeyboardInterrupt


def _install_sigterm() -> None:
    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGTERM, _raise_interrupt)


def cmd_deployer_serve(args, config: Config) -> int:
    try:
        if args.port_range:
            config.PORT_RANGE = parse_port_range(args.port_range)
    except ValueError as e:
        _err(f"error: {e}")
        return EXIT_IO
    for flag, attribute in (("port", "PORT"), ("state_dir", "STATE_DIR"), ("advertise_host", "ADVERTISE_HOST"), ("host", "BIND_HOST")):
        value = getattr(args, flag)
        if value is not None:
            setattr(config, attribute, value)

    deployer = Deployer(config)
    app = create_deployer_app(deployer)
    try:
        server = make_server(config.BIND_HOST, config.PORT, app, threaded=True)
    except (OSError, SystemExit) as e:
        _err(f"error: cannot bind {config.BIND_HOST}:{config.PORT} ({e})")
        return EXIT_IO

    _install_sigterm()
    logger.info(f"Deployment API listening on http://{config.BIND_HOST}:{config.PORT} (ports {config.port_range_text}, state {config.STATE_DIR})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        logger.info("Shutting down Deployment API")
    finally:
        deployer.shutdown()
        server.server_close()
    return EXIT_OK


def cmd_serve(args, config: Config) -> int:
    try:
        bundle = read_bundle_dir(args.bundle_dir)
        credentials = json.loads(os.environ.get(CREDENTIALS_ENV, "{}"))
    except (OSError, ValueError, KeyError) as e:
        _err(f"error: cannot load bundle from {args.bundle_dir}: {e}")
        return EXIT_IO

    try:
        handle = serve_bundle(bundle, args.port, build_backends(credentials, config), args.host, config.DRAIN_TIMEOUT)
    except ServiceError as e:
        _err(f"error: {e}")
        return EXIT_IO

    _install_sigterm()
    print(handle.url, flush=True)
    try:
        while handle.running:
            handle.wait(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        handle.shutdown()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsf", description="Quantum services continuous-deployment pipeline")
    parser.add_argument("--fetch-timeout", type=float, default=None, help="Seconds to wait for remote resources")
    parser.add_argument("--quiet", action="store_true", help="Only errors: no warnings, no logs")
    parser.add_argument("--log-level", default=None, help="Log level for this invocation")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", help="Parse and deep-validate a spec")
    validate.add_argument("spec", help="Spec path or URL")
    validate.set_defaults(handler=cmd_validate)

    generate = commands.add_parser("generate", help="Generate a service bundle directory")
    generate.add_argument("spec", help="Spec path or URL")
    generate.add_argument("--out", "-o", required=True, help="Bundle output directory")
    generate.add_argument("--emit", choices=EMIT_FILTERS, default="bundle", help="Artifacts to write")
    generate.set_defaults(handler=cmd_generate)

    simulate = commands.add_parser("simulate", help="Run one endpoint on the local simulator")
    simulate.add_argument("spec", help="Spec path or URL")
    simulate.add_argument("endpoint", help="Endpoint path, e.g. /bell")
    simulate.add_argument("--shots", type=int, default=None)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.set_defaults(handler=cmd_simulate)

    deploy = commands.add_parser("deploy", help="Ask a Deployment API to deploy a spec")
    _add_deploy_arguments(deploy)
    deploy.set_defaults(handler=cmd_deploy)

    pipeline = commands.add_parser("pipeline", help="Pipeline commands")
    pipeline_commands = pipeline.add_subparsers(dest="pipeline_command", required=True)
    run = pipeline_commands.add_parser("run", help="validate, generate, then deploy")
    _add_deploy_arguments(run)
    run.set_defaults(handler=cmd_pipeline_run)

    deployer = commands.add_parser("deployer", help="Deployment API commands")
    deployer_commands = deployer.add_subparsers(dest="deployer_command", required=True)
    serve_deployer = deployer_commands.add_parser("serve", help="Run the Deployment API")
    serve_deployer.add_argument("--port", type=int, default=None, help="Deployment API port (default 9000)")
    serve_deployer.add_argument("--port-range", default=None, help="Service port range START-END (default 8000-8999)")
    serve_deployer.add_argument("--state-dir", default=None, help="Ledger directory")
    serve_deployer.add_argument("--advertise-host", default=None, help="Host used in base URLs")
    serve_deployer.add_argument("--host", default=None, help="Bind address")
    serve_deployer.set_defaults(handler=cmd_deployer_serve, long_running=True)

    serve = commands.add_parser("serve", help="Serve a bundle directory")
    serve.add_argument("bundle_dir")
    serve.add_argument("--port", type=int, required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.set_defaults(handler=cmd_serve, long_running=True)
    return parser


def _add_deploy_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("spec", help="Spec path or URL")
    parser.add_argument("--deployer", default="http://127.0.0.1:9000", help="Deployment API base URL")
    parser.add_argument("--credentials", default=None, help="JSON file mapping provider ids to secrets")
    parser.add_argument("--timeout", type=float, default=60.0, help="Seconds to wait for the deployment")


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the application"""
    args = build_parser().parse_args(argv)
    config = Config()
    if args.fetch_timeout is not None:
        config.FETCH_TIMEOUT = args.fetch_timeout

    # One-shot commands keep standard error for diagnostics unless asked
    default_level = config.LOG_LEVEL if getattr(args, "long_running", False) else "WARNING"
    setup_logging("ERROR" if args.quiet else (args.log_level or default_level), config.LOG_FILE)
    return args.handler(args, config)


if __name__ == "__main__":
    sys.exit(main())
