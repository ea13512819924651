"""
Deployer

The Deployment API's engine: fetch a spec, generate its bundle, launch it on
the first free port and track the deployment's lifecycle in the ledger.

Record updates and port bookkeeping happen under one lock; fetching,
generation, instance launch and instance stop run outside it.
"""

import threading
import time
import uuid
from datetime import datetime, timezone
from functools import partial
from typing import Callable, Dict, List, Mapping, Optional, Set, Tuple

from codegen.bundle import ServiceBundle, generate_bundle
from deployer.ledger import DeploymentLedger
from deployer.ports import PortExhaustedError, PortRegistry, os_port_free
from deployer.supervisor import InstanceSupervisor, LaunchError, make_supervisor
from schemas.api_schemas import DeploymentRecord, DeploymentStatus
from spec.diagnostics import Diagnostic, error, has_errors
from spec.parser import parse_spec
from utils.fetcher import FetchError, Fetcher, ResourceFetcher
from utils.logger import get_logger, log_deployment_event, log_performance_event

logger = get_logger(__name__)

ACTIVE_STATUSES = (DeploymentStatus.DEPLOYING, DeploymentStatus.RUNNING)


class DeploymentError(Exception):
    """A deploy or lifecycle call failed; ``record`` is the persisted failed record, if any"""

    def __init__(self, code: str, message: str, record: Optional[DeploymentRecord] = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.record = record


def _now() -> datetime:
    return datetime.now(timezone.utc)


class Deployer:
    def __init__(self, config, fetcher: Optional[Fetcher] = None, supervisor: Optional[InstanceSupervisor] = None,
                 port_is_free: Optional[Callable[[int], bool]] = None):
        self.config = config
        self.fetcher = fetcher or ResourceFetcher(config.FETCH_TIMEOUT)
        self.supervisor = supervisor or make_supervisor(config)
        start, end = config.PORT_RANGE
        self.ports = PortRegistry(start, end, port_is_free or partial(os_port_free, host=config.BIND_HOST))
        self.ledger = DeploymentLedger(config.STATE_DIR)
        self._records: Dict[str, DeploymentRecord] = {}
        self._stopping: Set[str] = set()
        self._lock = threading.RLock()
        self._recover()

    def _recover(self) -> None:
        """Reload the ledger; instances of a previous process are not adopted"""
        for record in self.ledger.load():
            if record.status in ACTIVE_STATUSES:
                record = record.model_copy(update={"status": DeploymentStatus.STOPPED})
                self.ledger.append(record)
                log_deployment_event(record.id, "recovered", "Marked stopped after restart", {"port": record.port})
            self._records[record.id] = record
        if self._records:
            logger.info(f"Recovered {len(self._records)} deployment record(s) from {self.ledger.path}")

    def _save(self, record: DeploymentRecord) -> DeploymentRecord:
        with self._lock:
            self._records[record.id] = record
            self.ledger.append(record)
        return record

    def _fail(self, record: DeploymentRecord, code: str, message: str,
              diagnostics: Optional[List[Diagnostic]] = None) -> DeploymentError:
        failed = self._save(record.model_copy(update={
            "status": DeploymentStatus.FAILED,
            "port": None,
            "base_url": None,
            "failure": diagnostics or [error(code, message, "spec_url")],
        }))
        log_deployment_event(record.id, "failed", message, {"code": code})
        return DeploymentError(code, message, failed)

    def _prepare(self, record: DeploymentRecord) -> Tuple[DeploymentRecord, ServiceBundle]:
        """Fetch, parse and generate; expected failures raise the persisted DeploymentError"""
        try:
            text = self.fetcher.fetch(record.spec_url)
        except FetchError as e:
            raise self._fail(record, "E_FETCH", f"cannot fetch spec: {e.message}")

        spec, diagnostics = parse_spec(text, source_url=record.spec_url)
        if spec is None:
            raise self._fail(record, "E_INVALID_SPEC", "spec failed to parse", diagnostics)
        record = self._save(record.model_copy(update={
            "spec_fingerprint": spec.fingerprint,
            "endpoints": [endpoint.path for endpoint in spec.endpoints],
        }))

        bundle, diagnostics = generate_bundle(spec, self.fetcher)
        if bundle is None or has_errors(diagnostics):
            raise self._fail(record, "E_INVALID_SPEC", "spec failed validation", diagnostics)
        return record, bundle

    def deploy(self, spec_url: str, credentials: Optional[Mapping[str, str]] = None) -> DeploymentRecord:
        """Fetch, re-validate, generate, allocate the first free port and launch.

        Raises DeploymentError (E_FETCH, E_INVALID_SPEC, E_NO_PORTS, E_LAUNCH)
        after persisting the failed record.
        """
        credentials = dict(credentials or {})
        start_time = time.time()
        record = self._save(DeploymentRecord(
            id=uuid.uuid4().hex[:12],
            spec_url=spec_url,
            status=DeploymentStatus.DEPLOYING,
            created_at=_now(),
        ))
        log_deployment_event(record.id, "deploying", f"Deploying {spec_url}", {"credentials": len(credentials)})

        try:
            record, bundle = self._prepare(record)
        except DeploymentError:
            raise
        except Exception as e:
            logger.exception(f"Deployment {record.id}: spec processing crashed")
            raise self._fail(record, "E_INVALID_SPEC", f"spec could not be processed ({type(e).__name__})")

        try:
            port = self.ports.allocate()
        except PortExhaustedError as e:
            raise self._fail(record, e.code, e.message)

        try:
            self.supervisor.launch(record.id, bundle, port, credentials)
        except LaunchError as e:
            self.ports.release(port)
            raise self._fail(record, e.code, e.message)
        except Exception as e:
            logger.exception(f"Deployment {record.id}: supervisor crashed")
            self.ports.release(port)
            raise self._fail(record, "E_LAUNCH", f"instance failed to start ({type(e).__name__})")

        record = self._save(record.model_copy(update={
            "port": port,
            "base_url": self.config.base_url(port),
            "status": DeploymentStatus.RUNNING,
        }))
        log_deployment_event(record.id, "running", f"Serving at {record.base_url}", {"port": port, "endpoints": record.endpoints})
        log_performance_event("deploy", time.time() - start_time, True, {"deployment_id": record.id})
        return record

    def teardown(self, deployment_id: str) -> DeploymentRecord:
        """Stop a deployment and release its port; repeated calls return the final record"""
        with self._lock:
            record = self._records.get(deployment_id)
            if record is None:
                raise DeploymentError("E_NOT_FOUND", f"no deployment '{deployment_id}'")
            if record.status is DeploymentStatus.DEPLOYING:
                raise DeploymentError("E_CONFLICT", f"deployment '{deployment_id}' is still being launched")
            if record.status is not DeploymentStatus.RUNNING:
                return record
            if deployment_id in self._stopping:
                raise DeploymentError("E_CONFLICT", f"deployment '{deployment_id}' is being stopped")
            self._stopping.add(deployment_id)

        # Stopping drains in-flight requests, so it runs outside the lock
        try:
            self.supervisor.stop(deployment_id)
        except Exception:
            with self._lock:
                self._stopping.discard(deployment_id)
            raise

        with self._lock:
            self._stopping.discard(deployment_id)
            self.ports.release(record.port)
            record = self._save(record.model_copy(update={"status": DeploymentStatus.STOPPED}))
        log_deployment_event(deployment_id, "stopped", f"Released port {record.port}")
        return record

    def list_deployments(self) -> List[DeploymentRecord]:
        with self._lock:
            records = list(self._records.values())
        return sorted(records, key=lambda record: record.created_at)

    def get_deployment(self, deployment_id: str) -> DeploymentRecord:
        with self._lock:
            record = self._records.get(deployment_id)
        if record is None:
            raise DeploymentError("E_NOT_FOUND", f"no deployment '{deployment_id}'")
        return record

    def running_count(self) -> int:
        with self._lock:
            return sum(1 for record in self._records.values() if record.status is DeploymentStatus.RUNNING)

    def shutdown(self) -> None:
        """Stop every running instance and record it stopped"""
        for record in self.list_deployments():
            if record.status is DeploymentStatus.RUNNING:
                try:
                    self.teardown(record.id)
                except DeploymentError as e:
                    # Already being stopped by a concurrent teardown
                    logger.warning(f"Shutdown skipped {record.id}: {e.message}")
        self.supervisor.stop_all()
        logger.info("Deployer shut down")
