"""
Instance Supervisors

Launch and stop service instances for the deployer. ``InProcessSupervisor``
serves each bundle from a thread of the deployer process.
``ExternalCommandSupervisor`` is a template for a container engine: it writes
the bundle directory and spawns a configured command for it.
"""

import json
import logging
import os
import shlex
import subprocess
import threading
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Mapping, Optional

from codegen.bundle import ServiceBundle, write_bundle_dir
from runtime.backends import build_backends
from runtime.server import ServiceError, ServiceHandle, serve_bundle

logger = logging.getLogger(__name__)

CREDENTIALS_ENV = "QSF_CREDENTIALS"


class LaunchError(Exception):
    def __init__(self, message: str):
        super().__init__(message)
        self.code = "E_LAUNCH"
        self.message = message


class InstanceSupervisor(ABC):
    @abstractmethod
    def launch(self, deployment_id: str, bundle: ServiceBundle, port: int, credentials: Mapping[str, str]) -> None:
        """Start serving ``bundle`` on ``port``; raises LaunchError"""

    @abstractmethod
    def stop(self, deployment_id: str) -> None:
        """Stop the instance; unknown ids are ignored"""

    @abstractmethod
    def stop_all(self) -> None:
        pass


class InProcessSupervisor(InstanceSupervisor):
    def __init__(self, config):
        self.config = config
        self._handles: Dict[str, ServiceHandle] = {}
        self._lock = threading.Lock()

    def launch(self, deployment_id, bundle, port, credentials):
        backends = build_backends(credentials, self.config)
        try:
            handle = serve_bundle(bundle, port, backends, self.config.BIND_HOST, self.config.DRAIN_TIMEOUT)
        except ServiceError as e:
            raise LaunchError(e.message)
        with self._lock:
            self._handles[deployment_id] = handle

    def stop(self, deployment_id):
        with self._lock:
            handle = self._handles.pop(deployment_id, None)
        if handle is not None:
            handle.shutdown()

    def stop_all(self):
        with self._lock:
            ids = list(self._handles)
        for deployment_id in ids:
            self.stop(deployment_id)


class ExternalCommandSupervisor(InstanceSupervisor):
    """Runs ``QSF_EXTERNAL_COMMAND`` per deployment.

    The template may use ``{bundle_dir}``, ``{port}`` and ``{host}``.
    Credentials travel as JSON in the ``QSF_CREDENTIALS`` environment
    variable, never on the command line.
    """

    def __init__(self, config, work_dir: Optional[Path] = None):
        self.config = config
        self.command = config.EXTERNAL_COMMAND
        self.work_dir = Path(work_dir or Path(config.STATE_DIR) / "bundles")
        self._processes: Dict[str, subprocess.Popen] = {}
        self._lock = threading.Lock()

    def launch(self, deployment_id, bundle, port, credentials):
        bundle_dir = self.work_dir / deployment_id
        write_bundle_dir(bundle, bundle_dir)
        argv = shlex.split(self.command.format(bundle_dir=bundle_dir, port=port, host=self.config.BIND_HOST))
        env = dict(os.environ)
        env[CREDENTIALS_ENV] = json.dumps(dict(credentials))
        try:
            process = subprocess.Popen(argv, env=env)
        except OSError as e:
            raise LaunchError(f"cannot start '{argv[0]}': {e}")
        logger.info(f"Started external instance for {deployment_id} (pid {process.pid})")
        with self._lock:
            self._processes[deployment_id] = process

    def stop(self, deployment_id):
        with self._lock:
            process = self._processes.pop(deployment_id, None)
        if process is None:
            return
        process.terminate()
        try:
            process.wait(timeout=self.config.DRAIN_TIMEOUT + 1.0)
        except subprocess.TimeoutExpired:
            process.kill()
            process.wait()

    def stop_all(self):
        with self._lock:
            ids = list(self._processes)
        for deployment_id in ids:
            self.stop(deployment_id)


def make_supervisor(config) -> InstanceSupervisor:
    if config.SUPERVISOR == "external-command":
        return ExternalCommandSupervisor(config)
    if config.SUPERVISOR != "in-process":
        raise ValueError(f"unknown supervisor '{config.SUPERVISOR}'; expected in-process or external-command")
    return InProcessSupervisor(config)
