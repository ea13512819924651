"""
Deployment Ledger

Append-only JSON-lines file ``deployments.jsonl`` under the state directory.
Every status change appends the full record; on load the last line per id
wins and unreadable lines (a torn final write) are skipped.
"""

import json
import logging
import os
import threading
from pathlib import Path
from typing import Dict, List, Union

from pydantic import ValidationError

from schemas.api_schemas import DeploymentRecord

logger = logging.getLogger(__name__)

LEDGER_FILENAME = "deployments.jsonl"


class DeploymentLedger:
    def __init__(self, state_dir: Union[str, Path]):
        self.path = Path(state_dir) / LEDGER_FILENAME
        self._lock = threading.Lock()

    def append(self, record: DeploymentRecord) -> None:
        line = json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if self._torn_tail():
                line = "\n" + line
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line + "\n")
                f.flush()
                os.fsync(f.fileno())

    def _torn_tail(self) -> bool:
        """True when the last write was cut off before its newline"""
        if not self.path.exists() or self.path.stat().st_size == 0:
            return False
        with open(self.path, "rb") as f:
            f.seek(-1, os.SEEK_END)
            return f.read(1) != b"\n"

    def load(self) -> List[DeploymentRecord]:
        """Latest record per id, in first-appearance order"""
        if not self.path.exists():
            return []

        records: Dict[str, DeploymentRecord] = {}
        with self._lock:
            lines = self.path.read_text(encoding="utf-8", errors="replace").splitlines()
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = DeploymentRecord.model_validate(json.loads(line))
            except (ValueError, ValidationError) as e:
                logger.warning(f"Skipping unreadable ledger line {number} in {self.path}: {e}")
                continue
            records[record.id] = record
        return list(records.values())
