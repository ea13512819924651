import json
from dataclasses import dataclass
from typing import Any, Dict


@dataclass(frozen=True)
class ExecutionResult:
    """Counts returned by a backend for one execution"""
    counts: Dict[str, int]
    shots: int
    seed: int
    backend_id: str

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError(f"shots must be positive, got {self.shots}")
        if sum(self.counts.values()) != self.shots:
            raise ValueError(f"counts sum to {sum(self.counts.values())}, expected {self.shots}")
        widths = {len(key) for key in self.counts}
        if len(widths) > 1 or any(set(key) - {"0", "1"} for key in self.counts):
            raise ValueError(f"malformed count keys: {sorted(self.counts)}")
        object.__setattr__(self, 'counts', dict(sorted(self.counts.items())))

    def to_payload(self) -> Dict[str, Any]:
        return {
            "counts": dict(self.counts),
            "shots": self.shots,
            "seed": self.seed,
            "backend": self.backend_id,
        }

    def to_json(self) -> str:
        """Canonical response body: compact, counts in lexicographic key order"""
        return json.dumps(self.to_payload(), separators=(",", ":"))
