"""JSON run reports."""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import resources

from ..terrain import Terrain, scalar_to_str


@dataclass
class RunReport:
    command: list
    terrain: Terrain
    mode: str = "exact"
    solution: dict = field(default_factory=dict)
    timing_ms: dict = field(default_factory=dict)
    verification: dict = field(default_factory=dict)

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timing_ms[name] = round((time.perf_counter() - t0) * 1000, 3)

    @property
    def ok(self) -> bool:
        return bool(self.verification.get("ok", False))

    def to_dict(self) -> dict:
        t = self.terrain
        return {
            "command": list(self.command),
            "instance": {"n": t.n, "y_max": scalar_to_str(t.y_max), "digest": t.digest()},
            "mode": self.mode,
            "solution": self.solution,
            "timing_ms": self.timing_ms,
            "verification": self.verification,
        }


def report_schema() -> dict:
    return json.loads(resources.files("altguard.cli").joinpath("report_schema.json").read_text())
