from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Report:
    """Named numerical defects, each compared against its own threshold."""

    defects: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def add(self, name: str, defect: float, threshold: float) -> None:
        self.defects[name] = float(defect)
        self.thresholds[name] = float(threshold)

    def passed(self, name: str) -> bool:
        return self.defects[name] <= self.thresholds[name]

    @property
    def failures(self) -> list[str]:
        return [k for k in self.defects if not self.passed(k)]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": {
                k: {"defect": self.defects[k], "threshold": self.thresholds[k],
                    "passed": self.passed(k)}
                for k in self.defects
            },
        }
