from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional

from core.errors import AssertionFailure
from core.settings import NumericalSettings


@dataclass
class Check:
    """One theorem equality evaluated during a run."""

    name: str
    value: float
    expected: float
    tol: float

    @property
    def residual(self) -> float:
        return abs(self.value - self.expected)

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "expected": self.expected,
            "residual": self.residual,
            "tol": self.tol,
            "passed": self.passed,
        }


class BaseLab(ABC):
    """Base class for every pipeline the launcher can run."""

    name = "lab"

    def __init__(self, settings: Optional[NumericalSettings] = None, seed: Optional[int] = None):
        self.settings = settings or NumericalSettings.from_env()
        self.seed = seed
        self.checks: List[Check] = []
        self.finished = False

    @abstractmethod
    def run(self) -> Dict:
        """Execute the pipeline and return its JSON-ready summary."""
        pass

    @abstractmethod
    def table(self) -> List[tuple]:
        """Rows (label, value) for the human-readable report."""
        pass

    def reset(self):
        """Forget checks from a previous run."""
        self.checks = []
        self.finished = False

    def check(self, name: str, value: float, expected: float, tol: float) -> Check:
        entry = Check(name=name, value=float(value), expected=float(expected), tol=float(tol))
        self.checks.append(entry)
        return entry

    def failed_checks(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def raise_on_failure(self):
        failed = self.failed_checks()
        if failed:
            worst = max(failed, key=lambda c: c.residual)
            names = ", ".join(c.name for c in failed)
            raise AssertionFailure(f"checks failed: {names}", residual=worst.residual)

    def base_summary(self) -> Dict:
        return {
            "command": self.name,
            "seed": self.seed,
            "settings": self.settings.as_dict(),
            "checks": [c.as_dict() for c in self.checks],
        }
