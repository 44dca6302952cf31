"""Structured outcomes of the condition checkers."""

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    return x


@dataclass(frozen=True)
class Verdict:
    condition: str
    passed: bool
    witness: Any = None

    def to_dict(self):
        return {"condition": self.condition, "passed": self.passed, "witness": _plain(self.witness)}


@dataclass
class DiagnosticReport:
    verdicts: list = field(default_factory=list)
    outcome: Optional[str] = None

    def add(self, condition, passed, witness=None):
        if not passed and witness is None:
            raise ValueError(f"failed condition {condition!r} needs a witness")
        self.verdicts.append(Verdict(condition, bool(passed), witness))
        return self

    def __getitem__(self, condition) -> Verdict:
        for v in self.verdicts:
            if v.condition == condition:
                return v
        raise KeyError(condition)

    def __contains__(self, condition):
        return any(v.condition == condition for v in self.verdicts)

    def passed(self, prefix: str = "") -> bool:
        """True when every verdict whose id starts with ``prefix`` passed."""
        return all(v.passed for v in self.verdicts if v.condition.startswith(prefix))

    def failures(self):
        return [v for v in self.verdicts if not v.passed]

    def to_dict(self):
        out = {"verdicts": [v.to_dict() for v in self.verdicts]}
        if self.outcome is not None:
            out["outcome"] = self.outcome
        return out
