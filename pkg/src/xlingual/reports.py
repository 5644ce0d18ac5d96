"""Evaluation reports: typed metric values with declared valid ranges.

Every emitted value carries its metric's range and is checked against it
at emit time, so a bug that produces an out-of-range number fails loudly
instead of landing in a results table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ContractError, DataFormatError

METRIC_RANGES: dict[str, tuple[float, float]] = {
    "retrieval_accuracy": (0.0, 1.0),
    "bitext_f1": (0.0, 1.0),
    "bitext_precision": (0.0, 1.0),
    "bitext_recall": (0.0, 1.0),
    "spearman_rho": (-1.0, 1.0),
    "purity": (0.0, 1.0),
    "macro_purity": (0.0, 1.0),
    "probe_accuracy": (0.0, 1.0),
    "explained_variance_ratio": (0.0, 1.0),
    "loss": (0.0, float("inf")),
}


@dataclass(frozen=True)
class EvalReport:
    """One metric outcome, optionally broken down by language or pair."""

    metric: str
    value: float
    config_hash: str
    seed: int
    breakdown: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def range(self) -> tuple[float, float]:
        if self.metric not in METRIC_RANGES:
            raise ContractError(f"metric {self.metric!r} has no declared range")
        return METRIC_RANGES[self.metric]

    def emit(self) -> dict:
        """Validate and return the canonical JSON-ready form."""
        lo, hi = self.range()
        if not lo <= self.value <= hi:
            raise ContractError(
                f"{self.metric} value {self.value} outside declared range [{lo}, {hi}]"
            )
        for key, val in self.breakdown.items():
            if isinstance(val, (int, float)) and not lo <= float(val) <= hi:
                raise ContractError(
                    f"{self.metric} breakdown {key!r} value {val} outside "
                    f"declared range [{lo}, {hi}]"
                )
        return {
            "metric": self.metric,
            "value": self.value,
            "range": [lo, hi],
            "breakdown": self.breakdown,
            "details": self.details,
            "config_hash": self.config_hash,
            "seed": self.seed,
        }


def write_report(path: str | Path, report: EvalReport) -> dict:
    obj = report.emit()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    return obj


def read_report(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: invalid report JSON ({exc.msg})") from None
    for key in ("metric", "value", "range", "config_hash"):
        if key not in obj:
            raise DataFormatError(f"{path}: report missing key {key!r}")
    return obj
