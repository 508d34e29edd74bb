"""Experiment reports written by the command line."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


def plain(obj: Any) -> Any:
    """Recursively turn numpy scalars/arrays and dataclass-like objects into JSON types."""
    if hasattr(obj, "to_json_obj"):
        return plain(obj.to_json_obj())
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class ExperimentReport:
    command: str
    parameters: dict
    seed: int
    results: Any
    runtime_seconds: float = 0.0
    version: str = ""
    csv_header: Optional[list] = field(default=None, repr=False)
    csv_rows: Optional[list] = field(default=None, repr=False)

    def to_json_obj(self) -> dict:
        return {
            "command": self.command,
            "parameters": plain(self.parameters),
            "seed": int(self.seed),
            "results": plain(self.results),
            "runtime_seconds": self.runtime_seconds,
            "version": self.version,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True, ensure_ascii=False)

    def to_csv(self) -> str:
        if self.csv_header is None:
            raise ValueError(f"{self.command} has no CSV form")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.csv_header)
        for row in self.csv_rows or []:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        return buf.getvalue()
