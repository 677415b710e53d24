"""Named verification outcomes with a machine-checkable pass rule."""

from __future__ import annotations

import json
import math
import operator
import re
from dataclasses import dataclass, field

OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge, "==": operator.eq}
CLAUSE = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*(<=|>=|==|<|>)\s*([-+0-9.eE]+|inf)\s*$")

SCHEMA = {
    "type": "object",
    "required": ["name", "inputs", "metrics", "pass", "tolerance_spec"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "inputs": {"type": "object"},
        "metrics": {"type": "object", "additionalProperties": {"type": ["number", "null"]}},
        "pass": {"type": "boolean"},
        "tolerance_spec": {"type": "string"},
    },
}


def evaluate(tolerance_spec: str, metrics: dict) -> bool:
    """True iff every ``metric op value`` clause (separated by ';') holds."""
    ok = True
    for clause in filter(None, (c.strip() for c in tolerance_spec.split(";"))):
        m = CLAUSE.match(clause)
        if m is None:
            raise ValueError(f"bad tolerance clause {clause!r}")
        name, op, val = m.groups()
        x = metrics.get(name)
        if x is None or (isinstance(x, float) and math.isnan(x)):
            ok = False
            continue
        ok &= bool(OPS[op](float(x), float(val)))
    return ok


@dataclass
class VerificationReport:
    name: str
    inputs: dict
    metrics: dict
    tolerance_spec: str
    details: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return evaluate(self.tolerance_spec, self.metrics)

    def to_dict(self) -> dict:
        def clean(v):
            v = float(v)
            return None if math.isnan(v) else (v if math.isfinite(v) else (1e308 if v > 0 else -1e308))

        return {
            "name": self.name,
            "inputs": {k: (v if isinstance(v, (int, float, str, bool, list)) else str(v))
                       for k, v in self.inputs.items()},
            "metrics": {k: clean(v) for k, v in self.metrics.items()},
            "pass": self.passed,
            "tolerance_spec": self.tolerance_spec,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        body = ", ".join(f"{k}={v:.6g}" for k, v in self.metrics.items())
        return f"[{status}] {self.name}: {body}"
