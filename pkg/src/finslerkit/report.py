"""Report records and their text/JSON rendering."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCHEMA_VERSION = 1


@dataclass
class Check:
    name: str
    value: float
    tolerance: float | None
    passed: bool
    asserted: bool = True


@dataclass
class Report:
    command: str
    inputs: dict[str, Any]
    checks: list[Check] = field(default_factory=list)
    results: dict[str, Any] = field(default_factory=dict)
    error: str | None = None

    def check(self, name: str, value: float, tolerance: float, *, upper: bool = True) -> Check:
        """Record value <= tolerance (or >= when ``upper`` is False)."""
        value = float(value)
        ok = value <= tolerance if upper else value >= tolerance
        c = Check(name, value, tolerance, bool(ok))
        self.checks.append(c)
        return c

    def observe(self, name: str, value: float) -> Check:
        """Record a measured value that is not asserted."""
        c = Check(name, float(value), None, True, asserted=False)
        self.checks.append(c)
        return c

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return 1
        return 0 if all(c.passed for c in self.checks if c.asserted) else 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "inputs": _plain(self.inputs),
            "checks": [
                {"name": c.name, "value": _plain(c.value), "tolerance": _plain(c.tolerance),
                 "passed": c.passed, "asserted": c.asserted}
                for c in self.checks
            ],
            "results": _plain(self.results),
            "error": self.error,
            "status": "pass" if self.exit_code == 0 else "fail",
            "exit_code": self.exit_code,
        }

    def render(self, fmt: str = "text") -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"
        return _render_text(self)


def _plain(x: Any) -> Any:
    """Convert numpy containers to JSON-compatible values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_value(x: Any, indent: str) -> str:
    if isinstance(x, np.ndarray) and x.ndim == 2:
        rows = ["[" + ", ".join(fmt_float(v) for v in row) + "]" for row in x]
        return "\n" + "\n".join(indent + "  " + r for r in rows)
    if isinstance(x, np.ndarray) and x.ndim == 1:
        return "[" + ", ".join(fmt_float(v) for v in x) + "]"
    if isinstance(x, np.ndarray):
        return "".join(f"\n{indent}  [{k}]:{_fmt_value(sub, indent + '  ')}" for k, sub in enumerate(x))
    if isinstance(x, (float, np.floating)):
        return fmt_float(x)
    if isinstance(x, (list, tuple)) and x and all(isinstance(v, np.ndarray) for v in x):
        return "".join(_fmt_value(v, indent + "  ") for v in x)
    if isinstance(x, dict):
        return "".join(f"\n{indent}  {k}: {_fmt_value(v, indent + '  ')}" for k, v in x.items())
    return str(x)


def _render_text(rep: Report) -> str:
    lines = [f"command: {rep.command}", f"schema: {SCHEMA_VERSION}"]
    for k, v in rep.inputs.items():
        lines.append(f"input {k}: {_fmt_value(np.asarray(v) if isinstance(v, list) and v and isinstance(v[0], list) else v, '')}")
    for c in rep.checks:
        if c.asserted:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"[{status}] {c.name}: {fmt_float(c.value)} (tol {fmt_float(c.tolerance)})")
        else:
            lines.append(f"[INFO] {c.name}: {fmt_float(c.value)}")
    for k, v in rep.results.items():
        lines.append(f"{k}: {_fmt_value(v, '')}")
    if rep.error:
        lines.append(f"error: {rep.error}")
    lines.append(f"status: {'pass' if rep.exit_code == 0 else 'fail'}")
    return "\n".join(lines) + "\n"
