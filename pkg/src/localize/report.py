"""Report rows and their JSON / CSV / table renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

SCHEMA_VERSION = 1


def _jsonable(x: Any) -> Any:
    """Complex numbers become ``[re, im]``; non-finite floats become ``None``."""
    if isinstance(x, complex):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if hasattr(x, "item") and not isinstance(x, (list, tuple, dict, str)):
        return _jsonable(x.item())
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass
class Row:
    quantity: str
    method: str
    value: Any
    err: float
    reference: str
    reference_value: Any
    abs_diff: float
    rel_diff: float
    tol: dict
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return _jsonable(d)


def compare(
    quantity: str,
    method: str,
    value,
    reference: str,
    reference_value,
    err: float = 0.0,
    rtol: float = 0.0,
    atol: float = 0.0,
    nsigma: float = 0.0,
) -> Row:
    """Row that passes when ``|value - ref| <= atol + rtol |ref| + nsigma err``."""
    value = _scalar(value)
    reference_value = _scalar(reference_value)
    diff = abs(value - reference_value)
    scale = abs(reference_value)
    rel = diff / scale if scale > 0 else (0.0 if diff == 0 else math.inf)
    limit = atol + rtol * scale + nsigma * err
    tol = {k: v for k, v in (("rtol", rtol), ("atol", atol), ("nsigma", nsigma)) if v}
    passed = bool(diff <= limit) and math.isfinite(diff)
    return Row(quantity, method, value, float(err), reference, reference_value, float(diff), float(rel), tol, passed)


def bounded(quantity: str, method: str, value, limit: float, reference: str = "zero", reference_value=0.0) -> Row:
    """Row for a residual-type quantity that must not exceed ``limit``."""
    return compare(quantity, method, value, reference, reference_value, atol=limit)


def in_range(quantity: str, method: str, value: float, lo: float, hi: float, reference: str, target: float) -> Row:
    value = float(value)
    diff = abs(value - target)
    passed = bool(lo <= value <= hi)
    rel = diff / abs(target) if target else diff
    return Row(quantity, method, value, 0.0, reference, target, diff, rel, {"range": [lo, hi]}, passed)


def failed(quantity: str, method: str, reference: str, reason: str) -> Row:
    return Row(quantity, method, None, 0.0, reference, None, math.inf, math.inf, {"error": reason}, False)


def _scalar(x):
    if hasattr(x, "item"):
        x = x.item()
    return x if isinstance(x, complex) else float(x)


@dataclass
class RunReport:
    command: str
    inputs: dict
    rows: list = field(default_factory=list)
    seed: int | None = None
    wall_time_ms: int | None = None
    notes: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs": _jsonable(self.inputs),
            "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
            "rows": [r.to_dict() for r in self.rows],
            "all_pass": self.all_pass,
            "skipped": _jsonable(self.skipped),
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["quantity", "method", "value", "err", "reference", "reference_value", "abs_diff", "rel_diff", "pass"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            d = r.to_dict()
            w.writerow([_cell(d[c]) for c in cols])
        return buf.getvalue()

    def to_table(self) -> str:
        cols = ["quantity", "method", "value", "reference", "abs_diff", "pass"]
        body = []
        for r in self.rows:
            d = r.to_dict()
            body.append([_cell(d[c]) for c in cols])
        widths = [max(len(c), *(len(b[i]) for b in body)) if body else len(c) for i, c in enumerate(cols)]
        line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        out = [f"{self.command}: {'PASS' if self.all_pass else 'FAIL'}", line(cols), line(["-" * w for w in widths])]
        out += [line(b) for b in body]
        out += [f"skipped {s['method']}: {s['reason']}" for s in self.skipped]
        out += [f"note: {n}" for n in self.notes]
        return "\n".join(out) + "\n"


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "NO"
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (float, int)) or t is None for t in v):
        re, im = v
        return f"{re:.10g}{im:+.3g}j" if im else f"{re:.10g}"
    return str(v)
