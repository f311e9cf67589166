"""
Deterministic serialization of result tables

CSV: optional "# key: value" metadata lines, a header row, then one line per
row; floats use 17 significant digits and '\\n' line endings.
JSON: {"meta": {...}, "rows": [{column: value, ...}, ...]} with stable key order.
"""

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .measure import JointDistribution


@dataclass(frozen=True)
class Table:
    columns: Tuple[str, ...]
    rows: List[Tuple[Any, ...]] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row {row!r} does not match columns {self.columns}")

    def column(self, name: str) -> List[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


def _check_finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite value {value!r}")
    return value


def format_value(value: Any) -> str:
    _check_finite(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _plain(value: Any) -> Any:
    """Convert numpy scalars and tuples into JSON-native values"""
    if hasattr(value, "item") and not isinstance(value, (list, tuple, dict)):
        value = value.item()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in sorted(value.items())}
    return _check_finite(value)


def to_csv(table: Table) -> str:
    buffer = io.StringIO()
    for key in sorted(table.meta):
        value = _plain(table.meta[key])
        text = json.dumps(value) if isinstance(value, (list, dict)) else format_value(value)
        buffer.write(f"# {key}: {text}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(_plain(v)) for v in row])
    return buffer.getvalue()


def to_json(table: Table) -> str:
    document = {
        "meta": _plain(table.meta),
        "rows": [dict(zip(table.columns, (_plain(v) for v in row))) for row in table.rows],
    }
    return json.dumps(document, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def emit_table(table: Table, fmt: str = "csv") -> str:
    """Serialize a table as CSV or JSON text"""
    fmt = getattr(fmt, "value", fmt)
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ValueError(f"unknown format {fmt!r}")


def distribution_table(
    distribution: JointDistribution, columns: Optional[Sequence[str]] = None
) -> Table:
    """One row per outcome tuple (sorted), outcome labels followed by the probability"""
    width = len(next(iter(distribution.entries), ()))
    names = columns or distribution.names or tuple(f"outcome_{i}" for i in range(width))
    rows = [
        distribution.label(key) + (distribution.entries[key],)
        for key in sorted(distribution.entries)
    ]
    return Table(tuple(names) + ("probability",), rows)


def write_output(text: str, path: Optional[Path]) -> None:
    """Write to ``path`` (UTF-8, '\\n' endings) or to stdout when no path is set"""
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
