"""Deterministic report documents.

The machine block is one ``key<TAB>value`` record per line.  Values are JSON
literals: strings and booleans are JSON-encoded, numbers are written with 12
significant digits.  Floats are rounded to that precision when added, so
``parse_machine(doc.machine()) == doc.rows`` holds exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

SIG_DIGITS = 12


def format_number(x: float | int) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be reported")
    s = f"{x:.{SIG_DIGITS}g}"
    if s == "-0":
        s = "0"
    if all(c in "-0123456789" for c in s):
        s += ".0"
    return s


def round_sig(x: float) -> float:
    return float(format_number(float(x)))


def _normalize(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return int(value)
    if hasattr(value, "item"):
        value = value.item()
        return _normalize(value)
    if isinstance(value, float):
        return round_sig(value)
    raise TypeError(f"unsupported report value {value!r}")


def encode_value(value: Any) -> str:
    if isinstance(value, (float, int)) and not isinstance(value, bool):
        return format_number(value)
    return json.dumps(value, ensure_ascii=False)


@dataclass
class ReportDocument:
    """Ordered key/value rows plus a human-readable table."""

    rows: list[tuple[str, Any]] = field(default_factory=list)
    human_lines: list[str] = field(default_factory=list)

    def add(self, key: str, value: Any) -> None:
        if not key or any(c in key for c in "\t\n"):
            raise ValueError(f"bad report key {key!r}")
        self.rows.append((key, _normalize(value)))

    def extend(self, prefix: str, mapping: dict) -> None:
        for k, v in mapping.items():
            self.add(f"{prefix}{k}", v)

    def table(self, headers: Sequence[str], rows: Sequence[Sequence[Any]], title: str = "") -> None:
        """Append an aligned text table to the human block."""
        cells = [[str(h) for h in headers]]
        for r in rows:
            cells.append([_cell(v) for v in r])
        widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
        if title:
            self.human_lines.append(title)
        for k, row in enumerate(cells):
            self.human_lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                                              for i, (c, w) in enumerate(zip(row, widths))).rstrip())
            if k == 0:
                self.human_lines.append("  ".join("-" * w for w in widths))
        self.human_lines.append("")

    def text(self, line: str = "") -> None:
        self.human_lines.append(line)

    def machine(self) -> str:
        return "".join(f"{k}\t{encode_value(v)}\n" for k, v in self.rows)

    def human(self) -> str:
        return "\n".join(self.human_lines).rstrip() + "\n"

    def render(self, fmt: str = "both") -> str:
        if fmt == "machine":
            return self.machine()
        if fmt == "human":
            return self.human()
        if fmt == "both":
            return self.machine() + "\n" + self.human()
        raise ValueError(f"unknown format {fmt!r}")

    def get(self, key: str, default: Any = None) -> Any:
        for k, v in self.rows:
            if k == key:
                return v
        return default


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def parse_machine(text: str) -> list[tuple[str, Any]]:
    """Parse a machine block back into rows; stops at the first blank line."""
    rows = []
    # split on newline only: values may legitimately contain U+0085 or U+2028
    for line in text.rstrip("\n").split("\n"):
        if not line.strip():
            break
        key, sep, value = line.partition("\t")
        if not sep:
            raise ValueError(f"malformed machine record {line!r}")
        rows.append((key, json.loads(value)))
    return rows
