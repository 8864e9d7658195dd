"""Dataset loading, bundled datasets and report serialization."""

from __future__ import annotations

import csv
import io as _io
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .estimation import DataQualityError, Dataset

__all__ = [
    "BUNDLED",
    "DatasetParseError",
    "RunConfig",
    "load_dataset",
    "parse_dataset",
    "dataset_to_csv",
    "format_number",
    "render",
    "COMMANDS",
    "FORMATS",
]

BUNDLED = ("barlow1975", "quesenberry1982")
COMMANDS = ("fit", "gof", "simulate", "sample", "curve")
FORMATS = ("json", "csv", "table")
SIG_DIGITS = 12

_SPLIT = re.compile(r"[\s,]+")


class DatasetParseError(DataQualityError):
    """Malformed dataset text; the message carries the line number."""


@dataclass
class RunConfig:
    """Validated settings for one CLI invocation."""

    command: str
    input_path: str | None = None
    k: int | None = None
    k_max: int | None = None
    method: str = "mle"
    output_format: str = "json"
    seed: int | None = None
    p: float | None = None
    theta: float | None = None
    n: int | None = None
    points: int = 101
    x_max: float | None = None
    rel_tol: float | None = None
    max_terms: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.output_format not in FORMATS:
            raise ValueError(f"unknown format {self.output_format!r}")
        if self.command in ("fit", "gof") and not self.input_path:
            raise ValueError(f"{self.command} needs --data")
        if self.command in ("sample", "curve"):
            missing = [n for n in ("p", "theta", "k") if getattr(self, n) is None]
            if missing:
                raise ValueError(f"{self.command} needs " + ", ".join("--" + m for m in missing))


def parse_dataset(text: str, source: str = "<text>") -> Dataset:
    """Parse comma- or whitespace-separated nonnegative reals; ``#`` starts a comment."""
    values: list[float] = []
    seen_content = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if not seen_content and body == "x":
            seen_content = True  # header written by dataset_to_csv
            continue
        seen_content = True
        for tok in _SPLIT.split(body):
            if not tok:
                continue
            try:
                v = float(tok)
            except ValueError:
                raise DatasetParseError(f"{source}:{lineno}: cannot parse {tok!r} as a number") from None
            if not math.isfinite(v):
                raise DatasetParseError(f"{source}:{lineno}: non-finite value {tok!r}")
            if v < 0:
                raise DatasetParseError(f"{source}:{lineno}: negative value {tok!r}")
            values.append(v)
    if not values:
        raise DatasetParseError(f"{source}: no data values found")
    try:
        return Dataset(np.array(values), label=source)
    except ValueError as exc:
        raise DatasetParseError(f"{source}: {exc}") from None


def bundled_path(name: str):
    if name not in BUNDLED:
        raise ValueError(f"unknown bundled dataset {name!r}")
    return resources.files("egtl").joinpath("data", f"{name}.txt")


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset from a file, or one of the bundled names in ``BUNDLED``."""
    if str(path) in BUNDLED:
        ref = bundled_path(str(path))
        return parse_dataset(ref.read_text(encoding="utf-8"), str(path))
    p = Path(path)
    text = p.read_text(encoding="utf-8")  # OSError propagates to the caller
    return parse_dataset(text, str(p))


def format_number(x: Any) -> Any:
    """Numbers to 12 significant digits; other values unchanged."""
    if isinstance(x, (bool, np.bool_)) or x is None:
        return bool(x) if x is not None else None
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(format(x, f".{SIG_DIGITS}g"))
    return x


def _cell_text(x: Any) -> str:
    if isinstance(x, float):
        return format(x, f".{SIG_DIGITS}g")
    if x is None:
        return ""
    if isinstance(x, (list, tuple)):
        return " ".join(_cell_text(format_number(v)) for v in x)
    return str(x)


def _normalize(rows: Sequence[Mapping[str, Any]]) -> list[dict[str, Any]]:
    out = []
    for row in rows:
        clean = {}
        for key, v in row.items():
            if isinstance(v, (list, tuple)):
                clean[key] = [format_number(e) for e in v]
            else:
                clean[key] = format_number(v)
        out.append(clean)
    return out


def _columns(rows: Sequence[Mapping[str, Any]]) -> list[str]:
    cols: list[str] = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def render(rows: Mapping[str, Any] | Sequence[Mapping[str, Any]], fmt: str = "json") -> str:
    """Render one record or a list of records as json, csv or an aligned table."""
    single = isinstance(rows, Mapping)
    recs = _normalize([rows] if single else list(rows))
    if fmt == "json":
        return json.dumps(recs[0] if single else recs, indent=2)
    cols = _columns(recs)
    cells = [[_cell_text(r.get(c)) for c in cols] for r in recs]
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows(cells)
        return buf.getvalue().rstrip("\n")
    if fmt == "table":
        widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
        lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
        return "\n".join(lines)
    raise ValueError(f"unknown format {fmt!r}")


def dataset_to_csv(data: Dataset | Iterable[float]) -> str:
    """One-column CSV (header ``x``) that ``parse_dataset`` reads back exactly.

    Values use ``repr`` so the round trip is lossless.
    """
    x = data.values if isinstance(data, Dataset) else np.asarray(list(data), dtype=float)
    return "x\n" + "\n".join(repr(float(v)) for v in x) + "\n"
