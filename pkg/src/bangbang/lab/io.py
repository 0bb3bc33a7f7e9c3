"""Row serialization: CSV (RFC 4180), JSON lines, and two-column TSV plot data.

Floats are written with ``repr`` so values round-trip exactly; NaN becomes
an empty CSV field or JSON ``null``.  Wall time is left out unless asked
for, which keeps reruns byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, TextIO

from .runner import FIELDS, ResultRow


def _fields(include_timing: bool) -> list[str]:
    return [f for f in FIELDS if include_timing or f != "wall_time"]


def _cell(v):
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(v)
    return v


def write_csv(rows: Iterable[ResultRow], fh: TextIO, include_timing: bool = False) -> None:
    fields = _fields(include_timing)
    w = csv.writer(fh, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(fields)
    for r in rows:
        d = r.as_dict(include_timing)
        w.writerow([_cell(d[f]) for f in fields])


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def write_jsonl(rows: Iterable[ResultRow], fh: TextIO, include_timing: bool = False) -> None:
    for r in rows:
        d = {k: _json_value(v) for k, v in r.as_dict(include_timing).items()}
        fh.write(json.dumps(d, sort_keys=True) + "\n")


def write_rows(rows, fh: TextIO, fmt: str = "csv", include_timing: bool = False) -> None:
    if fmt == "csv":
        write_csv(rows, fh, include_timing)
    elif fmt == "jsonl":
        write_jsonl(rows, fh, include_timing)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def rows_to_text(rows, fmt: str = "csv", include_timing: bool = False) -> str:
    buf = io.StringIO(newline="")
    write_rows(rows, buf, fmt, include_timing)
    return buf.getvalue()


def save_rows(rows, path, fmt: str = "csv", include_timing: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        write_rows(rows, fh, fmt, include_timing)
    return path


def _parse_float(s: str) -> float:
    return math.nan if s == "" else float(s)


def read_csv(path) -> list[dict]:
    """Rows of a file written by ``write_csv`` with numeric fields converted."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            d = {}
            for k, v in rec.items():
                if k in ("instance", "algorithm", "schedule_digest"):
                    d[k] = v
                elif k in ("n", "seed"):
                    d[k] = int(v)
                else:
                    d[k] = _parse_float(v)
            out.append(d)
    return out


def write_tsv(path, xs, ys, header: tuple[str, str] = ("x", "y")) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"{header[0]}\t{header[1]}\n")
        for x, y in zip(xs, ys):
            fh.write(f"{float(x)!r}\t{float(y)!r}\n")
    return path
