"""Serialization of run, energy, spectrum and sweep results to CSV and JSON."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path


def dumps(obj) -> str:
    # sorted keys + repr floats keep reports byte-identical across runs
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def write_csv(path, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(rows), encoding="utf-8")
    return path


def record_rows(result):
    yield ("sample_index", "vin", "code", "cycles", "overload")
    for i in range(len(result)):
        yield (i, repr(float(result.vin[i])), int(result.codes[i]), int(result.cycles[i]),
               int(result.overload[i]))


def records_json(result, with_traces=False):
    out = []
    for rec in result:
        item = {"sample_index": rec.sample_index, "vin": rec.vin, "code": rec.code,
                "cycles": rec.cycles, "overload": rec.overload,
                "out_of_range": rec.out_of_range}
        if with_traces and rec.trace is not None:
            item["trace"] = rec.trace.to_dict()
        out.append(item)
    return out


SWEEP_COLUMNS = ("osr", "policy", "initial_step", "cycles", "dac_pj", "cmp_pj", "logic_pj",
                 "total_pj")


def sweep_rows(rows):
    yield SWEEP_COLUMNS
    for r in rows:
        yield tuple(getattr(r, c) for c in SWEEP_COLUMNS)


def energy_rows(report):
    yield ("sample_index", "dac_j", "comparator_j", "logic_j")
    for i, (d, c, l) in enumerate(report.per_conversion):
        yield (i, repr(d), repr(c), repr(l))


def linearity_rows(report):
    yield ("code", "dnl_lsb", "inl_lsb")
    for k, d, n in zip(report.codes.tolist(), report.dnl_lsb.tolist(), report.inl_lsb.tolist()):
        yield (k, repr(d), repr(n))


def read_codes(path):
    """Codes from a records CSV (``code`` column) or one integer per line."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    codes = []
    if "code" in header:
        col = header.index("code")
        for lineno, ln in enumerate(lines[1:], start=2):
            try:
                codes.append(float(ln.split(",")[col]))
            except (ValueError, IndexError):
                raise ValueError(f"{path}: line {lineno}: bad code field") from None
    else:
        for lineno, ln in enumerate(lines, start=1):
            try:
                codes.append(float(ln.strip()))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: cannot parse {ln.strip()!r}") from None
    if not codes:
        raise ValueError(f"{path}: no codes")
    return codes
