"""Shared serialization: metadata headers, 12-significant-digit numbers,
RFC-4180 CSV bodies, JSON payloads. No wall-clock anywhere so reruns are
byte-identical."""

import csv
import json
from pathlib import Path

from . import __version__


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, complex):
        return {"re": float(f"{obj.real:.12g}"), "im": float(f"{obj.imag:.12g}")}
    return obj


def header_lines(schema: str, config: dict, flags=()) -> list:
    lines = [f"# schema: {schema}",
             f"# version: {__version__}",
             f"# config: {json.dumps(_json_ready(config), sort_keys=True)}"]
    for fl in flags:
        lines.append(f"# assumption: {fl}")
    return lines


def write_csv(path, schema: str, colnames, rows, config: dict, flags=()):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        for line in header_lines(schema, config, flags):
            f.write(line + "\n")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(colnames)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_json(path, schema: str, payload: dict, config: dict, flags=()):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"_meta": {"schema": schema, "version": __version__,
                     "config": _json_ready(config),
                     "assumptions": list(flags)}}
    doc.update(_json_ready(payload))
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")
    return path
