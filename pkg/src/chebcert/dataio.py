"""Reading and writing datasets (CSV and JSON) and coefficient vectors."""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

import numpy as np

from .approx import ApproximationError, Dataset


class DataFormatError(ValueError):
    """Malformed input file; the message names the offending location."""


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def detect_format(path) -> str:
    suffix = Path(path).suffix.lower()
    return "json" if suffix == ".json" else "csv"


def parse_dataset(path, fmt: str | None = None) -> Dataset:
    """Load a dataset.

    CSV rows are ``x1,...,xd,f`` (an optional non-numeric header row is
    skipped). JSON is ``{"dimension": d, "samples": [{"x": [...], "f": v}, ...]}``.
    """
    fmt = fmt or detect_format(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot read file ({exc.strerror})") from exc
    if fmt == "csv":
        return parse_csv(text, source=str(path))
    if fmt == "json":
        return parse_json(text, source=str(path))
    raise DataFormatError(f"unknown dataset format {fmt!r}")


def parse_csv(text: str, source: str = "<csv>") -> Dataset:
    rows = []
    width = None
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells):
            continue
        if not rows and width is None and not all(_is_number(c) for c in cells):
            width = len(cells)  # header
            continue
        bad = [c for c in cells if not _is_number(c)]
        if bad:
            raise DataFormatError(f"{source}: line {lineno}: non-numeric field {bad[0]!r}")
        if width is None:
            width = len(cells)
        if len(cells) != width:
            raise DataFormatError(
                f"{source}: line {lineno}: expected {width} fields, found {len(cells)}")
        if width < 2:
            raise DataFormatError(f"{source}: line {lineno}: need at least one coordinate and a value")
        rows.append((lineno, [float(c) for c in cells]))
    if not rows:
        raise DataFormatError(f"{source}: no data rows")
    arr = np.array([r for _, r in rows])
    return _build(arr[:, :-1], arr[:, -1], [ln for ln, _ in rows], source, "line")


def parse_json(text: str, source: str = "<json>") -> Dataset:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{source}: line {exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(doc, dict) or "samples" not in doc:
        raise DataFormatError(f"{source}: expected an object with a 'samples' list")
    samples = doc["samples"]
    if not isinstance(samples, list) or not samples:
        raise DataFormatError(f"{source}: 'samples' must be a non-empty list")
    d = doc.get("dimension")
    pts, vals = [], []
    for k, smp in enumerate(samples):
        try:
            x = [float(v) for v in smp["x"]]
            f = float(smp["f"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"{source}: sample {k}: needs numeric 'x' list and 'f'") from exc
        if d is None:
            d = len(x)
        if len(x) != d:
            raise DataFormatError(
                f"{source}: sample {k}: has {len(x)} coordinates, dimension is {d}")
        pts.append(x)
        vals.append(f)
    return _build(np.array(pts), np.array(vals), list(range(len(pts))), source, "sample")


def _build(points, values, locations, source, unit) -> Dataset:
    seen = {}
    for loc, p in zip(locations, map(tuple, points)):
        if p in seen:
            raise DataFormatError(
                f"{source}: {unit} {loc}: duplicate point {list(p)} (first at {unit} {seen[p]})")
        seen[p] = loc
    try:
        return Dataset(points, values)
    except ApproximationError as exc:
        raise DataFormatError(f"{source}: {exc}") from exc


def dataset_to_csv(ds: Dataset) -> str:
    header = ",".join([f"x{i}" for i in range(1, ds.dimension + 1)] + ["f"])
    lines = [header]
    for p, f in zip(ds.points, ds.values):
        lines.append(",".join(repr(float(v)) for v in (*p, f)))
    return "\n".join(lines) + "\n"


def dataset_to_json(ds: Dataset) -> str:
    doc = {"dimension": ds.dimension,
           "samples": [{"x": [float(v) for v in p], "f": float(f)}
                       for p, f in zip(ds.points, ds.values)]}
    return json.dumps(doc, indent=2)


def write_dataset(ds: Dataset, path, fmt: str | None = None) -> None:
    fmt = fmt or detect_format(path)
    text = dataset_to_json(ds) if fmt == "json" else dataset_to_csv(ds)
    Path(path).write_text(text)


def parse_coefficients(spec: str) -> np.ndarray:
    """Coefficients from a file (JSON list or separated numbers) or an inline ``a,b,c`` list."""
    if os.path.exists(spec):
        text = Path(spec).read_text().strip()
        source = spec
    else:
        text = spec.strip()
        source = "--coeffs"
    if text.startswith("["):
        try:
            vals = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{source}: invalid JSON list ({exc.msg})") from exc
    else:
        vals = [t for t in text.replace(",", " ").split() if t]
    try:
        out = np.array([float(v) for v in vals])
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"{source}: coefficients must be numbers") from exc
    if out.size == 0:
        raise DataFormatError(f"{source}: no coefficients given")
    return out
