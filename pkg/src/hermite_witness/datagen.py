"""Toy data, query sets, CSV ingestion and result files."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ArgumentError, DataError, ResourceError
from .rng import NOISE, QUERIES, T_DRAWS, Stream
from .significance import SignificanceResult
from .witness import QuerySet

MAX_GRID_DIM = 4


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


@dataclass(frozen=True)
class ToySpec:
    """Unit circle (class 0) against an ellipse with axes ``1 +- rho_ellipse`` (class 1)."""

    rho_ellipse: float = 0.0
    samples_per_class: int = 1000
    noise_std: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.samples_per_class < 1:
            raise ArgumentError(f"samples per class must be >= 1, got {self.samples_per_class}")
        if not self.noise_std >= 0:
            raise ArgumentError(f"noise std must be >= 0, got {self.noise_std}")
        if not self.rho_ellipse >= 0:
            raise ArgumentError(f"ellipse perturbation must be >= 0, got {self.rho_ellipse}")


def gen_circle_ellipse(spec: ToySpec) -> tuple[np.ndarray, np.ndarray]:
    n = spec.samples_per_class
    axes = [(1.0, 1.0), (1.0 + spec.rho_ellipse, 1.0 - spec.rho_ellipse)]
    out = []
    for cls, (a, b) in enumerate(axes):
        t = 2.0 * math.pi * Stream(spec.seed, T_DRAWS, cls).uniform(n)
        eps = spec.noise_std * Stream(spec.seed, NOISE, cls).normal(2 * n).reshape(n, 2)
        out.append(np.column_stack([a * np.cos(t), b * np.sin(t)]) + eps)
    return out[0], out[1]


def ring_queries(
    count: int,
    inner_radius: float = 0.5,
    outer_radius: float = 1.8,
    seed: int = 0,
    *,
    scale: float = 1.0,
    rho: float | None = None,
) -> QuerySet:
    """Area-uniform points in an annulus, divided by ``scale``."""
    if not 0 < inner_radius < outer_radius:
        raise ArgumentError("ring radii must satisfy 0 < inner < outer")
    if count < 1:
        raise ArgumentError("query count must be >= 1")
    if count == 1 and rho is None:
        raise ArgumentError("a single query point has no separation; supply rho explicitly")
    u = Stream(seed, QUERIES, 0).uniform(2 * count)
    r = np.sqrt(u[0::2] * (outer_radius**2 - inner_radius**2) + inner_radius**2)
    phi = 2.0 * math.pi * u[1::2]
    points = np.column_stack([r * np.cos(phi), r * np.sin(phi)]) / scale
    return QuerySet.from_points(points, rho)


def grid_queries(bounds, resolution, *, scale: float = 1.0) -> QuerySet:
    """Tensor grid over per-axis ``(lo, hi)`` bounds, first axis varying slowest."""
    bounds = [tuple(map(float, b)) for b in bounds]
    q = len(bounds)
    if q > MAX_GRID_DIM:
        raise ResourceError(f"grid queries limited to q <= {MAX_GRID_DIM}; use ring or file queries")
    if q == 0:
        raise ArgumentError("grid needs at least one axis")
    res = [int(resolution)] * q if np.isscalar(resolution) else [int(r) for r in resolution]
    if len(res) != q:
        raise ArgumentError("one resolution per axis")
    for (lo, hi), k in zip(bounds, res):
        if not lo < hi:
            raise ArgumentError(f"grid bounds need lo < hi, got ({lo}, {hi})")
        if k < 2:
            raise ArgumentError("grid resolution must be >= 2")
    axes = [np.linspace(lo, hi, k) for (lo, hi), k in zip(bounds, res)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh]) / scale
    spacing = min((hi - lo) / (k - 1) for (lo, hi), k in zip(bounds, res)) / scale
    return QuerySet.from_points(points, spacing)


@dataclass
class CsvData:
    raw: np.ndarray
    labels: np.ndarray | None
    columns: list[str]
    label_names: list[str] = field(default_factory=list)
    zscore: dict | None = None

    @property
    def class_count(self) -> int:
        return len(self.label_names)

    def metadata(self) -> dict:
        meta = {"columns": self.columns, "label_mapping": {name: i for i, name in enumerate(self.label_names)}}
        if self.zscore is not None:
            meta["zscore"] = self.zscore
        return meta


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 ({exc})") from exc
    except csv.Error as exc:
        raise DataError(f"{path}: CSV parse error ({exc})") from exc
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path}: empty file, a header row is required")
    return [h.strip() for h in rows[0]], rows[1:]


def _parse_matrix(path, header, rows, keep) -> np.ndarray:
    out = np.empty((len(rows), len(keep)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i + 2} has {len(row)} fields, header has {len(header)}")
        for j, c in enumerate(keep):
            try:
                out[i, j] = float(row[c])
            except ValueError:
                raise DataError(f"{path}: row {i + 2}, column {header[c]!r}: non-numeric value {row[c]!r}") from None
            if not math.isfinite(out[i, j]):
                raise DataError(f"{path}: row {i + 2}, column {header[c]!r}: non-finite value {row[c]!r}")
    return out


def zscore_columns(raw: np.ndarray, columns: list[str]) -> tuple[np.ndarray, dict]:
    """Centre each column and divide by its sample (n - 1) standard deviation."""
    mean = raw.mean(axis=0)
    centered = raw - mean
    std = centered.std(axis=0, ddof=1) if raw.shape[0] > 1 else np.zeros(raw.shape[1])
    out = centered.copy()
    for j, s in enumerate(std):
        if s > 0:
            out[:, j] = centered[:, j] / s
        else:
            warnings.warn(f"column {columns[j]!r} has zero variance; left centred only", stacklevel=3)
    return out, {"mean": mean.tolist(), "std": std.tolist(), "ddof": 1}


def load_csv(path, label_column: str | None, zscore: bool = False) -> CsvData:
    """Read a labelled numeric CSV.

    Labels are mapped to ``0..C-1`` in order of first appearance.
    ``label_column=None`` reads an unlabelled point file.
    """
    header, rows = _read_rows(path)
    if label_column is None:
        keep = list(range(len(header)))
        label_idx = None
    else:
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found (columns: {', '.join(header)})")
        label_idx = header.index(label_column)
        keep = [i for i in range(len(header)) if i != label_idx]
    raw = _parse_matrix(path, header, rows, keep)
    columns = [header[i] for i in keep]
    labels = None
    names: list[str] = []
    if label_idx is not None:
        mapping: dict[str, int] = {}
        labels = np.empty(len(rows), dtype=np.int64)
        for i, row in enumerate(rows):
            key = row[label_idx].strip()
            labels[i] = mapping.setdefault(key, len(mapping))
        names = list(mapping)
        if len(names) < 2:
            raise DataError(f"{path}: label column {label_column!r} needs >= 2 distinct labels, found {len(names)}")
    stats = None
    if zscore:
        raw, stats = zscore_columns(raw, columns)
    return CsvData(raw, labels, columns, names, stats)


def write_dataset_csv(path, points, labels, columns=None, label_column: str = "label") -> None:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    columns = columns or [f"x{i + 1}" for i in range(points.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*columns, label_column])
        for row, lab in zip(points, labels):
            w.writerow([*(fmt_float(v) for v in row), lab])


def result_columns(q: int, class_count: int | None) -> list[str]:
    cols = [f"z{i + 1}" for i in range(q)] + ["Fhat"]
    if class_count:
        cols += [f"F{i}" for i in range(class_count)]
    cols += ["T", "D"]
    if class_count:
        cols.append("L")
    return cols


def _records(result: SignificanceResult, coords: np.ndarray):
    per_class = result.field.per_class
    for j in range(coords.shape[0]):
        rec = [float(v) for v in coords[j]] + [float(result.fhat[j])]
        if per_class is not None:
            rec += [float(v) for v in per_class[j]]
        rec += [float(result.T[j]), int(result.D[j])]
        if per_class is not None:
            rec.append(int(result.field.predicted[j]))
        yield rec


def write_results(result: SignificanceResult, path, fmt: str | None = None, coords=None, metadata=None) -> None:
    """Write per-query results as CSV or JSON.

    ``coords`` defaults to the query points mapped back to data units
    (multiplied by the scale). Floats carry 17 significant digits, so they
    read back bit-exactly.
    """
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    if fmt not in ("csv", "json"):
        raise ArgumentError(f"unknown result format {fmt!r}")
    if coords is None:
        coords = result.points * result.metadata.get("sigma", 1.0)
    coords = np.asarray(coords, dtype=float).reshape(len(result.fhat), result.cfg.q)
    C = None if result.field.per_class is None else result.field.per_class.shape[1]
    cols = result_columns(result.cfg.q, C)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for rec in _records(result, coords):
                w.writerow([v if isinstance(v, int) else fmt_float(v) for v in rec])
        return
    meta = dict(result.metadata)
    meta.update(metadata or {})
    meta.setdefault("version", __version__)
    doc = {
        "columns": cols,
        "records": [dict(zip(cols, rec)) for rec in _records(result, coords)],
        "metadata": meta,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=False)
        fh.write("\n")


def read_results(path) -> dict[str, np.ndarray]:
    """Read a result file back into columns (ints for D and L)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        cols = doc["columns"]
        data = {c: [r[c] for r in doc["records"]] for c in cols}
    else:
        header, rows = _read_rows(path)
        cols = header
        data = {c: [r[i] for r in rows] for i, c in enumerate(cols)}
    out = {}
    for c in cols:
        if c in ("D", "L"):
            out[c] = np.array([int(v) for v in data[c]], dtype=np.int64)
        else:
            out[c] = np.array([float(v) for v in data[c]], dtype=float)
    return out
