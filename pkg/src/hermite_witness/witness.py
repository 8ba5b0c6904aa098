"""Empirical witness functions.

Two-class:  F(z) = (1/M) sum_l c_l K(z, y_l), with c = +1 for class 0 and -1
for class 1. Multi-class: one indicator-weighted mean per class, the
predicted label is the argmax and the statistic is the margin between the
top class and the runner-up.

Coordinates are always the scaled ones (raw / sigma).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _accel
from .errors import ArgumentError, DataError
from .hermite import KernelConfig, kernel_matrix

BLOCK_ELEMENTS = 4_000_000


@dataclass
class LabeledDataset:
    points: np.ndarray
    labels: np.ndarray
    class_count: int
    scale: float = 1.0
    label_names: tuple | None = None

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.points.ndim != 2 or self.labels.shape != (self.points.shape[0],):
            raise DataError("points must be M x q with one label per row")
        if not np.all(np.isfinite(self.points)):
            raise DataError("points contain non-finite values")
        if self.class_count < 2:
            raise ArgumentError(f"need at least 2 classes, got {self.class_count}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise DataError(f"labels must lie in 0..{self.class_count - 1}")
        if np.any(self.class_counts == 0):
            raise DataError(f"every class needs at least one sample, counts={self.class_counts.tolist()}")

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def q(self) -> int:
        return self.points.shape[1]

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)


def min_separation(points: np.ndarray) -> float:
    """Smallest pairwise Euclidean distance (exact, via nearest neighbours)."""
    dist, _ = cKDTree(points).query(points, k=2)
    return float(dist[:, 1].min())


@dataclass
class QuerySet:
    points: np.ndarray
    rho: float

    @classmethod
    def from_points(cls, points, rho: float | None = None, coalesce: bool = False) -> QuerySet:
        """Build a query set; ``rho`` defaults to the minimal separation.

        With ``coalesce`` duplicated points are ignored when computing the
        separation (the points themselves are kept).
        """
        points = np.ascontiguousarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if not np.all(np.isfinite(points)):
            raise DataError("query points contain non-finite values")
        if rho is None:
            distinct = points
            if coalesce:
                distinct = np.unique(points, axis=0)
                if distinct.shape[0] < points.shape[0]:
                    warnings.warn(
                        f"{points.shape[0] - distinct.shape[0]} duplicate query points "
                        "coalesced before computing the separation",
                        stacklevel=2,
                    )
            if distinct.shape[0] < 2:
                raise ArgumentError("minimal separation needs >= 2 distinct query points; pass rho explicitly")
            rho = min_separation(distinct)
        if not rho > 0:
            raise ArgumentError(f"query separation rho must be positive, got {rho}")
        return cls(points, float(rho))

    @property
    def K(self) -> int:
        return self.points.shape[0]


@dataclass
class WitnessField:
    """Witness values at the query points.

    ``values`` is the two-class witness, or the top-minus-runner-up margin in
    the multi-class case (where ``per_class`` and ``predicted`` are also set).
    """

    values: np.ndarray
    per_class: np.ndarray | None = None
    predicted: np.ndarray | None = None

    @property
    def margin(self) -> np.ndarray | None:
        return None if self.per_class is None else self.values


def scale_dataset(raw, sigma: float, labels, class_count: int | None = None, label_names=None) -> LabeledDataset:
    """Divide coordinates by ``sigma``, so that ``exp(-|x - y|**2 / sigma**2)``
    becomes ``exp(-|x~ - y~|**2)`` on the scaled points."""
    if not sigma > 0:
        raise ArgumentError(f"scale sigma must be positive, got {sigma}")
    raw = np.asarray(raw, dtype=float)
    if np.isnan(raw).any():
        raise DataError("raw data contains NaN")
    labels = np.asarray(labels, dtype=np.int64)
    if class_count is None:
        class_count = int(labels.max()) + 1 if labels.size else 0
    return LabeledDataset(raw / sigma, labels, class_count, float(sigma), label_names)


def _check_frame(data: LabeledDataset, queries: QuerySet, cfg: KernelConfig):
    if data.q != cfg.q or queries.points.shape[1] != cfg.q:
        raise ArgumentError(f"dimension mismatch: data q={data.q}, queries q={queries.points.shape[1]}, config q={cfg.q}")


def kernel_blocks(queries: QuerySet, data: LabeledDataset, cfg: KernelConfig):
    """Yield ``(rows, K_block)`` covering all query points in bounded memory."""
    step = max(1, BLOCK_ELEMENTS // max(1, data.M))
    for start in range(0, queries.K, step):
        rows = slice(start, min(start + step, queries.K))
        yield rows, kernel_matrix(queries.points[rows], data.points, cfg)


def two_class_signs(labels: np.ndarray) -> np.ndarray:
    """Class 0 -> +1, class 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(labels, dtype=np.float64)


def top_two(per_class: np.ndarray):
    """Argmax (first index on ties) and top-minus-runner-up margin along the last axis."""
    predicted = np.argmax(per_class, axis=-1)
    top = np.take_along_axis(per_class, predicted[..., None], axis=-1)[..., 0]
    rest = per_class.copy()
    np.put_along_axis(rest, predicted[..., None], -np.inf, axis=-1)
    return predicted, top - rest.max(axis=-1)


def witness_two_class(data: LabeledDataset, queries: QuerySet, cfg: KernelConfig) -> WitnessField:
    if data.class_count != 2:
        raise ArgumentError(f"two-class witness needs exactly 2 classes, got {data.class_count}")
    _check_frame(data, queries, cfg)
    W = two_class_signs(data.labels)[None, :]
    values = np.empty(queries.K)
    for rows, Kb in kernel_blocks(queries, data, cfg):
        out = np.empty((1, Kb.shape[0]))
        _accel.weighted_sums(Kb, W, out)
        values[rows] = out[0] / data.M
    return WitnessField(values)


def witness_multiclass(data: LabeledDataset, queries: QuerySet, cfg: KernelConfig) -> WitnessField:
    _check_frame(data, queries, cfg)
    C = data.class_count
    per_class = np.empty((queries.K, C))
    labels = data.labels[None, :]
    for rows, Kb in kernel_blocks(queries, data, cfg):
        out = np.empty((1, Kb.shape[0], C))
        _accel.class_sums(Kb, labels, C, out)
        per_class[rows] = out[0] / data.M
    predicted, margin = top_two(per_class)
    return WitnessField(margin, per_class, predicted)


def suggest_degree(M: int, q: int, gamma: float) -> int:
    """Advisory degree from the asymptotic rate ``n ~ (M / log M)**(1 / (2q + 2 gamma))``.

    Leading constant taken as 1 and the result clamped to at least 4.
    """
    if M < 3:
        raise ArgumentError(f"suggest_degree needs M >= 3, got {M}")
    if q < 1 or not gamma > 0:
        raise ArgumentError("need q >= 1 and gamma > 0")
    n = (M / math.log(M)) ** (1.0 / (2 * q + 2 * gamma))
    return max(4, math.floor(n * n + 0.5))
