"""Hermite functions and the localized Hermite kernel.

The kernel is

    Phi_n(x, y) = sum_m H(sqrt(m) / n) Proj_m(x, y),

where ``Proj_m`` sums ``psi_k(x) psi_k(y)`` over multi-indices with
``|k|_1 = m`` and ``H`` is a low-pass filter equal to 1 on ``[0, 1/2]`` and
0 on ``[1, inf)``. Because ``H`` vanishes from ``t = 1`` on, the sum over
``m`` stops at ``deg - 1`` with ``deg = n**2``; the truncation is exact.

For ``q >= 2`` each projection depends only on ``|x|``, ``|y|`` and the
angle between them, which reduces the multi-index sum to a double sum over
univariate Hermite functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import expit

from . import _accel
from .errors import ArgumentError, DomainError

PI_QUARTER = math.pi ** -0.25

FilterKind = Literal["mollifier", "polynomial"]
KernelKind = Literal["hermite", "gaussian"]


@dataclass(frozen=True)
class FilterSpec:
    """Low-pass filter: 1 up to ``lower``, 0 from ``upper`` on.

    ``mollifier`` is the C-infinity ratio of ``exp(-1/s)`` bumps;
    ``polynomial`` is the cubic smoothstep (C1 only).
    """

    kind: FilterKind = "mollifier"
    lower: float = 0.5
    upper: float = 1.0

    def __post_init__(self):
        if self.kind not in ("mollifier", "polynomial"):
            raise ArgumentError(f"unknown filter kind {self.kind!r}")
        if not 0.0 <= self.lower < self.upper:
            raise ArgumentError("filter knees must satisfy 0 <= lower < upper")


@dataclass(frozen=True)
class KernelConfig:
    q: int
    deg: int
    kind: KernelKind = "hermite"
    filter: FilterSpec = field(default_factory=FilterSpec)
    S: int | None = None

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise ArgumentError(f"dimension q must be a positive integer, got {self.q}")
        if int(self.deg) != self.deg or self.deg < 1:
            raise ArgumentError(f"deg must be a positive integer, got {self.deg}")
        if self.kind not in ("hermite", "gaussian"):
            raise ArgumentError(f"unknown kernel kind {self.kind!r}")
        if self.S is None:
            object.__setattr__(self, "S", self.q + 1)
        elif self.S <= self.q:
            raise ArgumentError("localization exponent S must exceed q")

    @property
    def n(self) -> float:
        return math.sqrt(self.deg)

    def as_dict(self) -> dict:
        return {
            "q": self.q,
            "deg": self.deg,
            "n": self.n,
            "kind": self.kind,
            "filter": {"kind": self.filter.kind, "lower": self.filter.lower, "upper": self.filter.upper},
        }


@dataclass(frozen=True)
class PointPairGeometry:
    """Norms of a point pair and the signed angle between them.

    ``sin_theta`` is always non-negative: the second point is rotated into
    the upper half of the plane spanned by the first two axes.
    """

    norm_x: float
    norm_y: float
    cos_theta: float
    sin_theta: float

    @classmethod
    def from_points(cls, x, y) -> PointPairGeometry:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        nx = float(np.linalg.norm(x))
        ny = float(np.linalg.norm(y))
        if nx == 0.0 or ny == 0.0:
            return cls(nx, ny, 1.0, 0.0)
        c = float(np.clip(np.dot(x, y) / (nx * ny), -1.0, 1.0))
        return cls(nx, ny, c, math.sqrt(max(0.0, 1.0 - c * c)))


@dataclass(frozen=True)
class MehlerParams:
    w: float
    truncation_order: int = 64

    def __post_init__(self):
        if not abs(self.w) <= 1.0 - 1e-6:
            raise ArgumentError(f"Mehler parameter must satisfy |w| < 1, got {self.w}")
        if self.truncation_order < 1:
            raise ArgumentError("truncation order must be >= 1")


def eval_psi_sequence(x: float, kmax: int) -> np.ndarray:
    """Return ``[psi_0(x), ..., psi_kmax(x)]`` from the three-term recurrence."""
    if int(kmax) != kmax or kmax < 0:
        raise ArgumentError(f"kmax must be a non-negative integer, got {kmax}")
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Hermite functions need a finite argument, got {x}")
    out = np.empty(int(kmax) + 1)
    _accel.psi_fill(x, out)
    return out


def psi_table(x, kmax: int) -> np.ndarray:
    """Vectorized recurrence: row ``j`` holds ``psi_j`` at every entry of ``x``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("Hermite functions need finite arguments")
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = PI_QUARTER * np.exp(-0.5 * x * x)
    if kmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for j in range(2, kmax + 1):
        out[j] = math.sqrt(2.0 / j) * x * out[j - 1] - math.sqrt((j - 1.0) / j) * out[j - 2]
    return out


def psi_zero_sequence(lmax: int) -> np.ndarray:
    """``psi_l(0)`` for ``l = 0..lmax`` via ``psi_{l+2}(0) = -sqrt((l+1)/(l+2)) psi_l(0)``."""
    out = np.zeros(lmax + 1)
    out[0] = PI_QUARTER
    for ell in range(2, lmax + 1, 2):
        out[ell] = -math.sqrt((ell - 1.0) / ell) * out[ell - 2]
    return out


def eval_psi_zero(l: int) -> float:
    if int(l) != l or l < 0:
        raise ArgumentError(f"index must be a non-negative integer, got {l}")
    if l % 2:
        return 0.0
    return float(psi_zero_sequence(int(l))[-1])


def filter_H(t: float, spec: FilterSpec = FilterSpec()) -> float:
    t = float(t)
    if not t >= 0.0:
        raise ArgumentError(f"filter argument must be >= 0, got {t}")
    a, b = spec.lower, spec.upper
    if t <= a:
        return 1.0
    if t >= b:
        return 0.0
    if spec.kind == "polynomial":
        s = (t - a) / (b - a)
        return 1.0 - s * s * (3.0 - 2.0 * s)
    # exp(-1/(b-t)) / (exp(-1/(b-t)) + exp(-1/(t-a))) in logistic form
    return float(expit(1.0 / (t - a) - 1.0 / (b - t)))


def filter_weights(cfg: KernelConfig) -> np.ndarray:
    """``H(sqrt(m) / n)`` for ``m = 0..deg-1``."""
    n = cfg.n
    return np.array([filter_H(math.sqrt(m) / n, cfg.filter) for m in range(cfg.deg)])


def d_coeff_sequence(q: int, rmax: int) -> np.ndarray:
    """``D_{q-2; r}`` for ``r = 0..rmax``.

    For even ``r = 2s`` this is ``pi**(1 - q/2) * (q/2 - 1)_s / s!`` (rising
    factorial); the product form covers ``q = 2`` without a special case.
    """
    if q < 2:
        raise ArgumentError("the D-coefficient reduction needs q >= 2")
    out = np.zeros(rmax + 1)
    a = q / 2.0 - 1.0
    val = math.pi ** (1.0 - q / 2.0)
    for r in range(0, rmax + 1, 2):
        out[r] = val
        s = r // 2
        val *= (a + s) / (s + 1)
    return out


def d_coeff(q: int, r: int) -> float:
    if q < 2:
        raise ArgumentError("the D-coefficient reduction needs q >= 2")
    if r < 0:
        raise ArgumentError(f"r must be >= 0, got {r}")
    return float(d_coeff_sequence(q, r)[r])


def proj_m_reduced(geom: PointPairGeometry, m: int, q: int) -> float:
    """``Proj_m(x, y)`` from the pair geometry, for ``q >= 2``."""
    if q < 2:
        raise ArgumentError("rotation reduction needs q >= 2; use the direct product for q = 1")
    if m < 0:
        raise ArgumentError("projection order must be >= 0")
    return float(_projections_from_geometry(geom, m, q)[m])


def _projections_from_geometry(geom: PointPairGeometry, mmax: int, q: int) -> np.ndarray:
    pa = eval_psi_sequence(geom.norm_x, mmax)
    pb = eval_psi_sequence(geom.norm_y * geom.cos_theta, mmax)
    pc = eval_psi_sequence(geom.norm_y * geom.sin_theta, mmax)
    u = pa * pb
    v = psi_zero_sequence(mmax) * pc
    D = d_coeff_sequence(q, mmax)
    out = np.empty(mmax + 1)
    for m in range(mmax + 1):
        s = 0.0
        for j in range(m + 1):
            if u[j] == 0.0:
                continue
            s += u[j] * np.dot(v[: m - j + 1], D[m - j :: -1])
        out[m] = s
    return out


def projections(x, y, mmax: int) -> np.ndarray:
    """``[Proj_0(x, y), ..., Proj_mmax(x, y)]`` for points of any dimension."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise ArgumentError("points must be 1-D and of equal dimension")
    if x.size == 1:
        return eval_psi_sequence(x[0], mmax) * eval_psi_sequence(y[0], mmax)
    return _projections_from_geometry(PointPairGeometry.from_points(x, y), mmax, x.size)


def reduced_weights(cfg: KernelConfig) -> np.ndarray:
    """Fold filter and D-coefficients: ``G[s] = sum_r H_{s+r} D_r`` over ``s + r < deg``.

    Then ``Phi_n = sum_{j, l} psi_j(|x|) psi_j(b) psi_l(0) psi_l(c) G[j + l]``.
    """
    h = filter_weights(cfg)
    D = d_coeff_sequence(cfg.q, cfg.deg - 1)
    return np.array([np.dot(h[s:], D[: cfg.deg - s]) for s in range(cfg.deg)])


def _as_points(X, q: int, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, q) if q > 1 else X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[1] != q:
        raise ArgumentError(f"{name} must have {q} columns, got shape {X.shape}")
    return np.ascontiguousarray(X)


def kernel_matrix(Z, Y, cfg: KernelConfig) -> np.ndarray:
    """Kernel values between every row of ``Z`` (K x q) and ``Y`` (M x q)."""
    Z = _as_points(Z, cfg.q, "query points")
    Y = _as_points(Y, cfg.q, "data points")
    out = np.empty((Z.shape[0], Y.shape[0]))
    if Z.shape[0] == 0 or Y.shape[0] == 0:
        return out
    if cfg.kind == "gaussian":
        _accel.gaussian_matrix(Z, Y, out)
    elif cfg.q == 1:
        _accel.hermite_matrix_1d(Z[:, 0].copy(), Y[:, 0].copy(), filter_weights(cfg), out)
    else:
        _accel.hermite_matrix_reduced(Z, Y, reduced_weights(cfg), psi_zero_sequence(cfg.deg), out)
    return out


def _pair(x, y, q: int | None):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.ndim != 1 or x.shape != y.shape or (q is not None and x.size != q):
        raise ArgumentError(f"dimension mismatch: {x.shape} vs {y.shape} (q={q})")
    return x, y


def kernel_phi_n(x, y, cfg: KernelConfig) -> float:
    """Localized Hermite kernel ``Phi_n(x, y)`` at a single pair."""
    x, y = _pair(x, y, cfg.q)
    if cfg.kind != "hermite":
        raise ArgumentError("kernel_phi_n evaluates the Hermite kernel; use kernel_gaussian")
    return float(kernel_matrix(x[None, :], y[None, :], cfg)[0, 0])


def kernel_gaussian(x, y) -> float:
    x, y = _pair(x, y, None)
    return math.exp(-float(np.sum((x - y) ** 2)))


def kernel_value(x, y, cfg: KernelConfig) -> float:
    if cfg.kind == "gaussian":
        return kernel_gaussian(*_pair(x, y, cfg.q))
    return kernel_phi_n(x, y, cfg)


def mehler_closed_form(x, y, params: MehlerParams | float, q: int | None = None) -> float:
    """Closed form of ``sum_m w**m Proj_m(x, y)``."""
    w = params.w if isinstance(params, MehlerParams) else float(params)
    if not abs(w) < 1.0:
        raise ArgumentError(f"Mehler identity needs |w| < 1, got {w}")
    x, y = _pair(x, y, q)
    q = x.size
    one_m = 1.0 - w * w
    expo = (4.0 * w * np.dot(x, y) - (1.0 + w * w) * (np.dot(x, x) + np.dot(y, y))) / (2.0 * one_m)
    return float((math.pi * one_m) ** (-q / 2.0) * math.exp(expo))
