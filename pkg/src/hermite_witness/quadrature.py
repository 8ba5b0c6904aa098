"""Independent checks for the kernel code.

Gauss-Hermite quadrature (Golub-Welsch), a brute-force multi-index kernel
sum, and the reproduction check for the filtered projection operator. None of
this shares a code path with the rotation-reduced kernel evaluation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ArgumentError, ResourceError
from .hermite import KernelConfig, filter_H, psi_table

ENUMERATION_BUDGET = 10_000_000


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integrals against ``exp(-x**2)``."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return self.nodes.size

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_hermite(order: int) -> QuadratureRule:
    """Gauss-Hermite rule of the given order.

    Nodes are the eigenvalues of the Jacobi matrix of the Hermite recurrence,
    polished by Newton steps on ``psi_order``. Weights come from the
    Christoffel function ``1 / sum_k h_k(x)**2`` rather than from eigenvector
    components, which lose relative accuracy in the tails.
    """
    if int(order) != order or not 1 <= order <= 256:
        raise ArgumentError(f"quadrature order must be in [1, 256], got {order}")
    order = int(order)
    off = np.sqrt(np.arange(1, order) / 2.0)
    x = eigh_tridiagonal(np.zeros(order), off, eigvals_only=True)
    for _ in range(2):
        psi = psi_table(x, order)
        # psi_N'(x) = sqrt(2N) psi_{N-1}(x) - x psi_N(x)
        deriv = math.sqrt(2.0 * order) * psi[order - 1] - x * psi[order]
        x = x - psi[order] / deriv
    x = 0.5 * (x - x[::-1])
    psi = psi_table(x, order - 1)
    w = np.exp(-x * x) / np.sum(psi * psi, axis=0)
    w = 0.5 * (w + w[::-1])
    return QuadratureRule(nodes=x, weights=w)


def psi_inner_product(j: int, k: int, rule: QuadratureRule) -> float:
    """Quadrature value of the integral of ``psi_j psi_k`` over the line."""
    if j < 0 or k < 0:
        raise ArgumentError("indices must be non-negative")
    if rule.order < (j + k) / 2 + 1:
        raise ArgumentError(f"rule of order {rule.order} is not exact for indices ({j}, {k})")
    psi = psi_table(rule.nodes, max(j, k))
    # h_j h_k = psi_j psi_k exp(x**2)
    return float(np.dot(rule.weights * np.exp(rule.nodes**2), psi[j] * psi[k]))


def count_multi_indices(q: int, deg: int) -> int:
    """Number of ``k`` in ``Z_+^q`` with ``|k|_1 < deg``."""
    return math.comb(deg - 1 + q, q)


def phi_bruteforce(x, y, cfg: KernelConfig) -> float:
    """Direct sum of ``H(sqrt(|k|_1)/n) psi_k(x) psi_k(y)`` over ``|k|_1 < deg``.

    Multi-indices are visited in lexicographic order and accumulated with
    compensated summation.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != (cfg.q,) or y.shape != (cfg.q,):
        raise ArgumentError(f"points must have dimension {cfg.q}")
    if count_multi_indices(cfg.q, cfg.deg) > ENUMERATION_BUDGET:
        raise ResourceError(f"q={cfg.q}, deg={cfg.deg} exceeds the enumeration budget")
    deg = cfg.deg
    px = psi_table(x, deg - 1)  # (deg, q)
    py = psi_table(y, deg - 1)
    prod = px * py
    h = [filter_H(math.sqrt(m) / cfg.n, cfg.filter) for m in range(deg)]
    terms = []
    for k in itertools.product(range(deg), repeat=cfg.q):
        m = sum(k)
        if m >= deg:
            continue
        t = h[m]
        for d, kd in enumerate(k):
            t *= prod[kd, d]
        terms.append(t)
    return math.fsum(terms)


def sigma_reproduction_check(k, x, cfg: KernelConfig) -> float:
    """Residual ``|sigma_n(psi_k)(x) - psi_k(x)|`` on the filter plateau.

    By orthonormality, applying the filtered projection operator to
    ``psi_k`` multiplies it by ``H(sqrt(|k|_1)/n)``; no integration needed.
    """
    k = tuple(int(v) for v in np.atleast_1d(k))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if len(k) != cfg.q or x.shape != (cfg.q,) or min(k) < 0:
        raise ArgumentError("multi-index and point must both have dimension q")
    m = sum(k)
    if 4 * m > cfg.deg:
        raise ArgumentError(f"|k|_1 = {m} is outside the plateau |k|_1 <= deg/4 = {cfg.deg / 4}")
    psi = psi_table(x, max(k))
    psi_k = float(np.prod([psi[kd, d] for d, kd in enumerate(k)]))
    reproduced = filter_H(math.sqrt(m) / cfg.n, cfg.filter) * psi_k
    return abs(reproduced - psi_k)
