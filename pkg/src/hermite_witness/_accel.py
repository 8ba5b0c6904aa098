"""Compiled inner loops shared by the kernel, witness and permutation code.

Every reduction over data points runs sequentially in index order with
Neumaier compensation; parallelism is only over query points, each writing
its own output slot, so results do not depend on the thread count.
"""

import math
import os

# the pool size is fixed when numba is first imported; leave headroom so
# callers can ask for more threads than cores
os.environ.setdefault("NUMBA_NUM_THREADS", str(max(os.cpu_count() or 1, 8)))
# prefer omp: safe for concurrent callers, and the bundled tbb may be too old
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp tbb workqueue")

import numba as nb  # noqa: E402
import numpy as np  # noqa: E402

_PI_QUARTER = math.pi ** -0.25
_SQRT2 = math.sqrt(2.0)


def max_threads():
    return nb.config.NUMBA_NUM_THREADS


def set_threads(count):
    """Set the worker count for parallel loops, clamped to the pool size."""
    count = max(1, min(int(count), max_threads()))
    nb.set_num_threads(count)
    return count


def get_threads():
    return nb.get_num_threads()


def _default_threads():
    env = os.environ.get("HERMITE_WITNESS_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return os.cpu_count() or 1


set_threads(_default_threads())


@nb.njit(cache=True)
def psi_fill(x, out):
    """Hermite functions psi_0..psi_{len(out)-1} at x by forward recurrence."""
    n = out.shape[0]
    if n == 0:
        return
    g = _PI_QUARTER * math.exp(-0.5 * x * x)
    out[0] = g
    if n == 1:
        return
    out[1] = _SQRT2 * x * g
    for j in range(2, n):
        out[j] = math.sqrt(2.0 / j) * x * out[j - 1] - math.sqrt((j - 1.0) / j) * out[j - 2]


@nb.njit(cache=True)
def _y_is_axis(nz, ny, z, y):
    # the longer vector (lexicographically larger on ties) is the rotation axis,
    # so that Phi(z, y) and Phi(y, z) run the same arithmetic
    if ny != nz:
        return ny > nz
    for d in range(z.shape[0]):
        if y[d] != z[d]:
            return y[d] > z[d]
    return False


@nb.njit(cache=True)
def _hermite_pair_reduced(nz, psi_z, z, y, G, psi0, psi_a, psi_b, v):
    deg = G.shape[0]
    q = z.shape[0]
    ny2 = 0.0
    dot = 0.0
    for d in range(q):
        ny2 += y[d] * y[d]
        dot += z[d] * y[d]
    ny = math.sqrt(ny2)
    if nz == 0.0 or ny == 0.0:
        cos_t = 1.0
    else:
        cos_t = dot / (nz * ny)
        if cos_t > 1.0:
            cos_t = 1.0
        elif cos_t < -1.0:
            cos_t = -1.0
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    if _y_is_axis(nz, ny, z, y):
        psi_fill(ny, psi_a)
        other = nz
    else:
        psi_a[:] = psi_z
        other = ny
    psi_fill(other * cos_t, psi_b)
    psi_fill(other * sin_t, v)
    for ell in range(deg):
        v[ell] *= psi0[ell]
    total = 0.0
    for j in range(deg):
        a = psi_a[j] * psi_b[j]
        if a == 0.0:
            continue
        inner = 0.0
        for ell in range(0, deg - j, 2):
            inner += G[j + ell] * v[ell]
        total += a * inner
    return total


@nb.njit(cache=True, parallel=True)
def hermite_matrix_reduced(Z, Y, G, psi0, out):
    """out[i, l] = Phi_n(Z[i], Y[l]) for q >= 2 via the rotation reduction.

    G[s] folds the filter weights and the D-coefficients for total order s.
    """
    K = Z.shape[0]
    M = Y.shape[0]
    deg = G.shape[0]
    for i in nb.prange(K):
        z = Z[i]
        nz2 = 0.0
        for d in range(z.shape[0]):
            nz2 += z[d] * z[d]
        nz = math.sqrt(nz2)
        psi_z = np.empty(deg)
        psi_fill(nz, psi_z)
        psi_a = np.empty(deg)
        psi_b = np.empty(deg)
        v = np.empty(deg)
        for l in range(M):
            out[i, l] = _hermite_pair_reduced(nz, psi_z, z, Y[l], G, psi0, psi_a, psi_b, v)


@nb.njit(cache=True, parallel=True)
def hermite_matrix_1d(z, y, weights, out):
    """out[i, l] = sum_m weights[m] psi_m(z[i]) psi_m(y[l])."""
    K = z.shape[0]
    M = y.shape[0]
    deg = weights.shape[0]
    psi_y = np.empty((M, deg))
    for l in range(M):
        psi_fill(y[l], psi_y[l])
    for i in nb.prange(K):
        psi_z = np.empty(deg)
        psi_fill(z[i], psi_z)
        for l in range(M):
            s = 0.0
            for m in range(deg):
                # weight applied to the product keeps Phi(z, y) == Phi(y, z) bitwise
                s += weights[m] * (psi_z[m] * psi_y[l, m])
            out[i, l] = s


@nb.njit(cache=True, parallel=True)
def gaussian_matrix(Z, Y, out):
    K = Z.shape[0]
    M = Y.shape[0]
    q = Z.shape[1]
    for i in nb.prange(K):
        for l in range(M):
            s = 0.0
            for d in range(q):
                t = Z[i, d] - Y[l, d]
                s += t * t
            out[i, l] = math.exp(-s)


@nb.njit(cache=True, parallel=True)
def weighted_sums(Kmat, W, out):
    """out[r, i] = sum_l W[r, l] * Kmat[i, l], compensated, in index order."""
    K, M = Kmat.shape
    R = W.shape[0]
    for i in nb.prange(K):
        row = Kmat[i]
        for r in range(R):
            w = W[r]
            s = 0.0
            c = 0.0
            for l in range(M):
                x = w[l] * row[l]
                t = s + x
                if abs(s) >= abs(x):
                    c += (s - t) + x
                else:
                    c += (x - t) + s
                s = t
            out[r, i] = s + c


@nb.njit(cache=True, parallel=True)
def class_sums(Kmat, labels, C, out):
    """out[r, i, k] = sum over l with labels[r, l] == k of Kmat[i, l], compensated."""
    K, M = Kmat.shape
    R = labels.shape[0]
    for i in nb.prange(K):
        row = Kmat[i]
        s = np.empty(C)
        c = np.empty(C)
        for r in range(R):
            lab = labels[r]
            s[:] = 0.0
            c[:] = 0.0
            for l in range(M):
                k = lab[l]
                x = row[l]
                t = s[k] + x
                if abs(s[k]) >= abs(x):
                    c[k] += (s[k] - t) + x
                else:
                    c[k] += (x - t) + s[k]
                s[k] = t
            for k in range(C):
                out[r, i, k] = s[k] + c[k]


@nb.njit(cache=True)
def neumaier_sum(x):
    s = 0.0
    c = 0.0
    for v in x:
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


@nb.njit(cache=True)
def fisher_yates(values, swap_idx):
    """Shuffle values in place; swap_idx[i - 1] in [0, i] is the partner of slot i."""
    n = values.shape[0]
    for i in range(n - 1, 0, -1):
        j = swap_idx[i - 1]
        tmp = values[i]
        values[i] = values[j]
        values[j] = tmp
