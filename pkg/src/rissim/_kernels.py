"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports and ``RISSIM_DISABLE_NUMBA`` is
unset (or set to ``0``). Both implementations are always importable under
explicit names so tests and benchmarks can compare them.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

_FLAG = os.environ.get("RISSIM_DISABLE_NUMBA", "0").strip().lower()
USE_NUMBA = HAS_NUMBA and _FLAG in ("", "0", "false", "no")


# ---------------------------------------------------------------------------
# ray_sum: sum of rank-one ray contributions between two planar arrays
#
#   out[l, a, b] = sum_r coef[l, r] * arx[l, r, a] * atx[l, r, b]
#
# with separable UPA responses
#   arx[l, r, m * nv + n] = exp(j (m * rx_py[l, r] + n * rx_pz[l, r]))
# ---------------------------------------------------------------------------


def _upa_response(py, pz, shape):
    nh, nv = shape
    ay = np.exp(1j * py[..., None] * np.arange(nh))
    az = np.exp(1j * pz[..., None] * np.arange(nv))
    return (ay[..., :, None] * az[..., None, :]).reshape(*py.shape, nh * nv)


def ray_sum_numpy(coef, rx_py, rx_pz, tx_py, tx_pz, rx_shape, tx_shape):
    coef = np.asarray(coef, dtype=np.complex128)
    n_links = coef.shape[0]
    nr = rx_shape[0] * rx_shape[1]
    nh, nv = tx_shape
    out = np.empty((n_links, nr, nh * nv), dtype=np.complex128)
    if nr == 1:
        # single receive element: separable matmul over the transmit panel
        w = coef * _upa_response(rx_py, rx_pz, rx_shape)[..., 0]
        ay = np.exp(1j * tx_py[..., None] * np.arange(nh)) * w[..., None]
        az = np.exp(1j * tx_pz[..., None] * np.arange(nv))
        out[:, 0, :] = (ay.transpose(0, 2, 1) @ az).reshape(n_links, nh * nv)
        return out
    # bounded chunks keep the (L, R, N) temporaries small
    chunk = max(1, 2_000_000 // max(1, coef.shape[1] * (nr + nh * nv)))
    for s in range(0, n_links, chunk):
        e = min(n_links, s + chunk)
        arx = _upa_response(rx_py[s:e], rx_pz[s:e], rx_shape) * coef[s:e, :, None]
        atx = _upa_response(tx_py[s:e], tx_pz[s:e], tx_shape)
        out[s:e] = arx.transpose(0, 2, 1) @ atx
    return out


def exhaustive_best_numpy(direct, cascade, levels):
    direct = complex(direct)
    cascade = np.asarray(cascade, dtype=np.complex128)
    n = cascade.size
    rot = np.exp(2j * np.pi * np.arange(levels) / levels)
    best_val = -1.0
    best_idx = np.zeros(n, dtype=np.int64)
    # enumerate the last few elements as a dense block, loop over the rest
    tail = min(n, max(1, int(np.floor(np.log(2**16) / np.log(max(levels, 2))))))
    head = n - tail
    tail_grid = np.array(list(itertools.product(range(levels), repeat=tail)), dtype=np.int64)
    tail_sums = rot[tail_grid] @ cascade[head:]
    for head_idx in itertools.product(range(levels), repeat=head):
        base = direct + (rot[list(head_idx)] @ cascade[:head] if head else 0.0)
        vals = np.abs(base + tail_sums)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_idx[:head] = head_idx
            best_idx[head:] = tail_grid[k]
    return best_val, best_idx


if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _fill_response(dst, c, py, pz, nh, nv):
        # separable UPA response by phase recurrence: one complex exp per axis
        sy = np.exp(1j * py)
        sz = np.exp(1j * pz)
        ay = c
        for m in range(nh):
            az = ay
            for n in range(nv):
                dst[m * nv + n] = az
                az *= sz
            ay *= sy

    @njit(cache=True, nogil=True)
    def ray_sum_numba(coef, rx_py, rx_pz, tx_py, tx_pz, rx_shape, tx_shape):
        n_links, n_rays = coef.shape
        rh, rv = rx_shape
        th, tv = tx_shape
        nr = rh * rv
        nt = th * tv
        out = np.zeros((n_links, nr, nt), dtype=np.complex128)
        arx = np.empty(nr, dtype=np.complex128)
        atx = np.empty(nt, dtype=np.complex128)
        for l in range(n_links):
            for r in range(n_rays):
                if coef[l, r] == 0:
                    continue
                _fill_response(arx, coef[l, r], rx_py[l, r], rx_pz[l, r], rh, rv)
                _fill_response(atx, 1.0 + 0j, tx_py[l, r], tx_pz[l, r], th, tv)
                for a in range(nr):
                    ca = arx[a]
                    for b in range(nt):
                        out[l, a, b] += ca * atx[b]
        return out

    @njit(cache=True, nogil=True)
    def exhaustive_best_numba(direct, cascade, levels):
        n = cascade.size
        rot = np.empty(levels, dtype=np.complex128)
        for d in range(levels):
            rot[d] = np.exp(2j * np.pi * d / levels)
        idx = np.zeros(n, dtype=np.int64)
        best_idx = np.zeros(n, dtype=np.int64)
        best_val = -1.0
        total = levels**n
        for _ in range(total):
            acc = direct
            for k in range(n):
                acc += rot[idx[k]] * cascade[k]
            val = abs(acc)
            if val > best_val:
                best_val = val
                best_idx[:] = idx
            # mixed-radix increment, last element fastest (matches itertools.product)
            k = n - 1
            while k >= 0:
                idx[k] += 1
                if idx[k] < levels:
                    break
                idx[k] = 0
                k -= 1
        return best_val, best_idx

else:  # pragma: no cover
    ray_sum_numba = None
    exhaustive_best_numba = None


def ray_sum(coef, rx_py, rx_pz, tx_py, tx_pz, rx_shape, tx_shape):
    """Sum rank-one ray contributions into ``(L, N_rx, N_tx)`` channel matrices."""
    args = (
        np.ascontiguousarray(coef, dtype=np.complex128),
        np.ascontiguousarray(rx_py, dtype=np.float64),
        np.ascontiguousarray(rx_pz, dtype=np.float64),
        np.ascontiguousarray(tx_py, dtype=np.float64),
        np.ascontiguousarray(tx_pz, dtype=np.float64),
        (int(rx_shape[0]), int(rx_shape[1])),
        (int(tx_shape[0]), int(tx_shape[1])),
    )
    if USE_NUMBA:
        return ray_sum_numba(*args)
    return ray_sum_numpy(*args)


def exhaustive_best(direct, cascade, levels):
    """Exhaustive max of ``|direct + sum_n exp(j 2 pi d_n / D) cascade_n|``.

    Returns the maximum magnitude and the level indices attaining it (first
    maximiser in lexicographic order).
    """
    cascade = np.ascontiguousarray(cascade, dtype=np.complex128)
    if USE_NUMBA:
        return exhaustive_best_numba(complex(direct), cascade, int(levels))
    return exhaustive_best_numpy(direct, cascade, int(levels))
