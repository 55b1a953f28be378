"""Row reduction kernels over F_p on dense int64 arrays.

Two interchangeable implementations of the same reduced row echelon form:
a numba ``@njit`` loop and a vectorised numpy fallback.  Setting
``LEVELLAB_DISABLE_JIT=1`` (or running without numba installed) selects
the numpy path.  Both return identical arrays; RREF is unique, so the
backend never changes a result.
"""

from __future__ import annotations

import os

import numpy as np

# p * p must fit in int64 with headroom for one addition.
MAX_DENSE_PRIME = 2**31 - 1

_DISABLED = os.environ.get("LEVELLAB_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("jit disabled by LEVELLAB_DISABLE_JIT")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def rref_mod_p_numpy(a: np.ndarray, p: int):
    a = np.array(a, dtype=np.int64) % p
    nrows, ncols = a.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r, c:] = (a[r, c:] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit, c:] = (a[hit, c:] + (p - col[hit])[:, None] * a[r, c:][None, :]) % p
        pivots.append(c)
        r += 1
    return a, np.array(pivots, dtype=np.int64)


if HAVE_NUMBA:

    @njit(cache=True)
    def _inv_mod(x, p):
        t, new_t = 0, 1
        r, new_r = p, x % p
        while new_r != 0:
            q = r // new_r
            t, new_t = new_t, t - q * new_t
            r, new_r = new_r, r - q * new_r
        if t < 0:
            t += p
        return t

    @njit(cache=True)
    def _rref_mod_p_jit(a, p):
        nrows, ncols = a.shape
        pivots = np.empty(min(nrows, ncols), dtype=np.int64)
        r = 0
        for c in range(ncols):
            if r == nrows:
                break
            piv = -1
            for i in range(r, nrows):
                if a[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(c, ncols):
                    tmp = a[r, j]
                    a[r, j] = a[piv, j]
                    a[piv, j] = tmp
            inv = _inv_mod(a[r, c], p)
            for j in range(c, ncols):
                a[r, j] = (a[r, j] * inv) % p
            for i in range(nrows):
                f = a[i, c]
                if i != r and f != 0:
                    g = p - f
                    for j in range(c, ncols):
                        a[i, j] = (a[i, j] + g * a[r, j]) % p
            pivots[r] = c
            r += 1
        return a, pivots[:r]

    def rref_mod_p_jit(a: np.ndarray, p: int):
        a = np.ascontiguousarray(np.asarray(a, dtype=np.int64) % p)
        return _rref_mod_p_jit(a, np.int64(p))

else:  # pragma: no cover - exercised only without numba
    rref_mod_p_jit = None


BACKEND = "numba" if HAVE_NUMBA else "numpy"


def rref_mod_p(a: np.ndarray, p: int):
    """Reduced row echelon form of ``a`` over F_p; returns ``(R, pivot_cols)``."""
    if a.size == 0:
        return np.array(a, dtype=np.int64).reshape(a.shape), np.zeros(0, dtype=np.int64)
    if HAVE_NUMBA:
        return rref_mod_p_jit(a, p)
    return rref_mod_p_numpy(a, p)
