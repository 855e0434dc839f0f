"""Batch classification kernels.

Every kernel exists twice: a numba ``@njit`` version and a vectorised numpy
version with identical semantics. The numba path is used when numba imports
and the environment variable ``THERMOCONE_NO_NUMBA`` is unset (or ``0``).
"""

from __future__ import annotations

import os

import numpy as np

# relation codes shared by every batch routine
FUTURE, PAST, INCOMPARABLE, EQUIVALENT = 0, 1, 2, 3

CURVE_TOL = 1e-12


def _numba_requested() -> bool:
    return os.environ.get("THERMOCONE_NO_NUMBA", "0").lower() in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by THERMOCONE_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def ratios(p: np.ndarray, gibbs: np.ndarray) -> np.ndarray:
    """p_i / gamma_i with the zero-width convention used for beta = inf.

    Levels with gamma_i = 0 get +inf (positive mass), -inf (negative mass)
    or 0 (no mass).
    """
    p = np.asarray(p, dtype=float)
    out = np.empty(np.broadcast_shapes(p.shape, gibbs.shape))
    pos = gibbs > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out[...] = np.where(pos, p / np.where(pos, gibbs, 1.0), np.sign(p) * np.inf)
    out[np.isnan(out)] = 0.0
    return out


# --------------------------------------------------------------------------
# numpy reference path


def _eval_curves_np(X, Y, x):
    """Evaluate piecewise-linear curves row-wise at points ``x``.

    X, Y have shape (n, m+1); x has shape (n, k). At an x shared by several
    elbows (vertical piece) the upper value is returned.
    """
    m = X.shape[1] - 1
    idx = (X[:, None, :] <= x[:, :, None]).sum(axis=-1) - 1
    idx = np.clip(idx, 0, m)
    at_end = idx >= m
    lo = np.minimum(idx, m - 1)
    x0 = np.take_along_axis(X, lo, axis=1)
    x1 = np.take_along_axis(X, lo + 1, axis=1)
    y0 = np.take_along_axis(Y, lo, axis=1)
    y1 = np.take_along_axis(Y, lo + 1, axis=1)
    width = x1 - x0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(width > 0, (x - x0) / np.where(width > 0, width, 1.0), 1.0)
    val = y0 + t * (y1 - y0)
    return np.where(at_end, Y[:, m : m + 1], val)


def _curves_np(qs, gibbs):
    r = ratios(qs, gibbs[None, :])
    order = np.argsort(-r, axis=1, kind="stable")
    qsorted = np.take_along_axis(qs, order, axis=1)
    gsorted = gibbs[order]
    n = qs.shape[0]
    zeros = np.zeros((n, 1))
    X = np.hstack([zeros, np.cumsum(gsorted, axis=1)])
    Y = np.hstack([zeros, np.cumsum(qsorted, axis=1)])
    return X, Y


def _classify_np(qs, gibbs, px, py, tol):
    n = qs.shape[0]
    qx, qy = _curves_np(qs, gibbs)
    PX = np.broadcast_to(px, (n, px.size))
    PY = np.broadcast_to(py, (n, py.size))
    # compare at union of elbow abscissae
    pts = np.hstack([PX, qx])
    fp = _eval_curves_np(PX, PY, pts)
    fq = _eval_curves_np(qx, qy, pts)
    diff = fp - fq
    p_ge = np.all(diff >= -tol, axis=1)
    q_ge = np.all(diff <= tol, axis=1)
    return _codes(p_ge, q_ge)


def _classify_uniform_np(qs, pcum, tol):
    # equal Gibbs weights: both curves share elbows k/d, so compare sorted cumsums
    qcum = np.cumsum(-np.sort(-qs, axis=1), axis=1)
    diff = pcum[None, :] - qcum
    return _codes(np.all(diff >= -tol, axis=1), np.all(diff <= tol, axis=1))


def _codes(p_ge, q_ge):
    out = np.full(p_ge.shape, INCOMPARABLE, dtype=np.int8)
    out[p_ge & ~q_ge] = FUTURE
    out[q_ge & ~p_ge] = PAST
    out[p_ge & q_ge] = EQUIVALENT
    return out


# --------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _eval_nb(X, Y, x):
        m = X.shape[0] - 1
        k = 0
        for j in range(m + 1):
            if X[j] <= x:
                k = j
        if k >= m:
            return Y[m]
        w = X[k + 1] - X[k]
        if w <= 0.0:
            return Y[k + 1]
        return Y[k] + (x - X[k]) / w * (Y[k + 1] - Y[k])

    @njit(cache=True, nogil=True)
    def _classify_nb(qs, gibbs, px, py, tol):
        n, d = qs.shape
        out = np.empty(n, dtype=np.int8)
        r = np.empty(d)
        order = np.empty(d, dtype=np.int64)
        qx = np.empty(d + 1)
        qy = np.empty(d + 1)
        for s in range(n):
            for i in range(d):
                g = gibbs[i]
                v = qs[s, i]
                if g > 0.0:
                    r[i] = v / g
                elif v > 0.0:
                    r[i] = np.inf
                elif v < 0.0:
                    r[i] = -np.inf
                else:
                    r[i] = 0.0
                order[i] = i
            # stable insertion sort, descending ratio
            for i in range(1, d):
                j = i
                while j > 0 and r[order[j - 1]] < r[order[j]]:
                    tmp = order[j - 1]
                    order[j - 1] = order[j]
                    order[j] = tmp
                    j -= 1
            qx[0] = 0.0
            qy[0] = 0.0
            for i in range(d):
                qx[i + 1] = qx[i] + gibbs[order[i]]
                qy[i + 1] = qy[i] + qs[s, order[i]]
            p_ge = True
            q_ge = True
            for k in range(2 * (d + 1)):
                if k <= d:
                    x = px[k]
                else:
                    x = qx[k - d - 1]
                diff = _eval_nb(px, py, x) - _eval_nb(qx, qy, x)
                if diff < -tol:
                    p_ge = False
                if diff > tol:
                    q_ge = False
            if p_ge and q_ge:
                out[s] = 3
            elif p_ge:
                out[s] = 0
            elif q_ge:
                out[s] = 1
            else:
                out[s] = 2
        return out


    @njit(cache=True, nogil=True)
    def _classify_uniform_nb(qs, pcum, tol):
        n, d = qs.shape
        out = np.empty(n, dtype=np.int8)
        v = np.empty(d)
        for s in range(n):
            for i in range(d):
                v[i] = qs[s, i]
            for i in range(1, d):
                j = i
                while j > 0 and v[j - 1] < v[j]:
                    t = v[j - 1]
                    v[j - 1] = v[j]
                    v[j] = t
                    j -= 1
            p_ge = True
            q_ge = True
            c = 0.0
            for i in range(d):
                c += v[i]
                diff = pcum[i] - c
                if diff < -tol:
                    p_ge = False
                if diff > tol:
                    q_ge = False
            if p_ge and q_ge:
                out[s] = 3
            elif p_ge:
                out[s] = 0
            elif q_ge:
                out[s] = 1
            else:
                out[s] = 2
        return out


def classify_batch(qs, gibbs, px, py, tol: float = CURVE_TOL, backend: str | None = None):
    """Relation of every row of ``qs`` to the state whose curve is (px, py).

    Returns int8 codes FUTURE / PAST / INCOMPARABLE / EQUIVALENT, where
    FUTURE means the source thermomajorises the row.
    """
    qs = np.ascontiguousarray(qs, dtype=float)
    gibbs = np.ascontiguousarray(gibbs, dtype=float)
    px = np.ascontiguousarray(px, dtype=float)
    py = np.ascontiguousarray(py, dtype=float)
    if backend is None:
        backend = "numba" if HAVE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but unavailable")
    uniform = gibbs.size > 0 and np.all(gibbs == gibbs[0])
    if uniform:
        pcum = np.ascontiguousarray(py[1:])
        if backend == "numba":
            return _classify_uniform_nb(qs, pcum, tol)
    elif backend == "numba":
        return _classify_nb(qs, gibbs, px, py, tol)
    out = np.empty(qs.shape[0], dtype=np.int8)
    step = 65536
    for a in range(0, qs.shape[0], step):
        chunk = qs[a : a + step]
        out[a : a + step] = _classify_uniform_np(chunk, pcum, tol) if uniform else _classify_np(chunk, gibbs, px, py, tol)
    return out
