"""Majorisation join, the subset-sum embedding and its projections.

The embedding lifts a d-level state to a vector of 2**d - 1 segment masses
laid on the sorted grid of all partial sums of the Gibbs distribution. On
that grid thermomajorisation becomes ordinary cumulative-sum dominance and
joins exist for every pair of states.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .simplex_core import (
    CURVE_TOL,
    BetaOrder,
    GibbsContext,
    ValidationError,
    check_prob,
    thermo_curve,
)

MAX_EMBED_DIM = 12
_TIE_TOL = 1e-13


@dataclass(frozen=True)
class EmbeddedVector:
    masses: np.ndarray
    widths: np.ndarray
    masks: tuple  # subset bitmask of every grid point, grid order
    dim_base: int

    @property
    def cumulative(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.masses)])

    @property
    def slopes(self) -> np.ndarray:
        """Mass per unit width; zero-width segments inherit the enclosing slope."""
        return _fill_slopes(self.masses, self.widths)


def _fill_slopes(masses, widths):
    s = np.full(masses.shape, np.nan)
    nz = widths > 0
    s[nz] = masses[nz] / widths[nz]
    # forward-fill from the left non-degenerate segment, then back-fill the head
    idx = np.where(nz, np.arange(s.size), 0)
    np.maximum.accumulate(idx, out=idx)
    s = s[idx]
    if np.isnan(s[0]):
        first = np.argmax(nz)
        s[: first + 1] = s[first]
    return s


@lru_cache(maxsize=64)
def _grid(gibbs_key: tuple) -> tuple[np.ndarray, tuple]:
    gibbs = np.array(gibbs_key)
    d = gibbs.size
    n = 1 << d
    masks = np.arange(n)
    bits = (masks[:, None] >> np.arange(d)) & 1
    sums = bits @ gibbs
    card = bits.sum(axis=1)
    # snap numerically equal sums together so ties are exact
    order = np.argsort(sums, kind="stable")
    snapped = sums.copy()
    for a, b in zip(order[:-1], order[1:]):
        if snapped[b] - snapped[a] <= _TIE_TOL:
            snapped[b] = snapped[a]
    snapped[0] = 0.0
    snapped[n - 1] = 1.0
    grid_order = np.lexsort((masks, card, snapped))
    return snapped[grid_order], tuple(int(m) for m in grid_order)


def gibbs_grid(ctx: GibbsContext) -> tuple[np.ndarray, tuple]:
    """Sorted partial sums of the Gibbs vector and the subset behind each.

    Equal sums are ordered by subset size, then by bitmask.
    """
    if ctx.dim > MAX_EMBED_DIM:
        raise ValidationError(f"embedding is limited to d <= {MAX_EMBED_DIM}")
    return _grid(tuple(float(g) for g in ctx.gibbs))


def embed(p, ctx: GibbsContext) -> EmbeddedVector:
    p = check_prob(p, dim=ctx.dim)
    points, masks = gibbs_grid(ctx)
    cum = thermo_curve(p, ctx)(points)
    cum[0], cum[-1] = 0.0, 1.0
    widths = np.diff(points)
    masses = np.diff(cum)
    masses[widths == 0] = 0.0
    return EmbeddedVector(masses, widths, masks, ctx.dim)


def _prefix_masks(order: BetaOrder) -> list[int]:
    out, m = [0], 0
    for level in order.perm:
        m |= 1 << level
        out.append(m)
    return out


def project(v: EmbeddedVector, order: BetaOrder, ctx: GibbsContext) -> np.ndarray:
    """Read a d-level vector off the embedded curve at the elbows of ``order``."""
    if order.dim != v.dim_base or ctx.dim != v.dim_base:
        raise ValidationError("dimension mismatch between embedded vector and order")
    where = {m: i for i, m in enumerate(v.masks)}
    cum = v.cumulative
    ks = [where[m] for m in _prefix_masks(order)]
    sorted_vals = np.diff(cum[ks])
    return order.unapply(sorted_vals)


def embedded_majorises(u: EmbeddedVector, v: EmbeddedVector, tol: float = CURVE_TOL) -> bool:
    _check_same_grid(u, v)
    return bool(np.all(u.cumulative - v.cumulative >= -tol))


def _check_same_grid(u, v):
    if u.masks != v.masks or not np.allclose(u.widths, v.widths, atol=1e-15):
        raise ValidationError("embedded vectors live on different grids")


def _flatten(masses: np.ndarray, widths: np.ndarray) -> tuple[np.ndarray, int]:
    """Pool adjacent slope increases until slopes are non-increasing.

    Each pass takes the first increase (N-1, N) and extends the pooled block
    leftwards while the preceding slope is below the block average.
    """
    nz = widths > 0
    r = masses[nz].astype(float).copy()
    w = widths[nz]
    its = 0
    while True:
        s = r / w
        bad = np.nonzero(s[1:] > s[:-1] + 1e-12 * np.maximum(1.0, np.abs(s[:-1])))[0]
        if bad.size == 0:
            break
        n_ = bad[0] + 1
        m_ = n_ - 1
        a = r[m_ : n_ + 1].sum() / w[m_ : n_ + 1].sum()
        while m_ > 0 and s[m_ - 1] < a:
            m_ -= 1
            a = r[m_ : n_ + 1].sum() / w[m_ : n_ + 1].sum()
        r[m_ : n_ + 1] = a * w[m_ : n_ + 1]
        its += 1
    out = np.zeros_like(masses, dtype=float)
    out[nz] = r
    return out, its


def join_uniform(p, q) -> np.ndarray:
    """Least upper bound under majorisation, returned sorted non-increasingly."""
    p = np.sort(check_prob(p))[::-1]
    q = np.sort(check_prob(q, dim=p.size))[::-1]
    cum = np.maximum(np.cumsum(p), np.cumsum(q))
    r0 = np.diff(np.concatenate([[0.0], cum]))
    r, _ = _flatten(r0, np.full(p.size, 1.0 / p.size))
    return r


def join_embedded(u: EmbeddedVector, v: EmbeddedVector, return_iterations: bool = False):
    """Least upper bound of two embedded vectors on a shared grid."""
    _check_same_grid(u, v)
    cum = np.maximum(u.cumulative, v.cumulative)
    r0 = np.diff(cum)
    r, its = _flatten(r0, u.widths)
    out = EmbeddedVector(r, u.widths, u.masks, u.dim_base)
    return (out, its) if return_iterations else out


def distinct_elbow_count(p, q, ctx: GibbsContext) -> int:
    """Number of distinct cumulative-Gibbs abscissae used by p's and q's curves."""
    xs = np.concatenate([thermo_curve(p, ctx).x[1:], thermo_curve(q, ctx).x[1:]])
    return int(np.unique(np.round(xs, 12)).size)
