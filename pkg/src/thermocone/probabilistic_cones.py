"""Probabilistic LOCC cones built on Vidal's conversion probability.

Orientation follows entanglement: ``p`` precedes ``q`` (p -> q is possible
by LOCC with certainty) iff p is majorised by q.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .lattice import _flatten
from .simplex_core import CURVE_TOL, ValidationError, check_prob


class ProbRelation(enum.IntEnum):
    FUTURE = 0
    PAST = 1
    INCOMPARABLE = 2
    INTERCONVERTIBLE = 3


@dataclass(frozen=True)
class ProbConeQuery:
    source: np.ndarray
    prob: float

    def __post_init__(self):
        object.__setattr__(self, "source", np.sort(check_prob(self.source))[::-1])
        if not 0.0 < self.prob <= 1.0:
            raise ValidationError("transformation probability must lie in (0, 1]")


def _tails(v: np.ndarray) -> np.ndarray:
    """E_k = sum_{i >= k} v_i for k = 1..d (sorted input)."""
    return np.cumsum(v[..., ::-1], axis=-1)[..., ::-1]


def vidal_probability(p, q) -> float:
    """Maximal probability of converting Schmidt vector p into q by LOCC."""
    p = np.sort(check_prob(p))[::-1]
    q = np.sort(check_prob(q, dim=p.size))[::-1]
    return float(vidal_probability_many(p, q[None, :])[0])


def vidal_probability_many(p, qs, reverse: bool = False) -> np.ndarray:
    """Vectorised over rows of ``qs``; ``reverse`` gives P(q -> p) instead."""
    p = np.sort(np.asarray(p, dtype=float))[::-1]
    qs = -np.sort(-np.atleast_2d(np.asarray(qs, dtype=float)), axis=1)
    num = np.broadcast_to(_tails(p), qs.shape)
    den = _tails(qs)
    if reverse:
        num, den = den, num
    num = np.clip(num, 0.0, None)
    den = np.clip(den, 0.0, None)
    # both tails empty: skip; empty denominator only: ratio is +inf
    eps = 1e-15
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > eps, num / np.where(den > eps, den, 1.0), np.inf)
    r[(den <= eps) & (num <= eps)] = np.inf
    return np.minimum(1.0, r.min(axis=1))


def tilde_distribution(p, P: float) -> np.ndarray:
    """Least-majorised state that reaches p with probability at least P."""
    if not 0.0 < P <= 1.0:
        raise ValidationError("P must lie in (0, 1]")
    p = np.sort(check_prob(p))[::-1]
    out = P * p
    out[0] += 1.0 - P
    return out


def critical_probabilities(p) -> np.ndarray:
    """P_n = (n-1) p_n - sum_{i<n} p_i + 1 for n = 1..d (P_1 = 1)."""
    p = np.sort(check_prob(p))[::-1]
    n = np.arange(1, p.size + 1)
    head = np.concatenate([[0.0], np.cumsum(p)[:-1]])
    return (n - 1) * p - head + 1.0


def hat_distribution(p, P: float) -> np.ndarray:
    """Most-majorising-bounded state reachable from p with probability at least P.

    The raw vector P^-1 p (with the remainder on the first entry) is
    flattened at the head until it is non-increasing.
    """
    if not 0.0 < P <= 1.0:
        raise ValidationError("P must lie in (0, 1]")
    p = np.sort(check_prob(p))[::-1]
    raw = p / P
    raw[0] += 1.0 - 1.0 / P
    out, _ = _flatten(raw, np.ones(p.size))
    return out


def _majorises_rows(a, bs, tol=CURVE_TOL):
    """a majorises each row of bs (rows sorted internally)."""
    a = np.sort(a)[::-1]
    bs = -np.sort(-np.atleast_2d(bs), axis=1)
    return np.all(np.cumsum(a) - np.cumsum(bs, axis=1) >= -tol, axis=1)


def _majorised_by_rows(a, bs, tol=CURVE_TOL):
    a = np.sort(a)[::-1]
    bs = -np.sort(-np.atleast_2d(bs), axis=1)
    return np.all(np.cumsum(bs, axis=1) - np.cumsum(a) >= -tol, axis=1)


def prob_classify_many(qs, query: ProbConeQuery) -> np.ndarray:
    qs = np.atleast_2d(np.asarray(qs, dtype=float))
    fut = _majorised_by_rows(hat_distribution(query.source, query.prob), qs)
    past = _majorises_rows(tilde_distribution(query.source, query.prob), qs)
    out = np.full(qs.shape[0], ProbRelation.INCOMPARABLE, dtype=np.int8)
    out[fut] = ProbRelation.FUTURE
    out[past] = ProbRelation.PAST
    out[fut & past] = ProbRelation.INTERCONVERTIBLE
    return out


def prob_classify(q, query: ProbConeQuery) -> ProbRelation:
    q = check_prob(q, dim=query.source.size)
    return ProbRelation(int(prob_classify_many(q[None, :], query)[0]))


def simplex_grid(d: int, resolution: int) -> np.ndarray:
    """All points of the simplex with coordinates k / resolution."""
    if d != 3:
        pts = [c for c in _compositions(resolution, d)]
        return np.array(pts, dtype=float) / resolution
    i, j = np.meshgrid(np.arange(resolution + 1), np.arange(resolution + 1), indexing="ij")
    keep = i + j <= resolution
    i, j = i[keep], j[keep]
    return np.stack([i, j, resolution - i - j], axis=1) / resolution


def _compositions(n, k):
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def critical_probability(p, grid: np.ndarray, tol: float = 1e-6) -> float:
    """Largest P at which the incomparable set on ``grid`` is empty (bisection).

    Returns 0.0 if even tiny P leaves incomparable grid points.
    """
    def empty(P):
        codes = prob_classify_many(grid, ProbConeQuery(p, P))
        return not np.any(codes == ProbRelation.INCOMPARABLE)

    lo_ok = 1e-9
    if not empty(lo_ok):
        return 0.0
    if empty(1.0):
        return 1.0
    lo, hi = lo_ok, 1.0  # empty at lo, non-empty at hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if empty(mid):
            lo = mid
        else:
            hi = mid
    return lo


__all__ = [
    "ProbConeQuery",
    "ProbRelation",
    "critical_probabilities",
    "critical_probability",
    "hat_distribution",
    "prob_classify",
    "prob_classify_many",
    "simplex_grid",
    "tilde_distribution",
    "vidal_probability",
    "vidal_probability_many",
]
