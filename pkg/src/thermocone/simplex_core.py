"""Probability vectors, Gibbs contexts, beta-orderings and thermomajorisation."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

TOL_SUM = 1e-9
TOL_NEG = 1e-12
CURVE_TOL = _kernels.CURVE_TOL


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class Relation(enum.IntEnum):
    """Position of a target state relative to a source state."""

    FUTURE = _kernels.FUTURE
    PAST = _kernels.PAST
    INCOMPARABLE = _kernels.INCOMPARABLE
    EQUIVALENT = _kernels.EQUIVALENT


def check_prob(p, quasi: bool = False, dim: int | None = None) -> np.ndarray:
    """Return ``p`` as a float array after checking normalisation and sign.

    With ``quasi=True`` negative entries are allowed (quasi-probabilities).
    """
    arr = np.array(p, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValidationError("empty probability vector")
    if dim is not None and arr.size != dim:
        raise ValidationError(f"dimension mismatch: got {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("probability vector has non-finite entries")
    if abs(arr.sum() - 1.0) > TOL_SUM:
        raise ValidationError(f"entries sum to {arr.sum():.12g}, not 1")
    if not quasi and np.any(arr < -TOL_NEG):
        raise ValidationError("probability vector has negative entries")
    return arr


def uniform(d: int) -> np.ndarray:
    return np.full(d, 1.0 / d)


def sharp(d: int, level: int = 0) -> np.ndarray:
    s = np.zeros(d)
    s[level] = 1.0
    return s


@dataclass(frozen=True)
class GibbsContext:
    """Energy spectrum plus inverse temperature; ``beta`` may be ``math.inf``.

    At beta = inf the Gibbs vector is uniform over the ground-energy levels
    and ``partition`` is the ground-state degeneracy.
    """

    energies: tuple
    beta: float
    gibbs: np.ndarray = field(init=False, repr=False, compare=False)
    partition: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float).reshape(-1)
        if e.size == 0 or not np.all(np.isfinite(e)):
            raise ValidationError("energies must be a non-empty list of finite numbers")
        beta = float(self.beta)
        if math.isnan(beta) or beta < 0:
            raise ValidationError("beta must be non-negative (or inf)")
        object.__setattr__(self, "energies", tuple(e.tolist()))
        object.__setattr__(self, "beta", beta)
        emin = e.min()
        if math.isinf(beta):
            w = (e == emin).astype(float)
            z = w.sum()
        else:
            w = np.exp(-beta * (e - emin))
            z = w.sum() * math.exp(-beta * emin) if beta * emin < 700 else math.inf
        g = w / w.sum()
        g.setflags(write=False)
        object.__setattr__(self, "gibbs", g)
        object.__setattr__(self, "partition", float(z))

    @classmethod
    def uniform(cls, d: int) -> "GibbsContext":
        return cls(tuple(range(d)), 0.0)

    @property
    def dim(self) -> int:
        return len(self.energies)

    def with_beta(self, beta: float) -> "GibbsContext":
        return GibbsContext(self.energies, beta)


@dataclass(frozen=True)
class BetaOrder:
    """Sorting permutation of p_i / gamma_i.

    ``perm[k]`` is the (0-based) level sitting at position k of the sorted
    sequence; ``inverse[i]`` is the position of level i.
    """

    perm: tuple

    @property
    def inverse(self) -> tuple:
        inv = [0] * len(self.perm)
        for k, level in enumerate(self.perm):
            inv[level] = k
        return tuple(inv)

    @property
    def dim(self) -> int:
        return len(self.perm)

    def apply(self, v) -> np.ndarray:
        """Rearrange a vector indexed by level into sorted (position) order."""
        return np.asarray(v, dtype=float)[list(self.perm)]

    def unapply(self, v) -> np.ndarray:
        """Inverse of :meth:`apply`: position order back to level order."""
        out = np.empty(len(self.perm))
        out[list(self.perm)] = np.asarray(v, dtype=float)
        return out


def all_orders(d: int) -> list[BetaOrder]:
    return [BetaOrder(tuple(p)) for p in itertools.permutations(range(d))]


def beta_order(p, ctx: GibbsContext, quasi: bool = False) -> BetaOrder:
    """Permutation sorting p_i / gamma_i non-increasingly, ties by level index."""
    p = check_prob(p, quasi=quasi, dim=ctx.dim)
    r = _kernels.ratios(p, ctx.gibbs)
    return BetaOrder(tuple(int(i) for i in np.argsort(-r, kind="stable")))


@dataclass(frozen=True)
class LorenzCurve:
    """Piecewise-linear curve through elbows (x_k, y_k), k = 0..d."""

    x: np.ndarray
    y: np.ndarray

    def __call__(self, xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        X = np.broadcast_to(self.x, (xs.size, self.x.size))
        Y = np.broadcast_to(self.y, (xs.size, self.y.size))
        return _kernels._eval_curves_np(X, Y, xs[:, None])[:, 0]

    @property
    def elbows(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    def dominates(self, other: "LorenzCurve", tol: float = CURVE_TOL) -> bool:
        """True iff this curve is on or above ``other`` everywhere."""
        pts = np.concatenate([self.x, other.x])
        return bool(np.all(self(pts) - other(pts) >= -tol))


def curve_in_order(v, ctx: GibbsContext, order: BetaOrder) -> LorenzCurve:
    """Curve of ``v`` with its levels laid out in a prescribed order."""
    v = np.asarray(v, dtype=float)
    x = np.concatenate([[0.0], np.cumsum(order.apply(ctx.gibbs))])
    y = np.concatenate([[0.0], np.cumsum(order.apply(v))])
    return LorenzCurve(x, y)


def thermo_curve(p, ctx: GibbsContext, quasi: bool = False) -> LorenzCurve:
    """Thermomajorisation curve; reduces to the Lorenz curve at beta = 0."""
    p = check_prob(p, quasi=quasi, dim=ctx.dim)
    return curve_in_order(p, ctx, beta_order(p, ctx, quasi=quasi))


def thermomajorises(p, q, ctx: GibbsContext, quasi: bool = False) -> bool:
    """p thermomajorises q: p's curve lies on or above q's."""
    return thermo_curve(p, ctx, quasi).dominates(thermo_curve(q, ctx, quasi))


def majorises(p, q) -> bool:
    """Plain majorisation by sorted partial sums."""
    p = np.sort(np.asarray(p, dtype=float))[::-1]
    q = np.sort(np.asarray(q, dtype=float))[::-1]
    return bool(np.all(np.cumsum(p) - np.cumsum(q) >= -CURVE_TOL))


def classify(q, p, ctx: GibbsContext) -> Relation:
    """Where q sits relative to the present state p."""
    fwd = thermomajorises(p, q, ctx)
    back = thermomajorises(q, p, ctx)
    if fwd and back:
        return Relation.EQUIVALENT
    if fwd:
        return Relation.FUTURE
    if back:
        return Relation.PAST
    return Relation.INCOMPARABLE


def classify_many(qs, p, ctx: GibbsContext, backend: str | None = None) -> np.ndarray:
    """Vectorised :func:`classify` over the rows of ``qs`` (int8 codes)."""
    curve = thermo_curve(p, ctx)
    return _kernels.classify_batch(np.asarray(qs, dtype=float), ctx.gibbs, curve.x, curve.y, backend=backend)
