"""Future cones, tangent vectors and the past / incomparable regions."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .simplex_core import (
    BetaOrder,
    GibbsContext,
    Relation,
    ValidationError,
    all_orders,
    beta_order,
    check_prob,
    curve_in_order,
    thermo_curve,
)

MAX_FUTURE_DIM = 8
MAX_EXACT_PAST_DIM = 4
DEDUP_TOL = 1e-10
HULL_TOL = 1e-10


class ConeKind(enum.Enum):
    FUTURE = "future"
    PAST_CHAMBER = "past_chamber"
    INCOMPARABLE_PIECE = "incomparable_piece"


@dataclass(frozen=True)
class TangentVector:
    entries: np.ndarray  # level order, may hold negative entries
    level: int  # 1-based index of the tangent linear piece
    chamber: BetaOrder


@dataclass
class ConePolytope:
    kind: ConeKind
    vertices: np.ndarray  # (k, d), one vertex per row
    chamber: BetaOrder | None = None

    @property
    def volume(self) -> float:
        """Volume relative to the whole simplex."""
        return relative_volume(self.vertices)


def dedup(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    kept: list[np.ndarray] = []
    for v in points:
        if not any(np.all(np.abs(v - k) <= tol) for k in kept):
            kept.append(v)
    return np.array(kept).reshape(-1, points.shape[1])


def _affine_rank(points: np.ndarray) -> int:
    if len(points) < 2:
        return 0
    return int(np.linalg.matrix_rank(points[1:] - points[0], tol=1e-11))


def relative_volume(vertices: np.ndarray) -> float:
    """Volume of conv(vertices) divided by the volume of the simplex."""
    vertices = np.asarray(vertices, dtype=float)
    d = vertices.shape[1]
    coords = vertices[:, :-1]
    if d == 1 or _affine_rank(coords) < d - 1:
        return 0.0
    if d == 2:
        return float(np.ptp(coords[:, 0]))
    try:
        vol = ConvexHull(coords).volume
    except QhullError:
        return 0.0
    return float(vol * np.prod(np.arange(1, d)))


class Hull:
    """Convex hull of simplex points in the first d-1 coordinates."""

    def __init__(self, vertices):
        self.vertices = np.asarray(vertices, dtype=float)
        coords = self.vertices[:, :-1]
        self.dim = coords.shape[1]
        self.full = _affine_rank(coords) == self.dim and self.dim >= 1
        self.equations = None
        if self.full:
            if self.dim == 1:
                lo, hi = coords[:, 0].min(), coords[:, 0].max()
                self.equations = np.array([[-1.0, lo], [1.0, -hi]])
            else:
                try:
                    self.equations = ConvexHull(coords).equations
                except QhullError:
                    self.full = False

    def margin(self, points) -> np.ndarray:
        """Max signed facet distance; negative inside, positive outside."""
        pts = np.atleast_2d(points)[:, :-1]
        if not self.full:
            return np.full(pts.shape[0], np.inf)
        return (pts @ self.equations[:, :-1].T + self.equations[:, -1]).max(axis=1)

    def contains(self, points, strict: bool = False, tol: float = HULL_TOL) -> np.ndarray:
        m = self.margin(points)
        return m < -tol if strict else m <= tol

    @property
    def extreme_points(self) -> np.ndarray:
        if not self.full:
            return dedup(self.vertices)
        if self.dim == 1:
            c = self.vertices[:, 0]
            return self.vertices[[np.argmin(c), np.argmax(c)]]
        return self.vertices[ConvexHull(self.vertices[:, :-1]).vertices]


# --------------------------------------------------------------------------
# tangent vectors


def tangent_vectors_thermal(p, ctx: GibbsContext, chamber: BetaOrder) -> list[TangentVector]:
    """Vectors tangent to each linear piece of p's curve, laid out in ``chamber``."""
    p = check_prob(p, dim=ctx.dim)
    d = ctx.dim
    if d < 2:
        raise ValidationError("tangent vectors need d >= 2")
    own = beta_order(p, ctx)
    pb = own.apply(p)
    gb = own.apply(ctx.gibbs)
    if np.any(gb <= 0):
        raise ValidationError("tangent vectors need finite beta (all gibbs weights > 0)")
    F = np.cumsum(pb)
    G = np.cumsum(gb)
    gc = chamber.apply(ctx.gibbs)
    out = []
    for n in range(1, d + 1):
        s = pb[n - 1] / gb[n - 1]
        sorted_t = np.empty(d)
        sorted_t[0] = F[n - 1] - s * (G[n - 1] - gc[0])
        sorted_t[1 : d - 1] = s * gc[1 : d - 1]
        sorted_t[d - 1] = 1.0 - sorted_t[0] - s * gc[1 : d - 1].sum()
        out.append(TangentVector(chamber.unapply(sorted_t), n, chamber))
    return out


def tangent_vectors_uniform(p) -> list[TangentVector]:
    """Infinite-temperature tangent vectors, in p's own chamber."""
    p = check_prob(p)
    ctx = GibbsContext.uniform(p.size)
    return tangent_vectors_thermal(p, ctx, beta_order(p, ctx))


def project_to_simplex(t) -> np.ndarray:
    """Push a quasi-probability vector onto the simplex by the pairwise sweep.

    Pairs (m-1, m) are visited from the tail, in chamber order for a
    :class:`TangentVector` and in the given order for a plain array.
    """
    if isinstance(t, TangentVector):
        order = t.chamber
        v = order.apply(t.entries)
    else:
        order = None
        v = np.array(t, dtype=float)
    if abs(v.sum() - 1.0) > 1e-9:
        raise ValidationError("tangent vector must sum to 1")
    for m in range(v.size - 1, 0, -1):
        a, b = v[m - 1], v[m]
        v[m - 1], v[m] = min(a + b, a), max(b, 0.0)
    if np.any(v < -1e-12):
        raise ValidationError("sweep left negative entries; malformed input")
    v = np.clip(v, 0.0, None)
    return order.unapply(v) if order is not None else v


# --------------------------------------------------------------------------
# future cone


def future_vertices(p, ctx: GibbsContext, quasi: bool = False) -> np.ndarray:
    """Candidate extreme points p^pi of the future cone, one per permutation."""
    d = ctx.dim
    if d > MAX_FUTURE_DIM:
        raise ValidationError(f"future cone enumeration is limited to d <= {MAX_FUTURE_DIM}")
    curve = thermo_curve(p, ctx, quasi=quasi)
    verts = []
    for order in all_orders(d):
        x = np.concatenate([[0.0], np.cumsum(order.apply(ctx.gibbs))])
        y = curve(x)
        y[0] = 0.0
        y[-1] = curve.y[-1]
        verts.append(order.unapply(np.diff(y)))
    return np.array(verts)


def future_cone(p, ctx: GibbsContext) -> ConePolytope:
    p = check_prob(p, dim=ctx.dim)
    return ConePolytope(ConeKind.FUTURE, dedup(future_vertices(p, ctx)))


def beta_swap(p, ctx: GibbsContext, k: int) -> np.ndarray:
    """Elementary Gibbs-preserving swap between level 0 and level ``k`` (0-based)."""
    p = check_prob(p, dim=ctx.dim)
    if not 1 <= k < ctx.dim:
        raise ValidationError("beta swap level must satisfy 1 <= k < d")
    g = ctx.gibbs
    if g[0] <= 0:
        raise ValidationError("gibbs weight of level 0 vanishes")
    out = p.copy()
    out[0] = (g[0] - g[k]) / g[0] * p[0] + p[k]
    out[k] = g[k] / g[0] * p[0]
    return out


def tangent_hull_extremes(p, ctx: GibbsContext, chamber: BetaOrder, i: int) -> np.ndarray:
    """Extreme points of conv[future(t_i) U future(t_(i+1))] in ``chamber``."""
    ts = tangent_vectors_thermal(p, ctx, chamber)
    pts = np.vstack([future_vertices(ts[i - 1].entries, ctx, quasi=True),
                     future_vertices(ts[i].entries, ctx, quasi=True)])
    return dedup(Hull(dedup(pts)).extreme_points)


# --------------------------------------------------------------------------
# past / incomparable


def _chamber_constraints(p, ctx: GibbsContext, chamber: BetaOrder):
    """Rows (a, b) meaning a.q >= b for the past cone inside one chamber."""
    d = ctx.dim
    curve = thermo_curve(p, ctx)
    g = ctx.gibbs
    perm = list(chamber.perm)
    rows, rhs = [], []
    for i in range(d):  # non-negativity
        a = np.zeros(d)
        a[i] = 1.0
        rows.append(a)
        rhs.append(0.0)
    for k in range(d - 1):  # ratio ordering along the chamber
        a = np.zeros(d)
        a[perm[k]] = g[perm[k + 1]]
        a[perm[k + 1]] = -g[perm[k]]
        rows.append(a)
        rhs.append(0.0)
    X = np.concatenate([[0.0], np.cumsum(g[perm])])
    for xk, fk in zip(curve.x[1:-1], curve.y[1:-1]):
        # q's curve (laid out in this chamber) evaluated at xk, linear in q
        j = int(np.searchsorted(X, xk, side="right")) - 1
        j = min(j, d - 1)
        a = np.zeros(d)
        a[perm[:j]] = 1.0
        w = X[j + 1] - X[j]
        if w > 0:
            a[perm[j]] += (xk - X[j]) / w
        rows.append(a)
        rhs.append(fk)
    A, b = np.array(rows), np.array(rhs)
    # unit rows keep the feasibility tolerance geometric when gibbs weights are tiny
    norms = np.linalg.norm(A, axis=1)
    return A / norms[:, None], b / norms


def past_chamber_vertices(p, ctx: GibbsContext, chamber: BetaOrder) -> np.ndarray:
    """Vertices of the (convex) past cone restricted to one chamber."""
    d = ctx.dim
    A, b = _chamber_constraints(p, ctx, chamber)
    ones = np.ones(d)
    verts = []
    for active in itertools.combinations(range(len(b)), d - 1):
        M = np.vstack([A[list(active)], ones])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        q = np.linalg.solve(M, np.concatenate([b[list(active)], [1.0]]))
        if np.all(A @ q - b >= -1e-10):
            verts.append(_polish(q, A, b))
    if not verts:
        return np.empty((0, d))
    return dedup(np.clip(np.array(verts), 0.0, None))


def _polish(q, A, b, tol=1e-8):
    # degenerate vertices are hit by many ill-conditioned subsystems;
    # re-solving on the full active set makes the copies coincide
    tight = np.abs(A @ q - b) <= tol
    M = np.vstack([A[tight], np.ones(q.size)])
    r = np.concatenate([b[tight], [1.0]])
    sol = np.linalg.lstsq(M, r, rcond=None)[0]
    return sol if np.all(A @ sol - b >= -1e-10) else q


@dataclass
class IncomparableRegion:
    """Implicit region int(T) minus the future cone.

    ``pieces`` holds one hull per chamber and consecutive tangent pair.
    """

    source: np.ndarray
    ctx: GibbsContext
    future: Hull
    pieces: list = field(default_factory=list)  # (chamber, i, Hull)

    def in_union_interior(self, qs, tol: float = HULL_TOL) -> np.ndarray:
        qs = np.atleast_2d(qs)
        hit = np.zeros(qs.shape[0], dtype=bool)
        for _, _, hull in self.pieces:
            if hull.full:
                hit |= hull.contains(qs, strict=True, tol=tol)
        return hit

    def in_future(self, qs, tol: float = HULL_TOL) -> np.ndarray:
        qs = np.atleast_2d(qs)
        if self.future.full:
            return self.future.contains(qs, tol=tol)
        # lower-dimensional future cone: only its own points qualify
        return np.array([any(np.allclose(q, v, atol=1e-9) for v in self.future.vertices) for q in qs])

    def contains(self, qs) -> np.ndarray:
        return self.in_union_interior(qs) & ~self.in_future(qs)

    def classify_points(self, qs) -> np.ndarray:
        """Relation codes (FUTURE / PAST / INCOMPARABLE) from the geometric construction."""
        qs = np.atleast_2d(qs)
        fut = self.in_future(qs)
        inc = self.in_union_interior(qs) & ~fut
        out = np.full(qs.shape[0], Relation.PAST, dtype=np.int8)
        out[inc] = Relation.INCOMPARABLE
        out[fut] = Relation.FUTURE
        return out


def incomparable_region(p, ctx: GibbsContext) -> IncomparableRegion:
    p = check_prob(p, dim=ctx.dim)
    region = IncomparableRegion(p, ctx, Hull(dedup(future_vertices(p, ctx))))
    for chamber in all_orders(ctx.dim):
        ts = tangent_vectors_thermal(p, ctx, chamber)
        fv = [dedup(future_vertices(t.entries, ctx, quasi=True)) for t in ts]
        for i in range(ctx.dim - 1):
            region.pieces.append((chamber, i + 1, Hull(dedup(np.vstack([fv[i], fv[i + 1]])))))
    return region


def past_and_incomparable(p, ctx: GibbsContext) -> tuple[list[ConePolytope], IncomparableRegion]:
    """Per-chamber past polytopes plus the implicit incomparable region."""
    p = check_prob(p, dim=ctx.dim)
    if ctx.dim > MAX_EXACT_PAST_DIM:
        raise ValidationError(f"exact past vertices are limited to d <= {MAX_EXACT_PAST_DIM}")
    pieces = []
    for chamber in all_orders(ctx.dim):
        v = past_chamber_vertices(p, ctx, chamber)
        if len(v):
            pieces.append(ConePolytope(ConeKind.PAST_CHAMBER, v, chamber))
    return pieces, incomparable_region(p, ctx)


def gibbs_edge_states(ctx: GibbsContext) -> np.ndarray:
    """States supported on two levels in Gibbs proportion."""
    g = ctx.gibbs
    out = []
    for i, j in itertools.combinations(range(ctx.dim), 2):
        v = np.zeros(ctx.dim)
        v[i], v[j] = g[i], g[j]
        out.append(v / (g[i] + g[j]))
    return np.array(out)


def exact_past_volume(p, ctx: GibbsContext) -> float:
    """Sum of chamber-wise past volumes, relative to the simplex."""
    p = check_prob(p, dim=ctx.dim)
    if ctx.dim > MAX_EXACT_PAST_DIM:
        raise ValidationError(f"exact past volumes are limited to d <= {MAX_EXACT_PAST_DIM}")
    return float(sum(relative_volume(v) for o in all_orders(ctx.dim)
                     if len(v := past_chamber_vertices(p, ctx, o))))


__all__ = [
    "ConeKind",
    "ConePolytope",
    "Hull",
    "IncomparableRegion",
    "TangentVector",
    "beta_swap",
    "curve_in_order",
    "exact_past_volume",
    "future_cone",
    "future_vertices",
    "gibbs_edge_states",
    "incomparable_region",
    "past_and_incomparable",
    "past_chamber_vertices",
    "project_to_simplex",
    "relative_volume",
    "tangent_hull_extremes",
    "tangent_vectors_thermal",
    "tangent_vectors_uniform",
]
