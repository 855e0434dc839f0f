"""Relative volumes of future, past and incomparable regions.

Volumes are fractions of the simplex volume. Three routes exist: the d = 3,
beta = 0 closed form, exact polytope volumes (future for d <= 6, past
for d <= 4) and Monte Carlo classification of flat-Dirichlet samples.
"""

from __future__ import annotations

import enum
import itertools
import math
import numbers
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import cones
from .simplex_core import (
    GibbsContext,
    Relation,
    ValidationError,
    beta_order,
    check_prob,
    classify_many,
)

CHUNK = 1 << 16
MAX_EXACT_FUTURE_DIM = 6


class VolumeMethod(enum.Enum):
    CLOSED_FORM = "closed-form"
    EXACT_HULL = "exact"
    MONTE_CARLO = "mc"


@dataclass(frozen=True)
class VolumeReport:
    v_future: float
    v_past: float
    v_incomparable: float
    method: VolumeMethod
    samples: int = 0
    std_error: tuple | None = None  # (future, past, incomparable), Monte Carlo only

    @property
    def total(self) -> float:
        return self.v_future + self.v_past + self.v_incomparable

    def as_dict(self) -> dict:
        se = self.std_error or (0.0, 0.0, 0.0)
        return {
            "v_future": self.v_future,
            "v_past": self.v_past,
            "v_incomparable": self.v_incomparable,
            "method": self.method.value,
            "samples": self.samples,
            "se_future": se[0],
            "se_past": se[1],
            "se_incomparable": se[2],
        }


# --------------------------------------------------------------------------
# closed form and exact polytopes


def _closed_form_terms(p1, p2, p3):
    half = Fraction(1, 2) if isinstance(p1, Fraction) else 0.5
    step = 3 * (1 - 2 * p1) ** 2 if p1 < half else 0
    vf = (3 * p1 - 1) ** 2 - 3 * (p2 - p1) ** 2
    vp = 12 * p2 * p3 - step
    vi = 1 - 3 * (1 - p1) ** 2 + (1 - 3 * p3) ** 2 - 2 * vf + step
    return vf, vp, vi


def closed_form_d3(p) -> VolumeReport:
    """Infinite-temperature volumes of a qutrit state, in closed form.

    Rational entries (``fractions.Fraction`` or int) are evaluated in exact
    arithmetic, so e.g. the uniform state gives v_past = 1 with no rounding.
    """
    if len(p) == 3 and all(isinstance(x, numbers.Rational) for x in p):
        ps = sorted((Fraction(x) for x in p), reverse=True)
        if sum(ps) != 1 or ps[-1] < 0:
            raise ValidationError("rational state must be non-negative and sum to exactly 1")
    else:
        p = check_prob(p)
        if p.size != 3:
            raise ValidationError("closed form volumes exist for d = 3 only")
        ps = np.sort(p)[::-1]
    vf, vp, vi = _closed_form_terms(*ps)
    return VolumeReport(float(vf), float(vp), float(vi), VolumeMethod.CLOSED_FORM)


def shoelace_area(xy) -> float:
    """Area of a simple polygon with vertices listed in boundary order."""
    xy = np.asarray(xy, dtype=float)
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _polygon_fraction(vertices: np.ndarray) -> float:
    # chart (q1, q2) maps the simplex onto a triangle of area 1/2
    xy = vertices[:, :2]
    if len(xy) < 3 or np.linalg.matrix_rank(xy[1:] - xy[0], tol=1e-11) < 2:
        return 0.0
    try:
        ring = xy[ConvexHull(xy).vertices]
    except QhullError:
        return 0.0
    return 2.0 * shoelace_area(ring)


def exact_future_fraction(p, ctx: GibbsContext) -> float:
    p = check_prob(p, dim=ctx.dim)
    if ctx.dim > MAX_EXACT_FUTURE_DIM:
        raise ValidationError(f"exact future volumes are limited to d <= {MAX_EXACT_FUTURE_DIM}")
    verts = cones.dedup(cones.future_vertices(p, ctx))
    if ctx.dim == 3:
        return _polygon_fraction(verts)
    return cones.relative_volume(verts)


def exact_future_volume(p, ctx: GibbsContext) -> VolumeReport:
    """Exact future volume; past and incomparable are left as NaN."""
    vf = exact_future_fraction(p, ctx)
    return VolumeReport(vf, math.nan, math.nan, VolumeMethod.EXACT_HULL)


def exact_volumes(p, ctx: GibbsContext) -> VolumeReport:
    """All three volumes from exact polytopes (d <= 4)."""
    vf = exact_future_fraction(p, ctx)
    vp = cones.exact_past_volume(p, ctx)
    vi = max(0.0, 1.0 - vf - vp)
    return VolumeReport(vf, vp, vi, VolumeMethod.EXACT_HULL)


# --------------------------------------------------------------------------
# Monte Carlo


def _chunk_sizes(n: int) -> list[int]:
    full, rest = divmod(n, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _draw(seed_seq: np.random.SeedSequence, m: int, d: int) -> np.ndarray:
    e = np.random.default_rng(seed_seq).standard_exponential((m, d))
    return e / e.sum(axis=1, keepdims=True)


def sample_simplex(d: int, n: int, seed: int = 0) -> np.ndarray:
    """n flat-Dirichlet points on the (d-1)-simplex.

    Chunk k of CHUNK rows is drawn from child k of ``SeedSequence(seed)``,
    so the output does not depend on how chunks are scheduled.
    """
    sizes = _chunk_sizes(n)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    if not sizes:
        return np.empty((0, d))
    return np.vstack([_draw(s, m, d) for s, m in zip(seqs, sizes)])


def _report_from_counts(counts: np.ndarray, n: int) -> VolumeReport:
    # equivalent states (measure zero) are counted with the future
    fut = counts[Relation.FUTURE] + counts[Relation.EQUIVALENT]
    freqs = np.array([fut, counts[Relation.PAST], counts[Relation.INCOMPARABLE]], dtype=float) / n
    se = tuple(float(x) for x in np.sqrt(freqs * (1.0 - freqs) / n))
    return VolumeReport(float(freqs[0]), float(freqs[1]), float(freqs[2]), VolumeMethod.MONTE_CARLO, n, se)


def mc_from_samples(p, ctx: GibbsContext, samples: np.ndarray, backend: str | None = None) -> VolumeReport:
    """Classify a caller-supplied sample (handy for common random numbers)."""
    codes = classify_many(samples, p, ctx, backend=backend)
    return _report_from_counts(np.bincount(codes, minlength=4), samples.shape[0])


def mc_volumes(p, ctx: GibbsContext, n: int = 10**6, seed: int = 0, workers: int = 1,
               backend: str | None = None) -> VolumeReport:
    """Monte Carlo volumes from n uniform simplex samples."""
    p = check_prob(p, dim=ctx.dim)
    if n < 1000:
        raise ValidationError("Monte Carlo volumes need n >= 1000 samples")
    sizes = _chunk_sizes(n)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    def one(k):
        qs = _draw(seqs[k], sizes[k], ctx.dim)
        return np.bincount(classify_many(qs, p, ctx, backend=backend), minlength=4)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(k) for k in range(len(sizes))]
    return _report_from_counts(np.sum(parts, axis=0), n)


def volumes(p, ctx: GibbsContext, method: str = "auto", n: int = 10**6, seed: int = 0) -> VolumeReport:
    """Dispatch on ``method``: closed-form, exact, mc or auto."""
    if method == "auto":
        if ctx.dim == 3 and ctx.beta == 0:
            method = "closed-form"
        elif ctx.dim <= cones.MAX_EXACT_PAST_DIM and math.isfinite(ctx.beta):
            method = "exact"
        else:
            method = "mc"
    if method == "closed-form":
        if ctx.beta != 0:
            raise ValidationError("closed form volumes need beta = 0")
        return closed_form_d3(p)
    if method == "exact":
        return exact_volumes(p, ctx)
    if method == "mc":
        return mc_volumes(p, ctx, n=n, seed=seed)
    raise ValidationError(f"unknown volume method {method!r}")


# --------------------------------------------------------------------------
# sweeps and grids


@dataclass(frozen=True)
class SweepRow:
    state: tuple
    beta: float
    report: VolumeReport
    order: tuple
    kink: bool  # beta-order differs from the previous beta in the sweep

    def as_dict(self) -> dict:
        row = {f"p{i + 1}": v for i, v in enumerate(self.state)}
        row["beta"] = self.beta
        row.update(self.report.as_dict())
        row["order"] = "".join(str(i) for i in self.order)
        row["kink"] = int(self.kink)
        return row


def distinct_permutations(p) -> list[tuple]:
    seen, out = set(), []
    for perm in itertools.permutations(tuple(float(x) for x in p)):
        if perm not in seen:
            seen.add(perm)
            out.append(perm)
    return out


def volume_sweep(p, energies, betas, method: str = "auto", n: int = 10**5, seed: int = 0,
                 permutations: bool = True) -> list[SweepRow]:
    """Volumes of p (and its permutations) along a list of inverse temperatures."""
    p = check_prob(p)
    states = distinct_permutations(p) if permutations else [tuple(p)]
    rows = []
    for s in states:
        prev = None
        for beta in betas:
            ctx = GibbsContext(tuple(energies), float(beta))
            order = beta_order(s, ctx).perm
            rep = volumes(s, ctx, method=method, n=n, seed=seed)
            rows.append(SweepRow(s, float(beta), rep, order, prev is not None and order != prev))
            prev = order
    return rows


def isovolumetric_grid(ctx: GibbsContext, resolution: int, method: str = "auto",
                       n: int = 10**4, seed: int = 0) -> list[dict]:
    """Volumes at every point of a regular grid over the 2-simplex."""
    from .probabilistic_cones import simplex_grid

    if ctx.dim != 3:
        raise ValidationError("isovolumetric grids are defined for d = 3")
    if resolution < 1:
        raise ValidationError("resolution must be positive")
    rows = []
    for q in simplex_grid(3, resolution):
        rep = volumes(q, ctx, method=method, n=n, seed=seed)
        row = {"p1": q[0], "p2": q[1], "p3": q[2], "beta": ctx.beta}
        row.update(rep.as_dict())
        rows.append(row)
    return rows


def largest_incomparable_state(ctx: GibbsContext) -> np.ndarray:
    """Non-full-rank state with the largest incomparable region.

    Gibbs weights on all but the highest-energy level, which is left empty.
    """
    top = int(np.argmax(ctx.energies))
    w = np.array(ctx.gibbs, dtype=float)
    w[top] = 0.0
    return w / w.sum()


__all__ = [
    "CHUNK",
    "SweepRow",
    "VolumeMethod",
    "VolumeReport",
    "closed_form_d3",
    "distinct_permutations",
    "exact_future_fraction",
    "exact_future_volume",
    "exact_volumes",
    "isovolumetric_grid",
    "largest_incomparable_state",
    "mc_from_samples",
    "mc_volumes",
    "sample_simplex",
    "shoelace_area",
    "volume_sweep",
    "volumes",
]
