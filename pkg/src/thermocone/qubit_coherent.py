"""Coherent thermal cones of a qubit in the XZ cross-section of the Bloch ball.

A state is written in the energy basis as [[p, c], [c, 1 - p]], i.e. Bloch
coordinates z = 2p - 1 and x = 2c. The Gibbs state sits at z = zeta with
ground population gamma = (1 + zeta) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .simplex_core import GibbsContext, Relation, ValidationError, classify

BLOCH_TOL = 1e-12
POLYLINE_POINTS = 1024

# GP cone of r = (0.2, 0, 0.5) at zeta = 1/3, worked by hand: delta^2 = 19/300,
# R+- = delta +- 1/6, R1 = (9 delta - 1/2)/8, R2 = (9 delta + 1/2)/8,
# centres zeta (1 + R1) and zeta (1 - R2).
REFERENCE_GP = {
    "bloch": (0.2, 0.0, 0.5),
    "zeta": 1 / 3,
    "delta": 0.251661,
    "r_plus": 0.418328,
    "r_minus": 0.084994,
    "r1": 0.220619,
    "r2": 0.345619,
    "centre1": 0.406873,
    "centre2": 0.218127,
}


@dataclass(frozen=True)
class BlochState:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.x**2 + self.y**2 + self.z**2 > 1 + BLOCH_TOL:
            raise ValidationError("Bloch vector lies outside the unit ball")

    def rotated(self) -> "BlochState":
        """Rotate about Z so the coherence is real and non-negative."""
        return BlochState(math.hypot(self.x, self.y), 0.0, self.z)


@dataclass(frozen=True)
class QubitThermalContext:
    zeta: float

    def __post_init__(self):
        if not 0.0 <= self.zeta < 1.0:
            raise ValidationError("zeta must lie in [0, 1)")

    @property
    def gamma_ground(self) -> float:
        return (1.0 + self.zeta) / 2.0

    @classmethod
    def from_gibbs(cls, ctx: GibbsContext) -> "QubitThermalContext":
        if ctx.dim != 2:
            raise ValidationError("qubit context needs a two-level Gibbs context")
        return cls(2.0 * float(ctx.gibbs[0]) - 1.0)


def to_population_coherence(s: BlochState) -> tuple[float, float]:
    if abs(s.y) > BLOCH_TOL:
        raise ValidationError("state has y != 0; rotate it into the XZ plane first")
    return (1.0 + s.z) / 2.0, s.x / 2.0


def from_population_coherence(p: float, c: float) -> BlochState:
    return BlochState(2.0 * c, 0.0, 2.0 * p - 1.0)


def in_bloch_disc(q, d) -> np.ndarray:
    q, d = np.asarray(q, dtype=float), np.asarray(d, dtype=float)
    return (2 * d) ** 2 + (2 * q - 1) ** 2 <= 1 + 1e-12


# --------------------------------------------------------------------------
# thermal operations


def _interval(p: float, g: float) -> tuple[float, float]:
    """Ground populations reachable from p by incoherent thermal operations."""
    star = 1.0 - (1.0 - g) * p / g
    return min(p, star), max(p, star)


def _ab(p, q, g):
    a = q * (1 - g) - g * (1 - p)
    b = p * (1 - g) - g * (1 - q)
    return a, b


def to_reachable(p: float, c: float, q, d, g: float, tol: float = 1e-12) -> np.ndarray:
    """Can (p, c) be mapped onto (q, d) by a thermal operation?

    Populations must be thermomajorised and the coherence bound
    |d| |p - g| <= |c| sqrt(A B) must hold.
    """
    q, d = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(d, dtype=float))
    lo, hi = _interval(p, g)
    pop_ok = (q >= lo - tol) & (q <= hi + tol)
    a, b = _ab(p, q, g)
    prod = np.clip(a * b, 0.0, None)
    coh_ok = np.abs(d) * abs(p - g) <= abs(c) * np.sqrt(prod) + tol
    return pop_ok & coh_ok


def _saturating_roots(p: float, c: float, d: float, g: float) -> np.ndarray:
    """Real roots q of c^2 A(q) B(q) = d^2 (p - g)^2."""
    a0 = g * (1 - p)
    b0 = p * (1 - g) - g
    # A B = (1-g) g q^2 + [(1-g) b0 - g a0] q - a0 b0
    k = d**2 * (p - g) ** 2 / c**2
    coeffs = [(1 - g) * g, (1 - g) * b0 - g * a0, -a0 * b0 - k]
    r = np.roots(coeffs)
    return np.sort(r[np.abs(r.imag) < 1e-9].real)


def to_future_boundary(s: BlochState, ctx: QubitThermalContext, d_targets) -> np.ndarray:
    """Extremal ground population q1(d) reachable with target coherence d in [0, c].

    q1 runs from the incoherent endpoint at d = 0 to p itself at d = c.
    """
    p, c = to_population_coherence(s.rotated())
    g = ctx.gamma_ground
    if c == 0:
        raise ValidationError("incoherent state: use the two-level incoherent cone")
    if abs(p - g) < 1e-15:
        raise ValidationError("state shares the Gibbs population; the boundary degenerates")
    lo, hi = _interval(p, g)
    out = []
    for d in np.atleast_1d(np.asarray(d_targets, dtype=float)):
        if not -1e-12 <= d <= c + 1e-12:
            raise ValidationError("target coherence must lie in [0, c]")
        roots = _saturating_roots(p, c, min(abs(d), c), g)
        # exactly one root lies in the incoherent interval
        out.append(float(np.clip(roots[np.argmin(_interval_distance(roots, lo, hi))], lo, hi)))
    return np.array(out)


def _interval_distance(x, lo, hi):
    return np.maximum(lo - x, 0.0) + np.maximum(x - hi, 0.0)


def printed_q1(p: float, c: float, d, g: float) -> np.ndarray:
    """Closed-form boundary with c multiplying the constant term."""
    d = np.asarray(d, dtype=float)
    root = np.sqrt(c**2 * (1 - 2 * g) ** 2 + 4 * g * d**2 * (1 - g))
    return ((g - p) * root + c * ((p - g) - 2 * g * p * (1 - g))) / (2 * g * c * (g - 1))


def printed_q2(p: float, c: float, d, g: float) -> np.ndarray:
    """Closed-form detached past boundary, transcribed term by term."""
    d = np.asarray(d, dtype=float)
    rad = c**2 * (p - g) ** 2 * ((1 - 2 * g) ** 2 * d**2 - 4 * c**2 * (g - 1) * g)
    first = (2 * g * c**2 + np.sqrt(rad)) / (2 * (d**2 + (g - 1) * g * c**2))
    return first + d**2 * (p - g - 2 * g * p * (1 - g)) / (2 * (d**2 - (1 - g) * g * c**2))


def _past_roots(p, c, d, g):
    """Roots q of c^2 (q - g)^2 = d^2 A B, the saturated past condition."""
    a0 = g * (1 - p)
    b0 = p * (1 - g) - g
    ab = np.array([(1 - g) * g, (1 - g) * b0 - g * a0, -a0 * b0])
    lhs = c**2 * np.array([1.0, -2 * g, g * g])
    poly = lhs - d**2 * ab
    r = np.roots(poly) if abs(poly[0]) > 1e-14 else np.roots(poly[1:])
    return np.sort(r[np.abs(r.imag) < 1e-9].real)


def _past_branch(p, c, d, g, near: bool) -> float:
    """Boundary root of the past at coherence d.

    ``near`` selects the piece beyond p (away from the Gibbs population),
    otherwise the detached piece across the Gibbs population. Roots that
    violate the population condition are spurious and dropped.
    """
    lo_ok = []
    for r in _past_roots(p, c, d, g):
        lo, hi = _interval(r, g)
        if not lo - 1e-9 <= p <= hi + 1e-9:
            continue
        same = (r - g) * (p - g) > 0
        if near and same and abs(r - g) >= abs(p - g) - 1e-12:
            lo_ok.append(r)
        if not near and not same:
            lo_ok.append(r)
    return float(lo_ok[0]) if lo_ok else math.nan


def _circle_gap(q, d):
    return (2 * d) ** 2 + (2 * q - 1) ** 2 - 1


def _crossings(f, grid):
    """Roots of f between consecutive grid points with a finite sign change."""
    vals = np.array([f(x) for x in grid])
    out = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b < 0:
            out.append(brentq(f, grid[i], grid[i + 1], xtol=1e-12))
        elif np.isfinite(a) and a == 0:
            out.append(float(grid[i]))
    return out, vals


@dataclass
class ToPastRegion:
    """Thermal-operation past of (p, c) in the (d, q) half plane, d >= 0.

    ``contains`` is exact (role-swapped reachability). The first piece is
    bounded by q = p, the near boundary curve on [c, d_cross] and the Bloch
    circle; the detached piece lies across the Gibbs population, bounded by
    q2 on [d_min, d_max] and the circle. ``q2_interval`` is None when the
    detached piece is absent.
    """

    p: float
    c: float
    gamma: float
    d_cross: float | None
    q2_interval: tuple | None

    def contains(self, q, d) -> np.ndarray:
        q, d = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(d, dtype=float))
        flat = [bool(to_reachable(qq, abs(dd), self.p, self.c, self.gamma)) for qq, dd in zip(q.ravel(), d.ravel())]
        return np.array(flat, dtype=bool).reshape(q.shape) & in_bloch_disc(q, d)

    def near_boundary(self, d) -> np.ndarray:
        return np.array([_past_branch(self.p, self.c, x, self.gamma, True) for x in np.atleast_1d(d)])

    def q2(self, d) -> np.ndarray:
        return np.array([_past_branch(self.p, self.c, x, self.gamma, False) for x in np.atleast_1d(d)])


def to_past_region(s: BlochState, ctx: QubitThermalContext, scan: int = 4097) -> ToPastRegion:
    p, c = to_population_coherence(s.rotated())
    g = ctx.gamma_ground
    if c == 0 or abs(p - g) < 1e-15:
        return ToPastRegion(p, c, g, None, None)
    grid = np.linspace(c, 0.5, scan)

    def near_gap(d):
        q = _past_branch(p, c, d, g, True)
        return _circle_gap(q, d) if np.isfinite(q) else 1.0

    cross, _ = _crossings(near_gap, grid)
    d_cross = cross[0] if cross else None

    def far_gap(d):
        q = _past_branch(p, c, d, g, False)
        return _circle_gap(q, d) if np.isfinite(q) else 1.0

    roots, vals = _crossings(far_gap, grid)
    interval = None
    if np.any(vals < 0):
        inside = np.nonzero(vals < 0)[0]
        d_min = max([r for r in roots if r <= grid[inside[0]]], default=float(grid[inside[0]]))
        d_max = min([r for r in roots if r >= grid[inside[-1]]], default=float(grid[inside[-1]]))
        interval = (d_min, d_max)
    return ToPastRegion(p, c, g, d_cross, interval)


# --------------------------------------------------------------------------
# Gibbs-preserving operations


@dataclass(frozen=True)
class GPCones:
    delta: float
    r_plus: float
    r_minus: float
    r1: float
    r2: float
    centre1: float  # z coordinate of the first disc centre
    centre2: float
    zeta: float

    def classify(self, states) -> np.ndarray:
        """Relation codes for Bloch vectors given as rows (x, y, z)."""
        st = np.atleast_2d(np.asarray(states, dtype=float))
        rp, rm = gp_r(st, self.zeta)
        tol = 1e-12
        fwd = (rp <= self.r_plus + tol) & (rm <= self.r_minus + tol)
        back = (rp >= self.r_plus - tol) & (rm >= self.r_minus - tol)
        out = np.full(st.shape[0], Relation.INCOMPARABLE, dtype=np.int8)
        out[fwd & ~back] = Relation.FUTURE
        out[back & ~fwd] = Relation.PAST
        out[fwd & back] = Relation.EQUIVALENT
        return out

    def in_discs(self, x, z) -> np.ndarray:
        x, z = np.asarray(x, dtype=float), np.asarray(z, dtype=float)
        return ((x**2 + (z - self.centre1) ** 2 <= self.r1**2 + 1e-12)
                & (x**2 + (z - self.centre2) ** 2 <= self.r2**2 + 1e-12))


def gp_r(states, zeta: float) -> tuple[np.ndarray, np.ndarray]:
    st = np.atleast_2d(np.asarray(states, dtype=float))
    x, y, z = st[:, 0], st[:, 1], st[:, 2]
    delta = np.sqrt((z - zeta) ** 2 + (x**2 + y**2) * (1 - zeta**2))
    return delta + zeta * z, delta - zeta * z


def gp_cones(s: BlochState, ctx: QubitThermalContext) -> GPCones:
    z = ctx.zeta
    if z >= 1:
        raise ValidationError("zeta = 1 (zero temperature) is degenerate")
    delta = math.sqrt((s.z - z) ** 2 + (s.x**2 + s.y**2) * (1 - z**2))
    rp, rm = delta + z * s.z, delta - z * s.z
    r1 = (rm + z**2) / (1 - z**2)
    r2 = (rp - z**2) / (1 - z**2)
    return GPCones(delta, rp, rm, r1, r2, z * (1 + r1), z * (1 - r2), z)


def gp_classify(target: BlochState, source: BlochState, ctx: QubitThermalContext) -> Relation:
    return Relation(int(gp_cones(source, ctx).classify([[target.x, target.y, target.z]])[0]))


def to_classify(target: BlochState, source: BlochState, ctx: QubitThermalContext) -> Relation:
    """Thermal-operation relation of two XZ-plane states."""
    p, c = to_population_coherence(source.rotated())
    q, d = to_population_coherence(target.rotated())
    g = ctx.gamma_ground
    fwd = bool(to_reachable(p, c, q, d, g))
    back = bool(to_reachable(q, d, p, c, g))
    if fwd and back:
        return Relation.EQUIVALENT
    if fwd:
        return Relation.FUTURE
    if back:
        return Relation.PAST
    return Relation.INCOMPARABLE


def incoherent_classify(q: float, p: float, ctx: QubitThermalContext) -> Relation:
    """Two-level incoherent relation via the simplex classifier."""
    g = ctx.gamma_ground
    energies = (0.0, math.log(g / (1 - g))) if g < 1 else (0.0, 1.0)
    return classify([q, 1 - q], [p, 1 - p], GibbsContext(energies, 1.0))


# --------------------------------------------------------------------------
# polylines


def gp_polylines(s: BlochState, ctx: QubitThermalContext, points: int = POLYLINE_POINTS) -> dict:
    """Disc boundary arcs clipped to the Bloch disc, as (x, z) arrays."""
    cones_ = gp_cones(s, ctx)
    t = np.linspace(0, 2 * np.pi, points)
    out = {}
    for name, r, zc in (("circle1", cones_.r1, cones_.centre1), ("circle2", cones_.r2, cones_.centre2)):
        x, z = r * np.cos(t), zc + r * np.sin(t)
        keep = x**2 + z**2 <= 1 + 1e-9
        out[name] = np.stack([x[keep], z[keep]], axis=1)
    out["bloch"] = np.stack([np.cos(t), np.sin(t)], axis=1)
    return out


def to_polylines(s: BlochState, ctx: QubitThermalContext, points: int = POLYLINE_POINTS) -> dict:
    """Future and past boundary pieces as (d, q) arrays on the d >= 0 half."""
    p, c = to_population_coherence(s.rotated())
    g = ctx.gamma_ground
    out = {}
    if c > 0 and abs(p - g) > 1e-15:
        ds = np.linspace(0.0, c, points)
        out["future_q1"] = np.stack([ds, to_future_boundary(s, ctx, ds)], axis=1)
        out["future_segment"] = np.array([[0.0, p], [c, p]])
        past = to_past_region(s, ctx)
        if past.d_cross is not None:
            dd = np.linspace(c, past.d_cross, points)
            out["past_near"] = np.stack([dd, past.near_boundary(dd)], axis=1)
            out["past_segment"] = np.array([[c, p], [past.d_cross, p]])
        if past.q2_interval is not None:
            dd = np.linspace(*past.q2_interval, points)
            out["past_q2"] = np.stack([dd, past.q2(dd)], axis=1)
    return out


def polyline_rows(lines: dict, bloch: bool = False) -> list[dict]:
    """Flatten polylines into CSV rows; ``bloch`` converts (d, q) to (x, z)."""
    rows = []
    for name, arr in lines.items():
        for a, b in np.asarray(arr):
            if bloch and not name.startswith(("circle", "bloch")):
                rows.append({"curve": name, "x": 2 * a, "z": 2 * b - 1})
            elif bloch or name.startswith(("circle", "bloch")):
                rows.append({"curve": name, "x": a, "z": b})
            else:
                rows.append({"curve": name, "d": a, "q": b})
    return rows


__all__ = [
    "REFERENCE_GP",
    "BlochState",
    "GPCones",
    "QubitThermalContext",
    "ToPastRegion",
    "from_population_coherence",
    "gp_classify",
    "gp_cones",
    "gp_polylines",
    "gp_r",
    "in_bloch_disc",
    "incoherent_classify",
    "polyline_rows",
    "printed_q1",
    "printed_q2",
    "to_classify",
    "to_future_boundary",
    "to_past_region",
    "to_polylines",
    "to_population_coherence",
    "to_reachable",
]
