"""Schmidt coefficients of Haar-random bipartite pure states and LOCC cone volumes.

For a random pure state on C^N (x) C^M the reduced spectrum follows the
Laguerre unitary ensemble. It is sampled here from an N x N tridiagonal
model that needs only O(N) chi variates per draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .probabilistic_cones import simplex_grid
from .simplex_core import GibbsContext, Relation, ValidationError, check_prob, classify_many
from .volumes import VolumeMethod, VolumeReport, distinct_permutations


@dataclass(frozen=True)
class InducedMeasureSpec:
    n_sys: int
    m_env: int
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_sys <= self.m_env:
            raise ValidationError("need 1 <= N <= M for the induced measure")


def _chi(rng, dof, size):
    return np.sqrt(rng.chisquare(dof, size=size))


def lue_tridiagonal(spec: InducedMeasureSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of tridiagonal matrices B B^T with the LUE spectrum, shape (n, N, N)."""
    N, M = spec.n_sys, spec.m_env
    diag = np.stack([_chi(rng, 2 * (M - i), n) for i in range(N)], axis=1)
    sub = np.stack([_chi(rng, 2 * (N - 1 - i), n) for i in range(N - 1)], axis=1) if N > 1 else np.empty((n, 0))
    T = np.zeros((n, N, N))
    idx = np.arange(N)
    T[:, idx, idx] = diag**2
    T[:, idx[1:], idx[1:]] += sub**2
    off = diag[:, :-1] * sub
    T[:, idx[:-1], idx[1:]] = off
    T[:, idx[1:], idx[:-1]] = off
    return T


def _normalise_sorted(eigs: np.ndarray) -> np.ndarray:
    eigs = np.clip(eigs, 0.0, None)
    eigs = eigs / eigs.sum(axis=1, keepdims=True)
    return -np.sort(-eigs, axis=1)


def sample_schmidt(spec: InducedMeasureSpec, n: int) -> np.ndarray:
    """n Schmidt vectors (rows, sorted non-increasingly) from the induced measure."""
    if n < 1:
        raise ValidationError("need at least one sample")
    if spec.n_sys == 1:
        return np.ones((n, 1))
    rng = np.random.default_rng(spec.seed)
    out = np.empty((n, spec.n_sys))
    step = 1 << 15
    for a in range(0, n, step):
        m = min(step, n - a)
        out[a : a + m] = _normalise_sorted(np.linalg.eigvalsh(lue_tridiagonal(spec, m, rng)))
    return out


def sample_schmidt_dense(spec: InducedMeasureSpec, n: int) -> np.ndarray:
    """Reference sampler: spectra of G G^dagger with complex Gaussian G (N x M)."""
    rng = np.random.default_rng(spec.seed)
    N, M = spec.n_sys, spec.m_env
    G = rng.standard_normal((n, N, M)) + 1j * rng.standard_normal((n, N, M))
    W = G @ np.conj(np.swapaxes(G, 1, 2))
    return _normalise_sorted(np.linalg.eigvalsh(W))


def entanglement_codes(qs, p) -> np.ndarray:
    """LOCC relation of each row to p: FUTURE means p -> q is possible."""
    p = check_prob(p)
    codes = classify_many(qs, p, GibbsContext.uniform(p.size))
    out = codes.copy()
    out[codes == Relation.FUTURE] = Relation.PAST
    out[codes == Relation.PAST] = Relation.FUTURE
    return out


def _report(codes: np.ndarray) -> VolumeReport:
    n = codes.size
    c = np.bincount(codes, minlength=4)
    fut = c[Relation.FUTURE] + c[Relation.EQUIVALENT]
    f = np.array([fut, c[Relation.PAST], c[Relation.INCOMPARABLE]], dtype=float) / n
    se = tuple(float(x) for x in np.sqrt(f * (1 - f) / n))
    return VolumeReport(float(f[0]), float(f[1]), float(f[2]), VolumeMethod.MONTE_CARLO, n, se)


def entanglement_cone_volumes(p, spec: InducedMeasureSpec, n: int = 50_000,
                              samples: np.ndarray | None = None) -> VolumeReport:
    """Induced-measure volumes of the LOCC future, past and incomparable sets of p."""
    p = check_prob(p)
    if p.size != spec.n_sys:
        raise ValidationError(f"state has dimension {p.size}, spec has N = {spec.n_sys}")
    if samples is None:
        samples = sample_schmidt(spec, n)
    return _report(entanglement_codes(samples, p))


def sorted_chamber_grid(d: int, resolution: int) -> np.ndarray:
    g = simplex_grid(d, resolution)
    keep = np.all(np.diff(g, axis=1) <= 1e-12, axis=1)
    return g[keep]


def iso_entanglement_grid(spec: InducedMeasureSpec, resolution: int = 60, n: int = 50_000) -> list[dict]:
    """Volumes over a grid of the sorted chamber, one shared sample for all points.

    ``weight`` counts the distinct permutations each sorted point stands for.
    """
    if resolution < 1:
        raise ValidationError("resolution must be positive")
    samples = sample_schmidt(spec, n)
    rows = []
    for q in sorted_chamber_grid(spec.n_sys, resolution):
        rep = _report(entanglement_codes(samples, q))
        row = {f"p{i + 1}": v for i, v in enumerate(q)}
        row["weight"] = len(distinct_permutations(q))
        row.update(rep.as_dict())
        rows.append(row)
    return rows


def center_fraction(samples: np.ndarray, radius: float) -> float:
    """Share of samples within Euclidean ``radius`` of the uniform vector."""
    d = samples.shape[1]
    return float(np.mean(np.linalg.norm(samples - 1.0 / d, axis=1) < radius))


def flat_center_fraction(d: int, radius: float) -> float:
    """The same share under the flat measure on the simplex (d = 3 closed form)."""
    if d != 3:
        raise ValidationError("closed form available for d = 3 only")
    # a disc of this radius fits inside the triangle when radius <= 1/sqrt(6)
    if radius > 1 / math.sqrt(6):
        raise ValidationError("radius must not exceed the inradius 1/sqrt(6)")
    return math.pi * radius**2 / (math.sqrt(3) / 2)


__all__ = [
    "InducedMeasureSpec",
    "center_fraction",
    "entanglement_codes",
    "entanglement_cone_volumes",
    "flat_center_fraction",
    "iso_entanglement_grid",
    "lue_tridiagonal",
    "sample_schmidt",
    "sample_schmidt_dense",
    "sorted_chamber_grid",
]
