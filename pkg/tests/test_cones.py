import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermocone import _kernels
from thermocone.cones import (
    Hull,
    beta_swap,
    exact_past_volume,
    future_cone,
    future_vertices,
    gibbs_edge_states,
    incomparable_region,
    past_and_incomparable,
    past_chamber_vertices,
    project_to_simplex,
    relative_volume,
    tangent_hull_extremes,
    tangent_vectors_thermal,
    tangent_vectors_uniform,
)
from thermocone.probabilistic_cones import simplex_grid
from thermocone.simplex_core import (
    BetaOrder,
    GibbsContext,
    Relation,
    ValidationError,
    all_orders,
    beta_order,
    classify,
    classify_many,
    thermo_curve,
    thermomajorises,
)


def touches_and_dominates(t, p, ctx, n):
    """t's curve equals p's at the (n-1)th and nth elbows of p and lies above elsewhere."""
    cp = thermo_curve(p, ctx)
    ct = thermo_curve(t, ctx, quasi=True)
    xs = np.concatenate([cp.x, ct.x, np.linspace(0, 1, 101)])
    ok_above = np.all(ct(xs) - cp(xs) >= -1e-12)
    touch = np.allclose(ct(cp.x[[n - 1, n]]), cp.y[[n - 1, n]], atol=1e-12)
    return ok_above and touch


class TestTangentVectors:
    def test_uniform_examples(self):
        t = tangent_vectors_uniform([0.6, 0.3, 0.1])
        assert np.allclose(t[0].entries, [0.6, 0.6, -0.2])
        assert np.allclose(t[1].entries, [0.6, 0.3, 0.1])
        assert np.allclose(t[2].entries, [0.8, 0.1, 0.1])
        assert [x.level for x in t] == [1, 2, 3]

    def test_four_level_example_state(self):
        p = np.array([0.43, 0.37, 0.18, 0.02])
        ts = tangent_vectors_uniform(p)
        assert len(ts) == 4
        for t in ts:
            assert t.entries.sum() == pytest.approx(1.0)
            assert np.allclose(t.entries[1:3], p[t.level - 1])
            assert touches_and_dominates(t.entries, p, GibbsContext.uniform(4), t.level)

    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_tangency_uniform(self, rng, d):
        for p in rng.dirichlet(np.ones(d), 50):
            for t in tangent_vectors_uniform(p):
                assert touches_and_dominates(t.entries, p, GibbsContext.uniform(d), t.level)

    @pytest.mark.parametrize("beta", [0.3, 1.0, 2.2])
    def test_tangency_thermal_in_own_chamber(self, rng, beta):
        ctx = GibbsContext((0, 0.7, 1.2, 2.5), beta)
        for p in rng.dirichlet(np.ones(4), 30):
            for t in tangent_vectors_thermal(p, ctx, beta_order(p, ctx)):
                assert touches_and_dominates(t.entries, p, ctx, t.level)

    def test_thermal_middle_entries(self, rng):
        ctx = GibbsContext((0, 1, 2, 3), 0.8)
        p = rng.dirichlet(np.ones(4))
        own = beta_order(p, ctx)
        pb, gb = own.apply(p), own.apply(ctx.gibbs)
        for chamber in all_orders(4):
            for t in tangent_vectors_thermal(p, ctx, chamber):
                s = pb[t.level - 1] / gb[t.level - 1]
                mid = chamber.apply(t.entries)[1:3]
                assert np.allclose(mid, s * chamber.apply(ctx.gibbs)[1:3])
                assert t.entries.sum() == pytest.approx(1.0)

    def test_beta_zero_reduces_to_uniform(self, rng):
        p = rng.dirichlet(np.ones(3))
        ctx = GibbsContext((0, 1, 2), 0.0)
        a = [t.entries for t in tangent_vectors_thermal(p, ctx, beta_order(p, ctx))]
        b = [t.entries for t in tangent_vectors_uniform(p)]
        assert np.allclose(a, b)

    def test_non_full_rank_last_tangent_is_sharp(self):
        ctx = GibbsContext((0, 1, 2), 0.6)
        p = [0.5, 0.5, 0.0]
        for chamber in all_orders(3):
            last = tangent_vectors_thermal(p, ctx, chamber)[-1]
            expected = np.zeros(3)
            expected[chamber.perm[0]] = 1.0
            assert np.allclose(last.entries, expected)

    def test_partial_order_d3(self):
        u = GibbsContext.uniform(3)
        t1, t2, t3 = (t.entries for t in tangent_vectors_uniform([0.6, 0.3, 0.1]))
        assert not thermomajorises(t1, t3, u, quasi=True) and not thermomajorises(t3, t1, u, quasi=True)
        assert thermomajorises(t1, t2, u, quasi=True) and thermomajorises(t3, t2, u, quasi=True)
        assert thermomajorises([1, 0, 0], t3, u, quasi=True)

    def test_partial_order_d4(self):
        u = GibbsContext.uniform(4)
        t = [x.entries for x in tangent_vectors_uniform([0.43, 0.37, 0.18, 0.02])]
        assert thermomajorises(t[0], t[1], u, quasi=True)
        assert thermomajorises(t[3], t[2], u, quasi=True)
        mid = (t[1] + t[2]) / 2
        for x in t:
            assert not thermomajorises(mid, x, u, quasi=True)
            assert not thermomajorises(x, mid, u, quasi=True)

    def test_t2_is_p_for_qutrits(self, rng):
        for p in rng.dirichlet(np.ones(3), 100):
            p = np.sort(p)[::-1]
            assert np.allclose(tangent_vectors_uniform(p)[1].entries, p, atol=1e-12)


class TestProjection:
    def test_examples(self):
        assert np.allclose(project_to_simplex([0.6, 0.6, -0.2]), [0.6, 0.4, 0.0])
        assert np.allclose(project_to_simplex([0.9, 0.3, -0.1, -0.1]), [0.9, 0.1, 0.0, 0.0])

    def test_proper_vector_unchanged(self, rng):
        for v in rng.dirichlet(np.ones(5), 20):
            v = np.sort(v)[::-1]
            assert np.allclose(project_to_simplex(v), v)

    def test_sweep_oracle(self, rng):
        # naive re-implementation of the sweep, one pair at a time
        def naive(v):
            v = list(v)
            m = len(v) - 1
            while m >= 1:
                a, b = v[m - 1], v[m]
                v[m - 1], v[m] = min(a + b, a), max(b, 0.0)
                m -= 1
            return np.array(v)

        for p in rng.dirichlet(np.ones(5), 30):
            for t in tangent_vectors_uniform(p):
                raw = t.chamber.apply(t.entries)
                assert np.allclose(t.chamber.apply(project_to_simplex(t)), naive(raw))

    def test_bad_input(self):
        with pytest.raises(ValidationError):
            project_to_simplex([-0.5, 0.5, 1.0])
        with pytest.raises(ValidationError):
            project_to_simplex([0.5, 0.6])


class TestFutureCone:
    def test_birkhoff_case(self):
        p = [0.5, 0.3, 0.2]
        v = future_cone(p, GibbsContext.uniform(3)).vertices
        perms = {tuple(x) for x in itertools.permutations(p)}
        assert {tuple(np.round(x, 12)) for x in v} == {tuple(np.round(x, 12)) for x in perms}

    def test_gibbs_single_vertex(self):
        ctx = GibbsContext((0, 1, 2), 0.9)
        cone = future_cone(ctx.gibbs, ctx)
        assert cone.vertices.shape == (1, 3)
        assert cone.volume == 0.0

    def test_state_with_coinciding_vertices(self):
        ctx = GibbsContext((0, 1, 2), 0.5)
        p = [0.4, 0.36, 0.24]
        assert len(future_vertices(p, ctx)) == 6
        cone = future_cone(p, ctx)
        # levels 1 and 2 both land on the last linear piece after level 0, so
        # orders (0,1,2) and (0,2,1) give the same point
        assert len(cone.vertices) == 5
        assert len(Hull(cone.vertices).extreme_points) == 5
        for v in cone.vertices:
            assert thermomajorises(p, v, ctx)
        assert Hull(cone.vertices).contains(ctx.gibbs[None, :])[0]

    def test_vertex_count_and_membership(self, rng):
        for d, beta in [(3, 0.4), (4, 1.0), (5, 0.2)]:
            ctx = GibbsContext(tuple(range(d)), beta)
            p = rng.dirichlet(np.ones(d))
            v = future_cone(p, ctx).vertices
            assert len(v) <= math.factorial(d)
            assert all(thermomajorises(p, x, ctx) for x in v)

    def test_dimension_guard(self):
        with pytest.raises(ValidationError):
            future_vertices(np.ones(9) / 9, GibbsContext.uniform(9))

    def test_hull_equals_classification(self, rng):
        ctx = GibbsContext((0, 1, 2, 3), 0.6)
        p = rng.dirichlet(np.ones(4))
        hull = Hull(future_cone(p, ctx).vertices)
        qs = rng.dirichlet(np.ones(4), 5000)
        codes = classify_many(qs, p, ctx)
        inside = hull.contains(qs, tol=1e-12)
        fut = (codes == Relation.FUTURE) | (codes == Relation.EQUIVALENT)
        assert np.array_equal(inside, fut)


class TestPastAndIncomparable:
    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
    def test_membership_matches_classify(self, rng, beta):
        for d in (3, 4):
            ctx = GibbsContext(tuple(range(d)), beta)
            p = rng.dirichlet(np.ones(d))
            qs = rng.dirichlet(np.ones(d), 4000)
            ref = classify_many(qs, p, ctx)
            ref[ref == Relation.EQUIVALENT] = Relation.FUTURE
            assert np.array_equal(incomparable_region(p, ctx).classify_points(qs), ref)

    def test_incomparable_region_on_dense_grid(self):
        ctx = GibbsContext.uniform(3)
        p = [0.6, 0.3, 0.1]
        grid = simplex_grid(3, 200)
        ref = classify_many(grid, p, ctx) == Relation.INCOMPARABLE
        assert np.array_equal(incomparable_region(p, ctx).contains(grid), ref)

    def test_exact_past_polytopes(self, rng):
        ctx = GibbsContext((0, 1, 2), 0.8)
        p = rng.dirichlet(np.ones(3))
        pieces, region = past_and_incomparable(p, ctx)
        qs = rng.dirichlet(np.ones(3), 4000)
        in_past = np.zeros(len(qs), dtype=bool)
        for piece in pieces:
            in_past |= Hull(piece.vertices).contains(qs, tol=1e-12)
        codes = classify_many(qs, p, ctx)
        assert np.array_equal(in_past, (codes == Relation.PAST) | (codes == Relation.EQUIVALENT))

    def test_past_vertex_inventory_at_beta_zero(self):
        ctx = GibbsContext.uniform(3)
        p = np.array([0.6, 0.3, 0.1])
        known = [np.eye(3), gibbs_edge_states(ctx)]
        for chamber in all_orders(3):
            for t in tangent_vectors_thermal(p, ctx, chamber):
                known.append(project_to_simplex(t)[None, :])
                known.append(future_vertices(t.entries, ctx, quasi=True))
        known = np.vstack(known)
        for chamber in all_orders(3):
            for v in past_chamber_vertices(p, ctx, chamber):
                r = _kernels.ratios(v, ctx.gibbs)
                on_wall = np.min(np.abs(np.subtract.outer(r, r))[~np.eye(3, dtype=bool)]) < 1e-9
                listed = np.min(np.abs(known - v).max(axis=1)) < 1e-9
                assert listed or on_wall or np.allclose(v, np.sort(p)[::-1][chamber.inverse])

    def test_non_full_rank_past_has_zero_volume(self):
        ctx = GibbsContext((0, 1, 2), 0.7)
        assert exact_past_volume([0.3, 0.7, 0.0], ctx) == pytest.approx(0.0, abs=1e-12)

    def test_gibbs_past_is_everything(self):
        ctx = GibbsContext((0, 1, 2), 1.1)
        assert exact_past_volume(ctx.gibbs, ctx) == pytest.approx(1.0, abs=1e-9)

    def test_dimension_guard(self):
        with pytest.raises(ValidationError):
            past_and_incomparable(np.ones(5) / 5, GibbsContext.uniform(5))

    def test_hull_extremes_are_subset_of_union(self):
        ctx = GibbsContext((0, 2, 3), 0.5)
        p = [0.7, 0.2, 0.1]
        for chamber in all_orders(3):
            ts = tangent_vectors_thermal(p, ctx, chamber)
            for i in (1, 2):
                ext = tangent_hull_extremes(p, ctx, chamber, i)
                pool = np.vstack([future_vertices(ts[i - 1].entries, ctx, quasi=True),
                                  future_vertices(ts[i].entries, ctx, quasi=True)])
                for e in ext:
                    assert np.min(np.abs(pool - e).max(axis=1)) < 1e-12


class TestBetaSwap:
    def test_uniform_is_transposition(self):
        assert np.allclose(beta_swap([0.8, 0.2], GibbsContext.uniform(2), 1), [0.2, 0.8])

    def test_gibbs_fixed(self):
        ctx = GibbsContext((0, 1, 2), 1.0)
        assert np.allclose(beta_swap(ctx.gibbs, ctx, 2), ctx.gibbs)

    def test_in_future(self):
        ctx = GibbsContext((0, 1, 2), 1.0)
        p = [0.7, 0.2, 0.1]
        out = beta_swap(p, ctx, 1)
        assert np.all(out >= 0) and out.sum() == pytest.approx(1.0)
        assert thermomajorises(p, out, ctx)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.floats(0.0, 3.0))
    def test_swap_always_in_future(self, seed, k, beta):
        ctx = GibbsContext((0, 0.5, 1.0, 2.0), beta)
        p = np.random.default_rng(seed).dirichlet(np.ones(4))
        assert thermomajorises(p, beta_swap(p, ctx, k), ctx)

    def test_bad_level(self):
        with pytest.raises(ValidationError):
            beta_swap([0.5, 0.5], GibbsContext.uniform(2), 0)


def test_relative_volume_of_simplex():
    assert relative_volume(np.eye(4)) == pytest.approx(1.0)
    assert relative_volume(np.eye(3)) == pytest.approx(1.0)


def test_infinite_beta_past_is_convex(rng):
    ctx = GibbsContext((0, 1, 2), math.inf)
    p = np.array([0.5, 0.3, 0.2])
    qs = rng.dirichlet(np.ones(3), 3000)
    past = qs[classify_many(qs, p, ctx) == Relation.PAST]
    for _ in range(300):
        a, b = past[rng.integers(len(past), size=2)]
        lam = rng.random()
        assert classify(lam * a + (1 - lam) * b, p, ctx) in (Relation.PAST, Relation.EQUIVALENT)
