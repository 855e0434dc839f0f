import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermocone.probabilistic_cones import (
    ProbConeQuery,
    ProbRelation,
    critical_probabilities,
    critical_probability,
    hat_distribution,
    prob_classify,
    prob_classify_many,
    simplex_grid,
    tilde_distribution,
    vidal_probability,
    vidal_probability_many,
)
from thermocone.simplex_core import ValidationError, majorises

P_LEVELS = [1.0, 0.875, 0.75, 0.625, 0.5]


def brute_vidal(p, q):
    p, q = np.sort(p)[::-1], np.sort(q)[::-1]
    best = 1.0
    for k in range(len(p)):
        num, den = p[k:].sum(), q[k:].sum()
        if den > 1e-15:
            best = min(best, num / den)
    return best


class TestVidal:
    def test_identity(self):
        assert vidal_probability([0.5, 0.3, 0.2], [0.3, 0.2, 0.5]) == 1.0

    def test_example(self):
        assert vidal_probability([0.7, 0.2, 0.1], [0.5, 0.3, 0.2]) == pytest.approx(0.5)

    def test_sharp_target(self):
        assert vidal_probability([0.5, 0.3, 0.2], [1, 0, 0]) == 1.0

    def test_rank_increase_impossible(self):
        assert vidal_probability([1, 0, 0], [0.5, 0.3, 0.2]) == 0.0

    def test_matches_brute_force(self, rng):
        ps, qs = rng.dirichlet(np.ones(4), (2, 200))
        for p, q in zip(ps, qs):
            assert vidal_probability(p, q) == pytest.approx(brute_vidal(p, q), abs=1e-12)

    def test_vectorised_reverse(self, rng):
        p = rng.dirichlet(np.ones(3))
        qs = rng.dirichlet(np.ones(3), 50)
        rev = vidal_probability_many(p, qs, reverse=True)
        assert np.allclose(rev, [vidal_probability(q, p) for q in qs])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_certain_iff_majorised(self, seed):
        rng = np.random.default_rng(seed)
        p, q = rng.dirichlet(np.ones(3), 2)
        assert (vidal_probability(p, q) >= 1 - 1e-12) == majorises(q, p)


class TestAuxiliary:
    def test_tilde_example(self):
        assert np.allclose(tilde_distribution([0.7, 0.2, 0.1], 0.5), [0.85, 0.1, 0.05])

    def test_tilde_and_hat_at_one(self, rng):
        p = rng.dirichlet(np.ones(4))
        assert np.allclose(tilde_distribution(p, 1.0), np.sort(p)[::-1])
        assert np.allclose(hat_distribution(p, 1.0), np.sort(p)[::-1])

    def test_tilde_limit(self):
        assert np.allclose(tilde_distribution([0.4, 0.3, 0.3], 1e-12), [1, 0, 0], atol=1e-9)

    def test_critical_values(self):
        assert np.allclose(critical_probabilities([0.7, 0.2, 0.1]), [1.0, 0.5, 0.3])

    def test_hat_flattening(self):
        h = hat_distribution([0.7, 0.2, 0.1], 0.4)
        assert np.allclose(h, [0.375, 0.375, 0.25])
        assert np.allclose(hat_distribution([0.7, 0.2, 0.1], 0.25), 1 / 3)

    def test_hat_head_decreases(self):
        P = 0.99
        assert hat_distribution([0.7, 0.2, 0.1], P)[0] == pytest.approx(0.7 / P + 1 - 1 / P)
        assert hat_distribution([0.7, 0.2, 0.1], P)[0] <= 0.7

    @pytest.mark.parametrize("P", [0.9, 0.6, 0.45, 0.31, 0.2])
    def test_hat_sorted_and_flattened_by_critical_rule(self, P):
        p = np.array([0.7, 0.2, 0.1])
        h = hat_distribution(p, P)
        assert np.all(np.diff(h) <= 1e-12) and h.sum() == pytest.approx(1.0)
        crit = critical_probabilities(p)
        n = max([k + 1 for k in range(3) if P < crit[k]], default=1)
        assert np.allclose(h[:n], h[:n].mean())

    def test_bad_probability(self):
        with pytest.raises(ValidationError):
            tilde_distribution([0.5, 0.5], 0.0)
        with pytest.raises(ValidationError):
            ProbConeQuery(np.array([0.5, 0.5]), 1.5)


class TestRegions:
    def test_identity_interconvertible(self):
        q = ProbConeQuery(np.array([0.7, 0.2, 0.1]), 1.0)
        assert prob_classify([0.7, 0.2, 0.1], q) == ProbRelation.INTERCONVERTIBLE
        assert prob_classify([0.1, 0.7, 0.2], q) == ProbRelation.INTERCONVERTIBLE

    def test_uniform_never_future_only(self):
        for P in P_LEVELS:
            rel = prob_classify([1 / 3] * 3, ProbConeQuery(np.array([0.7, 0.2, 0.1]), P))
            assert rel in (ProbRelation.PAST, ProbRelation.INTERCONVERTIBLE)

    def test_nesting(self):
        grid = simplex_grid(3, 60)
        p = np.array([0.7, 0.2, 0.1])
        prev = None
        for P in P_LEVELS:
            c = prob_classify_many(grid, ProbConeQuery(p, P))
            fut = np.isin(c, [ProbRelation.FUTURE, ProbRelation.INTERCONVERTIBLE])
            past = np.isin(c, [ProbRelation.PAST, ProbRelation.INTERCONVERTIBLE])
            inc = c == ProbRelation.INCOMPARABLE
            if prev is not None:
                assert np.all(prev[0] <= fut) and np.all(prev[1] <= past) and np.all(inc <= prev[2])
            prev = (fut, past, inc)

    def test_interconvertible_nonempty(self):
        grid = simplex_grid(3, 60)
        for P in P_LEVELS[1:]:
            c = prob_classify_many(grid, ProbConeQuery(np.array([0.7, 0.2, 0.1]), P))
            assert np.any(c == ProbRelation.INTERCONVERTIBLE)

    def test_incomparable_set_empties_at_low_probability(self):
        grid = simplex_grid(3, 60)
        c = prob_classify_many(grid, ProbConeQuery(np.array([0.7, 0.2, 0.1]), 0.5))
        assert not np.any(c == ProbRelation.INCOMPARABLE)
        P_star = critical_probability([0.7, 0.2, 0.1], grid)
        assert 0.5 < P_star < 0.625

    def test_future_iff_vidal(self, rng):
        ps, qs = rng.dirichlet(np.ones(3), (2, 2000))
        for P in (0.3, 0.7):
            for p, q in zip(ps, qs):
                rel = prob_classify(q, ProbConeQuery(p, P))
                in_future = rel in (ProbRelation.FUTURE, ProbRelation.INTERCONVERTIBLE)
                assert in_future == (vidal_probability(p, q) >= P)
                in_past = rel in (ProbRelation.PAST, ProbRelation.INTERCONVERTIBLE)
                assert in_past == (vidal_probability(q, p) >= P)


def test_simplex_grid_counts():
    assert len(simplex_grid(3, 10)) == 66
    g4 = simplex_grid(4, 6)
    assert len(g4) == 84 and np.allclose(g4.sum(axis=1), 1)
