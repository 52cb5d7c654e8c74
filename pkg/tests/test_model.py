import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as hst

from duelbench.instances import appendix_example, footnote_example, orderings
from duelbench.model import (
    DuelInstance,
    MixedStrategy,
    guarantee,
    optimal_welfare,
    payoffs_vs_pure,
    social_cost,
    social_welfare,
    utility,
    utility_omega,
)


def test_footnote_utility():
    g = footnote_example()
    x, y = g.index_of((0, 1, 2)), g.index_of((1, 2, 0))
    assert utility(g, MixedStrategy.pure(g.m, x), MixedStrategy.pure(g.m, y)) == pytest.approx(-0.30, abs=1e-12)
    # page 1 is the only request the planner wins
    assert utility_omega(g, MixedStrategy.pure(g.m, x), MixedStrategy.pure(g.m, y), 0) == 1


def test_appendix_xstar_guarantee():
    g, xs = appendix_example()
    assert np.all(np.abs(payoffs_vs_pure(g, xs)) < 1e-12)
    assert social_welfare(g, xs) == pytest.approx(1.0)
    assert optimal_welfare(g)[0] == pytest.approx(1.2)


def test_payoff_matrix_antisymmetric():
    g = footnote_example()
    U = g.payoff_matrix
    assert np.array_equal(U, -U.T)


def test_utility_antisymmetric_random():
    rng = np.random.default_rng(3)
    g = footnote_example()
    for _ in range(20):
        x = MixedStrategy(rng.dirichlet(np.ones(g.m)))
        y = MixedStrategy(rng.dirichlet(np.ones(g.m)))
        assert utility(g, x, y) == -utility(g, y, x)
        assert utility(g, x, x) == 0


def test_cost_mode_prefers_lower():
    g = DuelInstance([0.5, 0.5], [[1, 2], [2, 1]], mode="cost")
    x, y = MixedStrategy.pure(2, 0), MixedStrategy.pure(2, 1)
    assert utility_omega(g, x, y, 0) == 1
    assert utility(g, x, y) == 0
    assert social_cost(g, x) == pytest.approx(1.5)


def test_strategy_validation():
    with pytest.raises(ValueError):
        MixedStrategy(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        DuelInstance([0.5, 0.6], [[1, 0]])
    assert guarantee(footnote_example(), MixedStrategy.uniform(6)) <= 1e-12
    assert len(orderings(3)) == 6



@settings(max_examples=50, deadline=None)
@given(p=hst.lists(hst.floats(0.01, 1.0), min_size=3, max_size=3),
       wx=hst.lists(hst.floats(0, 1), min_size=6, max_size=6),
       wy=hst.lists(hst.floats(0, 1), min_size=6, max_size=6))
def test_utility_antisymmetry_property(p, wx, wy):
    from duelbench.instances import RankingSpec, ranking_duel

    assume(sum(wx) > 0.1 and sum(wy) > 0.1)
    g = ranking_duel(RankingSpec.linear(np.array(p) / sum(p)))
    x = MixedStrategy(np.array(wx) / sum(wx))
    y = MixedStrategy(np.array(wy) / sum(wy))
    assert utility(g, x, y) == -utility(g, y, x)
    assert abs(utility(g, x, y)) <= 1 + 1e-12
