import numpy as np
import pytest

from duelbench import structure as st
from duelbench.instances import RankingSpec, appendix_example, ranking_duel
from duelbench.minimax import best_minimax_welfare, worst_minimax_welfare
from duelbench.model import MixedStrategy


def _instance(seed, n=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(3, 6))
    p = rng.dirichlet(np.ones(n))
    return ranking_duel(RankingSpec.explicit(p, np.sort(rng.random(n))[::-1]))


def test_appendix_all_checks_pass():
    g, xs = appendix_example()
    rep = st.structure_report(g, xs)
    assert set(rep) == {"swap", "pair_order", "interval_cover", "h_bounds", "quarter"}
    assert all(row["fail"] == 0 for row in rep.values())


def test_pair_stats():
    g, xs = appendix_example()
    s = st.pair_order_stats(g, xs, 0, 1)
    assert s.a_above == pytest.approx(0.5) and s.b_above == pytest.approx(0.5)
    assert s.marg_a.sum() == pytest.approx(1)


@pytest.mark.parametrize("seed", range(12))
def test_minimax_strategies_pass(seed):
    g = _instance(seed)
    for solver in (worst_minimax_welfare, best_minimax_welfare):
        _, x = solver(g)
        rep = st.structure_report(g, x)
        assert all(row["fail"] == 0 for row in rep.values()), rep


def test_non_minimax_strategy_caught():
    # putting the least likely page first is far from minimax
    g = _instance(0, n=4)
    order = tuple(range(g.n))[::-1]
    x = MixedStrategy.pure(g.m, g.index_of(order))
    rep = st.structure_report(g, x)
    assert rep["pair_order"]["fail"] > 0
    assert rep["quarter"]["fail"] > 0


def test_interval_cover_disjoint():
    g = _instance(5, n=5)
    _, x = worst_minimax_welfare(g)
    for a in range(g.n):
        for b in range(a + 1, g.n):
            cov = st.interval_cover(g, x, a, b)
            assert cov.ok
            for lo, hi in cov.intervals:
                assert lo < hi


def test_quarter_response_lifts_page():
    g, xs = appendix_example()
    from duelbench.instances import ranking_positions, ranking_spec

    alpha = 2.0  # only the top slot qualifies
    y = st.quarter_response(g, xs, 2, alpha)
    pos = ranking_positions(g)
    f = ranking_spec(g).f
    assert y.weights @ (f[pos[:, 2]] >= alpha) == pytest.approx(1)


def test_swap_requires_ordered_pair():
    g, xs = appendix_example()
    with pytest.raises(ValueError):
        st.check_swap_inequality(g, xs, 2, 0, int(xs.support()[0]))
