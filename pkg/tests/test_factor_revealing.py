from fractions import Fraction

import numpy as np
import pytest

from duelbench import factor_revealing as fr
from duelbench.instances import RankingSpec, ranking_duel
from duelbench.minimax import worst_minimax_welfare


def test_identity_small_cases():
    for n in range(2, 12):
        for a in range(1, n):
            for k in range(2, n + 1):
                assert fr.zibaeq_identity(n, a, k)[2]


def test_khat_grid_holds():
    ok, worst = fr.khat_grid(400)
    assert ok and worst >= 0


def test_khat_point_checks():
    assert fr.check_khat(0.5, 0.25)
    with pytest.raises(ValueError):
        fr.check_khat(0.2, 0.5)


def test_alpha_two_matches_scan():
    assert fr.alpha_k(2) == pytest.approx(1 / 2.1, abs=1e-9)
    assert fr.alpha_2_scan(1e-4) == pytest.approx(fr.alpha_k(2), abs=1e-4)


def test_alpha_curve_monotone():
    curve = fr.alpha_curve(8)
    vals = [a for _, a in curve]
    assert [k for k, _ in curve] == list(range(2, 9))
    assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


def test_lp4_pieces_active():
    sol = fr.solve_lp4(6)
    assert fr.lp4_active_pieces(6, sol)


def test_lp5_dual_matches_primal():
    from duelbench import lp as lpc

    primal = fr.alpha_k(5)
    dual = lpc.solve(fr.build_dual_lp5(5, exact=False)).objective
    assert dual == pytest.approx(primal, abs=1e-7)


def test_published_table_shape():
    k = fr.PUBLISHED_K
    y = fr.published_dual_point()
    lp4 = fr.build_lp4(k)
    assert len(y) == lp4.n_rows
    assert y[0] == Fraction(fr.PUBLISHED_THETA)


def test_published_certificate_report():
    rep = fr.verify_paper_certificate()
    assert rep.exact and rep.seconds < 1
    assert rep.negative_entries == 0
    # the published point is close to, but not exactly, feasible
    assert rep.max_residual < 1e-6
    assert rep.rigorous_bound >= Fraction("0.612")


def test_exact_optimum_certifies_itself():
    from duelbench import lp as lpc

    sol = lpc.solve(fr.build_lp4(3), "exact")
    rep = fr.check_dual_point(3, tuple(sol.y))
    assert rep.valid and rep.max_residual == 0
    assert rep.theta == sol.objective


def test_perturbed_dual_rejected():
    from duelbench import lp as lpc

    y = list(lpc.solve(fr.build_lp4(3), "exact").y)
    y[0] += Fraction(1, 100)
    assert not fr.check_dual_point(3, tuple(y)).valid


def test_mp2_points_map_into_lp4():
    rng = np.random.default_rng(2)
    for k in (3, 5):
        alpha = fr.alpha_k(k)
        for _ in range(20):
            p, h = fr.sample_mp2_point(k, rng)
            p4, h4, ratio = fr.mp2_to_lp4(p, h)
            assert fr.lp4_feasible(p4, h4, 1e-9)
            assert ratio >= alpha - 1e-9


def test_aggregation_on_minimax_strategy():
    rng = np.random.default_rng(4)
    spec = RankingSpec.linear(rng.dirichlet(np.ones(5)))
    g = ranking_duel(spec)
    _, x = worst_minimax_welfare(g)
    sub, total = fr.aggregation_check(g, x, 3)
    assert total >= sub - 1e-12
    assert sub >= fr.alpha_k(3) - 1e-7


def test_zero_dual_point_feasible():
    rep = fr.check_dual_point(fr.PUBLISHED_K, fr.dual_point_lp4(fr.PUBLISHED_K, 0))
    assert rep.valid and rep.theta == 0


def test_mutated_table_rejected():
    beta = dict(fr.PUBLISHED_BETA)
    beta[1, 2] = "2"
    y = fr.dual_point_lp4(fr.PUBLISHED_K, fr.PUBLISHED_THETA, beta, None, fr.PUBLISHED_LAMBDA, fr.PUBLISHED_RHO)
    rep = fr.check_dual_point(fr.PUBLISHED_K, y)
    assert not rep.valid and rep.max_residual > 0.5
    y = list(fr.published_dual_point())
    y[1] += Fraction(1, 10)
    assert fr.check_dual_point(fr.PUBLISHED_K, tuple(y)).max_residual > 0.09


def test_published_certificate_feasible():
    # the published point as printed; see the notes on its rounding residual
    rep = fr.verify_paper_certificate()
    assert rep.valid, rep.violations


def test_weak_duality_against_published_theta():
    assert fr.alpha_k(10) >= float(Fraction(fr.PUBLISHED_THETA)) - 1e-9


def test_alpha_10_anchor():
    a = fr.alpha_k(10)
    assert 0.612 <= a < 1


def test_aggregation_single_subset():
    from duelbench.instances import appendix_example

    g, xs = appendix_example()
    sub, total = fr.aggregation_check(g, xs, g.n)
    assert sub == pytest.approx(total, abs=1e-15)
    sub2, total2 = fr.aggregation_check(g, xs, 2)
    assert total2 >= sub2


def test_aggregation_n6():
    rng = np.random.default_rng(8)
    g = ranking_duel(RankingSpec.linear(rng.dirichlet(np.ones(6))))
    _, x = worst_minimax_welfare(g)
    for k in (2, 3, 4):
        sub, total = fr.aggregation_check(g, x, k)
        assert total >= sub - 1e-12
