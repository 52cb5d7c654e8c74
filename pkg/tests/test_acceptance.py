"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are repeated, in order, at the end of the pytest run.
"""

import math
import time
from fractions import Fraction

import numpy as np

from duelbench import factor_revealing as fr
from duelbench import minimax as mm
from duelbench import structure as st
from duelbench import zero_one as zo
from duelbench.instances import (
    RankingSpec,
    appendix_example,
    binary_search_duel,
    compression_duel_epsilon,
    footnote_example,
    ranking_duel,
)
from duelbench.model import MixedStrategy, guarantee, optimal_welfare, payoffs_vs_pure, social_welfare, utility

SEED = 20240601
VERDICTS: list[str] = []  # echoed in the terminal summary by conftest.py


def verdict(num: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {detail}"
    VERDICTS.append(line)
    print(line)
    assert ok, detail


def _rng(tag: int) -> np.random.Generator:
    return np.random.default_rng([SEED, tag])


def _random_n(rng, lo=2, hi=6) -> int:
    return int(rng.integers(lo, hi + 1))


def test_01_dual_certificate():
    start = time.perf_counter()
    rep = fr.verify_paper_certificate()
    elapsed = time.perf_counter() - start
    ok = rep.valid and rep.exact and rep.max_residual == 0 and rep.theta == Fraction("0.612275") and elapsed < 1
    verdict(1, ok, f"exact={rep.exact} theta={float(rep.theta)} max residual={rep.max_residual:.3e} "
                   f"time={elapsed:.3f}s rigorous bound={float(rep.rigorous_bound):.8f}")


def test_02_alpha_anchors():
    a10 = fr.alpha_k(10)
    start = time.perf_counter()
    a100 = fr.alpha_k(100)
    elapsed = time.perf_counter() - start
    ok = a10 >= 0.612 - 1e-6 and a100 >= 0.637 - 1e-6 and elapsed <= 600
    verdict(2, ok, f"alpha_10={a10:.9f} alpha_100={a100:.9f} (k=100 in {elapsed:.1f}s)")


# expected payoffs on the appendix-example instance: y -> (u(<a,c,b>, y), u(<b,c,a>, y), u(x*, y))
EXAMPLE_TABLE = {
    (0, 1, 2): (-0.2, 0.2, 0.0),
    (0, 2, 1): (0.0, 0.0, 0.0),
    (1, 0, 2): (0.2, -0.2, 0.0),
    (1, 2, 0): (0.0, 0.0, 0.0),
    (2, 0, 1): (0.2, -0.2, 0.0),
    (2, 1, 0): (-0.2, 0.2, 0.0),
}


def test_03_upper_bound_example():
    start = time.perf_counter()
    g, xs = appendix_example()
    acb = MixedStrategy.pure(g.m, g.index_of((0, 2, 1)))
    bca = MixedStrategy.pure(g.m, g.index_of((1, 2, 0)))
    rows_ok = True
    for y_order, expected in EXAMPLE_TABLE.items():
        y = MixedStrategy.pure(g.m, g.index_of(y_order))
        got = (utility(g, acb, y), utility(g, bca, y), utility(g, xs, y))
        rows_ok &= bool(np.allclose(got, expected, atol=1e-12))
    zero = bool(np.all(np.abs(payoffs_vs_pure(g, xs)) <= 1e-12))
    opt = optimal_welfare(g)[0]
    sw = social_welfare(g, xs)
    bound = sw / opt
    elapsed = time.perf_counter() - start
    ok = rows_ok and zero and abs(opt - 1.2) < 1e-12 and abs(sw - 1.0) < 1e-12 and bound <= 0.8334 and elapsed < 1
    verdict(3, ok, f"table rows match={rows_ok} all zero={zero} OPT={opt:.4f} SW(x*)={sw:.4f} "
                   f"PoC<={bound:.6f} time={elapsed:.3f}s")


def test_04_footnote_example():
    g = footnote_example()
    x = MixedStrategy.pure(g.m, g.index_of((0, 1, 2)))
    y = MixedStrategy.pure(g.m, g.index_of((1, 2, 0)))
    u = utility(g, x, y)
    lose = float(g.p[1] + g.p[2])
    verdict(4, abs(u + 0.30) < 1e-12 and abs(lose - 0.65) < 1e-12, f"u={u:+.4f} loss probability={lose:.2f}")


def test_05_zero_value():
    rng = _rng(5)
    worst = 0.0
    for _ in range(200):
        n = _random_n(rng)
        g = ranking_duel(RankingSpec.explicit(rng.dirichlet(np.ones(n)), rng.random(n) * 5))
        worst = max(worst, abs(mm.game_value(g)))
    verdict(5, worst <= 1e-8, f"max |value| over 200 instances = {worst:.2e}")


def test_06_cost_poc():
    rng = _rng(6)
    worst = 0.0
    for _ in range(200):
        n = _random_n(rng)
        spec = RankingSpec.linear(rng.dirichlet(np.ones(n)), c=rng.uniform(0.1, 3), d=rng.uniform(0, 3), mode="cost")
        worst = max(worst, mm.price_of_competition_cost(ranking_duel(spec)))
    verdict(6, worst <= 3 + 1e-6, f"max PoC_cost over 200 instances = {worst:.6f}")


def test_07_general_valuation():
    rng = _rng(7)
    min_poc, max_gap = math.inf, -math.inf
    for t in range(200):
        n = _random_n(rng)
        p = rng.dirichlet(np.ones(n))
        # arbitrary nonnegative vectors, some with ties and zeros
        f = rng.random(n) * rng.integers(1, 5)
        if t % 4 == 0:
            f = np.round(f, 1)
        g = ranking_duel(RankingSpec.explicit(p, f))
        worst, x = mm.worst_minimax_welfare(g)
        poc = mm._ratio(worst, optimal_welfare(g)[0])
        min_poc = min(min_poc, poc)
        max_gap = max(max_gap, zo.zero_one_bound(g, x) - poc)
    ok = min_poc >= 0.25 - 1e-6 and max_gap <= 1e-9
    verdict(7, ok, f"min PoC={min_poc:.6f}, max(zero_one_bound - PoC)={max_gap:.2e}")


def test_08_compression():
    details, ok = [], True
    for eps in (0.5, 0.1, 0.01):
        c = compression_duel_epsilon(eps)
        g = c.game
        row = g.payoff_rows(np.array([c.xstar_index]))[0]
        sw_x = float(g.pure_scores[c.xstar_index])
        sw_opt = float(g.pure_scores[c.opt_index])
        bound = sw_x / sw_opt
        good = (g.m == 120 and row.min() >= -1e-12 and abs(sw_x - eps / 16) < 1e-12
                and abs(sw_opt - (16 + eps) / 64) < 1e-12 and bound <= eps)
        ok &= bool(good)
        details.append(f"eps={eps}: min payoff={row.min():+.3g} bound={bound:.5f}")
    verdict(8, ok, "; ".join(details))


def test_09_binary_search():
    details, ok = [], True
    for tag, beta in enumerate((0.5, 0.25)):
        b = binary_search_duel(beta)
        D = b.sample_depths(_rng(90 + tag), 100_000)
        pay = b.payoffs(b.xstar_depths, D)
        cond = b.case_conditions()
        good = (pay.min() >= 0 and cond["root_one_outweighed"] and cond["xstar_depth_of_1_is_2"]
                and cond["xstar_root"] == cond["xstar_root_expected"] and cond["xstar_within_k_plus_2"]
                and b.poc_bound < beta)
        ok &= bool(good)
        details.append(f"beta={beta}: n={b.n} min sampled payoff={pay.min():+.4f} "
                       f"p1={cond['p1']:.3f}<{cond['deep_mass']:.3f} bound={b.poc_bound:.4f}")
    verdict(9, ok, "; ".join(details))


def test_10_oracle_equivalence():
    rng = _rng(10)
    gap = 0.0
    for _ in range(50):
        n = _random_n(rng, 2, 6)
        p = rng.dirichlet(np.ones(n))
        f = np.sort(rng.random(n) * 3)[::-1] + np.arange(n, 0, -1) * 1e-3
        spec = RankingSpec.explicit(p, f)
        explicit = mm.worst_minimax_welfare(ranking_duel(spec))[0]
        marginal = mm.ranking_minimax_marginal(spec)[0]
        gap = max(gap, abs(explicit - marginal))
    err = 0.0
    for _ in range(100):
        n = _random_n(rng, 2, 10)
        w = rng.dirichlet(np.ones(int(rng.integers(1, 12))))
        Q = sum(wi * np.eye(n)[rng.permutation(n)] for wi in w)
        err = max(err, float(np.abs(mm.reconstruct(mm.birkhoff_decompose(Q), n) - Q).max()))
    verdict(10, gap <= 1e-6 and err <= 1e-6, f"max value gap={gap:.2e}, max Birkhoff error={err:.2e}")


def test_11_identity_and_lemmas():
    ident = all(fr.zibaeq_identity(n, a, k)[2]
                for n in range(2, 21) for a in range(1, n) for k in range(2, n + 1))
    khat_ok, khat_worst = fr.khat_grid()
    rng = _rng(11)
    failures, instances, layer_err = 0, 0, 0.0
    while instances < 200:
        n = _random_n(rng, 2, 6)
        p = rng.dirichlet(np.ones(n))
        f = np.sort(rng.random(n) * 2)[::-1]
        g = ranking_duel(RankingSpec.explicit(p, f))
        solver = mm.worst_minimax_welfare if instances % 2 == 0 else mm.best_minimax_welfare
        _, x = solver(g)
        if guarantee(g, x) < -mm.MINIMAX_TOL:
            continue
        rep = st.structure_report(g, x)
        failures += sum(row["fail"] for row in rep.values())
        sw, layered = zo.layer_decomposition(g, x)
        layer_err = max(layer_err, abs(sw - layered))
        instances += 1
    ok = ident and khat_ok and failures == 0 and layer_err <= 1e-10
    verdict(11, ok, f"identity n<=20={ident} khat grid={khat_ok} (worst slack {khat_worst:.2e}) "
                    f"structure failures={failures}/{instances} instances layer error={layer_err:.1e}")


def test_12_linear_scale():
    rng = _rng(12)
    lowest = math.inf
    for _ in range(20):
        spec = RankingSpec.linear(rng.dirichlet(np.ones(10)), c=rng.uniform(0.5, 2), d=rng.uniform(0, 1))
        lowest = min(lowest, mm.price_of_competition_marginal(spec))
    verdict(12, lowest >= 0.612 - 1e-6, f"min PoC over 20 instances at n=10 = {lowest:.6f}")
