"""Executable checks of the structural facts about minimax ranking strategies.

All positions here are 0-based; "a above b" means a smaller position index.
Pages are indices into the (descending) probability vector of the game.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .instances import ranking_positions, ranking_spec
from .model import SUPPORT_TOL, DuelInstance, MixedStrategy, utility
from .zero_one import TriggerView, pseudo_welfare

SLACK_TOL = 1e-8


def _weights(x) -> np.ndarray:
    return x.weights if isinstance(x, MixedStrategy) else np.asarray(x, dtype=float)


@dataclass
class PairOrderStats:
    """Order statistics of pages ``a`` and ``b`` under a mixed ranking strategy."""

    a: int
    b: int
    a_above: float  # Pr[pos(a) < pos(b)]
    b_above: float
    marg_a: np.ndarray  # Pr[pos(a) = i]
    marg_b: np.ndarray
    n_ab: list  # support indices with a above b
    n_ba: list


def pair_order_stats(g: DuelInstance, x, a: int, b: int) -> PairOrderStats:
    pos = ranking_positions(g)
    w = _weights(x)
    support = np.flatnonzero(w > SUPPORT_TOL)
    n_ab = [int(s) for s in support if pos[s, a] < pos[s, b]]
    n_ba = [int(s) for s in support if pos[s, b] < pos[s, a]]
    marg_a = np.bincount(pos[support, a], weights=w[support], minlength=g.n)
    marg_b = np.bincount(pos[support, b], weights=w[support], minlength=g.n)
    return PairOrderStats(a, b, float(w[n_ab].sum()), float(w[n_ba].sum()), marg_a, marg_b, n_ab, n_ba)


@dataclass
class CheckResult:
    ok: bool
    slack: float
    vacuous: bool = False
    note: str = ""


# ---------------------------------------------------------------- swap inequality


def _window(marg: np.ndarray, i: int, j: int) -> float:
    # Pr[i < pos <= j] + Pr[i <= pos < j]
    return float(marg[i + 1:j + 1].sum() + marg[i:j].sum())


def swap_sides(g: DuelInstance, x, a: int, b: int, s_ba: int) -> tuple[float, float]:
    """Both sides of the swap inequality for support ordering ``s_ba`` (b above a there).

    ``i`` is b's position and ``j`` is a's position in ``s_ba``.
    """
    pos = ranking_positions(g)
    i, j = int(pos[s_ba, b]), int(pos[s_ba, a])
    st = pair_order_stats(g, x, a, b)
    return _window(st.marg_b, i, j), g.p[a] / g.p[b] * _window(st.marg_a, i, j)


def check_swap_inequality(g: DuelInstance, x, a: int, b: int, s_ba: int,
                          tol: float = SLACK_TOL) -> CheckResult:
    """Check one instance of the swap inequality.

    Also evaluates the literal alternate assignment (i at a, j at b); since
    that makes both windows empty it can only turn a failure into a pass,
    which is recorded in ``note``.
    """
    pos = ranking_positions(g)
    w = _weights(x)
    if g.p[a] < g.p[b]:
        raise ValueError("need p_a >= p_b")
    if w[s_ba] <= SUPPORT_TOL or not pos[s_ba, b] < pos[s_ba, a]:
        raise ValueError("s_ba must be a support ordering with b above a")
    if g.p[b] == 0:
        return CheckResult(True, 0.0, vacuous=True, note="p_b = 0")
    lhs, rhs = swap_sides(g, x, a, b, s_ba)
    slack = lhs - rhs
    ok = slack >= -tol
    note = "" if ok else "alternate reading would pass"
    return CheckResult(ok, slack, note=note)


def swap_candidates(g: DuelInstance, x) -> list[tuple[int, int, int]]:
    """Every ``(a, b, s_ba)`` with ``p_a >= p_b > 0``, ``a != b`` and b above a in ``s_ba``."""
    pos = ranking_positions(g)
    w = _weights(x)
    out = []
    for s in np.flatnonzero(w > SUPPORT_TOL):
        for a in range(g.n):
            for b in range(g.n):
                if a != b and g.p[a] >= g.p[b] > 0 and pos[s, b] < pos[s, a]:
                    out.append((a, b, int(s)))
    return out


# ---------------------------------------------------------------- interval cover


@dataclass
class IntervalCover:
    """Orderings chosen by the greedy cover of b-above-a intervals."""

    a: int
    b: int
    chosen: list  # support indices, in selection order
    intervals: list  # [pos_b, pos_a] of each chosen ordering
    disjoint: bool = True
    covers: bool = True
    r_b_max: int = 0  # max over support of sum over chosen of r_b
    R: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.disjoint and self.covers and self.r_b_max <= 2


def _r(p_c: int, lo: int, hi: int) -> int:
    if lo < p_c < hi:
        return 2
    if p_c == lo or p_c == hi:
        return 1
    return 0


def interval_cover(g: DuelInstance, x, a: int, b: int) -> IntervalCover:
    """Greedy selection: take the b-above-a ordering with a at the largest position, drop overlaps, repeat.

    Ties on a's position are broken by support index.  Also evaluates the
    aggregates ``R_c^{ab}``, ``R_c^{ba}`` for ``c in {a, b}``.
    """
    pos = ranking_positions(g)
    w = _weights(x)
    st = pair_order_stats(g, x, a, b)
    pool = list(st.n_ba)
    chosen, intervals = [], []
    while pool:
        s = max(pool, key=lambda t: (pos[t, a], -t))
        lo, hi = int(pos[s, b]), int(pos[s, a])
        chosen.append(s)
        intervals.append((lo, hi))
        pool = [t for t in pool if pos[t, a] < lo or pos[t, b] > hi]
    disjoint = all(
        intervals[u][1] < intervals[v][0] or intervals[v][1] < intervals[u][0]
        for u in range(len(intervals)) for v in range(u + 1, len(intervals))
    )
    covers = all(any(lo <= pos[t, a] <= hi for lo, hi in intervals) for t in st.n_ba)
    support = st.n_ab + st.n_ba
    r_b_max = max((sum(_r(int(pos[t, b]), lo, hi) for lo, hi in intervals) for t in support), default=0)
    R = {}
    for label, group in (("ab", st.n_ab), ("ba", st.n_ba)):
        for c, name in ((a, "a"), (b, "b")):
            R[f"{name}^{label}"] = float(sum(
                w[t] * _r(int(pos[t, c]), lo, hi) for t in group for lo, hi in intervals
            ))
    return IntervalCover(a, b, chosen, intervals, disjoint, covers, r_b_max, R)


def check_cover_aggregates(g: DuelInstance, x, a: int, b: int, tol: float = SLACK_TOL) -> CheckResult:
    """The chain of aggregate inequalities that turns the swap inequalities into the pair-order bound."""
    cov = interval_cover(g, x, a, b)
    st = pair_order_stats(g, x, a, b)
    R = cov.R
    if g.p[b] == 0:
        return CheckResult(True, 0.0, vacuous=True, note="p_b = 0")
    ratio = g.p[a] / g.p[b]
    slacks = [
        R["b^ab"] + R["b^ba"] - ratio * (R["a^ab"] + R["a^ba"]),
        2 * st.b_above - R["b^ba"],
        2 * st.a_above - R["b^ab"],
        R["a^ba"] - st.b_above,
        2 * R["a^ba"] - R["b^ba"],
    ]
    worst = min(slacks)
    return CheckResult(bool(cov.ok and worst >= -tol), worst)


# ---------------------------------------------------------------- pairwise bounds


def check_pair_order(g: DuelInstance, x, a: int, b: int, tol: float = SLACK_TOL) -> CheckResult:
    """``Pr[a above b] >= (p_a / (2 p_b) - 1) Pr[b above a]`` for ``p_a >= p_b``."""
    if g.p[a] < g.p[b]:
        raise ValueError("need p_a >= p_b")
    if g.p[b] == 0:
        return CheckResult(True, 0.0, vacuous=True, note="p_b = 0")
    st = pair_order_stats(g, x, a, b)
    slack = st.a_above - (g.p[a] / (2 * g.p[b]) - 1) * st.b_above
    return CheckResult(slack >= -tol, slack)


def h_value(g: DuelInstance, x, a: int, b: int) -> float:
    st = pair_order_stats(g, x, a, b)
    return float(g.p[a] * st.a_above + g.p[b] * st.b_above)


def check_h_bounds(g: DuelInstance, x, a: int, b: int, tol: float = SLACK_TOL) -> CheckResult:
    """``h_ab >= max{p_b, p_a - 2 p_b + 2 p_b^2 / p_a}`` for ``p_a >= p_b``."""
    pa, pb = g.p[a], g.p[b]
    if pa < pb:
        raise ValueError("need p_a >= p_b")
    if pa == 0:
        return CheckResult(True, 0.0, vacuous=True, note="p_a = 0")
    slack = h_value(g, x, a, b) - max(pb, pa - 2 * pb + 2 * pb * pb / pa)
    return CheckResult(slack >= -tol, slack)


# ---------------------------------------------------------------- quarter bound


def quarter_response(g: DuelInstance, x, i: int, alpha: float) -> MixedStrategy:
    """Reply that lifts page ``i`` into a position worth at least ``alpha``.

    Each ordering drawn from ``x`` is kept if ``i`` already sits in such a
    position; otherwise ``i`` swaps with a uniformly chosen page from one of
    the ``k`` good positions.
    """
    spec = ranking_spec(g)
    good = np.flatnonzero(spec.f >= alpha)
    k = good.size
    if k == 0:
        raise ValueError("no position reaches the threshold")
    w = _weights(x)
    out = np.zeros(g.m)
    for s in np.flatnonzero(w > 0):
        order = list(g.catalog[s])
        pos_i = order.index(i)
        if spec.f[pos_i] >= alpha:
            out[s] += w[s]
            continue
        for j in good:
            swapped = order.copy()
            swapped[pos_i], swapped[j] = swapped[j], swapped[pos_i]
            out[g.index_of(tuple(swapped))] += w[s] / k
    return MixedStrategy(out)


@dataclass
class QuarterReport:
    ok: bool
    k: int
    inequality_slack: float  # min over i of rhs - lhs
    response_slack: float  # min over i of u(x, x'_i)
    ratio: float  # pseudo-welfare of x over that of OPT
    q: np.ndarray = field(repr=False, default=None)


def check_quarter_inequalities(g: DuelInstance, x, alpha: float, tol: float = SLACK_TOL) -> QuarterReport:
    """Per-page inequality ``p_i (1 - q_i)^2 <= sum_w 2 p_w q_w / k`` for the top ``k`` pages.

    Also plays each constructed reply against ``x`` and evaluates the
    implied pseudo-welfare ratio, which must be at least 1/4.
    """
    spec = ranking_spec(g)
    k = int((spec.f >= alpha).sum())
    if k < 1:
        raise ValueError("threshold leaves no qualifying position")
    pos = ranking_positions(g)
    w = _weights(x)
    good = (spec.f[pos] >= alpha).astype(float)  # good[s, page]
    q = w @ good
    rhs = 2 * float(g.p @ q) / k
    ineq = min(rhs - g.p[i] * (1 - q[i]) ** 2 for i in range(k))
    resp = min(utility(g, x, quarter_response(g, x, i, alpha)) for i in range(k))
    view = TriggerView(g, alpha)
    opt = float(view.pure_pseudo.max())
    ratio = 1.0 if opt == 0 else pseudo_welfare(view, x) / opt
    ok = ineq >= -tol and resp >= -tol and ratio >= 0.25 - tol
    return QuarterReport(bool(ok), k, float(ineq), float(resp), float(ratio), q)


# ---------------------------------------------------------------- aggregate report


def structure_report(g: DuelInstance, x, tol: float = SLACK_TOL) -> dict:
    """Run every checker on a strategy; returns check name -> {pass, fail, vacuous, worst_slack}."""
    spec = ranking_spec(g)
    out: dict[str, dict] = {}

    def record(name, res: CheckResult):
        row = out.setdefault(name, {"pass": 0, "fail": 0, "vacuous": 0, "worst_slack": None,
                                    "alternate_reading_changes_verdict": 0})
        if res.vacuous:
            row["vacuous"] += 1
            return
        row["pass" if res.ok else "fail"] += 1
        if res.note == "alternate reading would pass":
            row["alternate_reading_changes_verdict"] += 1
        if row["worst_slack"] is None or res.slack < row["worst_slack"]:
            row["worst_slack"] = float(res.slack)

    strict = spec.rank_monotone and spec.mode == "welfare"
    if strict:
        for a, b, s in swap_candidates(g, x):
            record("swap", check_swap_inequality(g, x, a, b, s, tol))
    for a in range(g.n):
        for b in range(g.n):
            if a == b or g.p[a] < g.p[b] or (g.p[a] == g.p[b] and a > b):
                continue
            if strict:
                record("pair_order", check_pair_order(g, x, a, b, tol))
                record("interval_cover", check_cover_aggregates(g, x, a, b, tol))
                record("h_bounds", check_h_bounds(g, x, a, b, tol))
    if spec.mode == "welfare":
        for alpha in np.unique(spec.f):
            if alpha <= 0:
                continue
            rep = check_quarter_inequalities(g, x, float(alpha), tol)
            record("quarter", CheckResult(rep.ok, min(rep.inequality_slack, rep.response_slack)))
    for row in out.values():
        if not row["alternate_reading_changes_verdict"]:
            del row["alternate_reading_changes_verdict"]
    return out
