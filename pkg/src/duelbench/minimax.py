"""Minimax strategies, the price of competition and the marginal-form ranking solver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import lp as lpc
from .instances import CapExceeded, RankingSpec, ranking_positions
from .model import (
    DuelInstance,
    MixedStrategy,
    ModeError,
    guarantee,
    optimal_cost,
    optimal_welfare,
)

MINIMAX_TOL = 1e-8
MARGINAL_TOL = 1e-9
BIRKHOFF_INPUT_TOL = 1e-7
BIRKHOFF_ZERO = 1e-10

# explicit LPs need the dense m x m payoff matrix
EXPLICIT_STRATEGY_CAP = 2000


class NonMonotoneValuation(ValueError):
    """The marginal path needs value strictly monotone in position."""


def matrix_game_value(A: np.ndarray, method: str = "auto") -> tuple[float, np.ndarray]:
    """Value and a maximin row strategy of the zero-sum game with row payoffs ``A``.

    Solves ``max v  s.t.  x^T A[:, t] >= v  for all t,  sum x = 1,  x >= 0``.
    """
    A = np.asarray(A, dtype=float)
    m, k = A.shape
    b = lpc.LpBuilder()
    xs = [b.add_var(f"x{s}") for s in range(m)]
    v = b.add_var("v", lower=None, cost=1)
    for t in range(k):
        row = {xs[s]: A[s, t] for s in np.flatnonzero(A[:, t])}
        row[v] = -1
        b.add_row(row, ">=", 0, f"vs{t}")
    b.add_row({j: 1 for j in xs}, "=", 1, "simplex")
    sol = lpc.solve(b.build("max"), method)
    if sol.status != "optimal":
        raise lpc.LpError(f"matrix game LP returned {sol.status}")
    return float(sol.objective), np.clip(sol.x[:m], 0, None)


def _explicit_ok(g: DuelInstance):
    if g.m > EXPLICIT_STRATEGY_CAP:
        hint = "; use ranking_minimax_marginal" if g.meta.get("kind") == "ranking" else ""
        raise CapExceeded(f"explicit minimax LP with {g.m} pure strategies{hint}",
                          g.m, EXPLICIT_STRATEGY_CAP)


def game_value(g: DuelInstance, method: str = "auto") -> float:
    """Value of the duel to player A (zero for every symmetric duel)."""
    _explicit_ok(g)
    return matrix_game_value(g.payoff_matrix, method)[0]


@dataclass(frozen=True, eq=False)
class MinimaxPolytope:
    """The set of minimax strategies of a duel, in explicit form.

    Because the game is symmetric with value 0, ``x`` is minimax exactly when
    ``x^T U[:, t] >= 0`` for every pure ``t``.
    """

    game: DuelInstance

    def contains(self, x, tol: float = MINIMAX_TOL) -> bool:
        return guarantee(self.game, x) >= -tol

    def lp(self, objective: np.ndarray, sense: str) -> lpc.LinearProgram:
        g = self.game
        _explicit_ok(g)
        U = g.payoff_matrix
        b = lpc.LpBuilder()
        for s in range(g.m):
            b.add_var(f"x{s}", cost=float(objective[s]))
        for t in range(g.m):
            nz = np.flatnonzero(U[:, t])
            if nz.size:
                b.add_row(dict(zip(nz.tolist(), U[nz, t].tolist())), ">=", 0, f"vs{t}")
        b.add_row({s: 1 for s in range(g.m)}, "=", 1, "simplex")
        return b.build(sense)

    def optimize(self, objective: np.ndarray, sense: str, method: str = "auto"):
        sol = lpc.solve(self.lp(objective, sense), method)
        if sol.status != "optimal":
            raise lpc.LpError(f"minimax LP returned {sol.status}")
        x = MixedStrategy.from_lp(sol.x)
        if not self.contains(x):
            # float dust from renormalisation; polish once with HiGHS
            sol = lpc.solve(self.lp(objective, sense), "highs")
            x = MixedStrategy.from_lp(sol.x)
        return float(x.weights @ objective), x


def worst_minimax_welfare(g: DuelInstance, method: str = "auto") -> tuple[float, MixedStrategy]:
    """``min_{x in M} SW(x)`` and an optimizer."""
    if g.mode != "welfare":
        raise ModeError("worst_minimax_welfare needs a welfare-mode game; use worst_minimax_cost")
    return MinimaxPolytope(g).optimize(g.pure_scores, "min", method)


def best_minimax_welfare(g: DuelInstance, method: str = "auto") -> tuple[float, MixedStrategy]:
    if g.mode != "welfare":
        raise ModeError("best_minimax_welfare needs a welfare-mode game")
    return MinimaxPolytope(g).optimize(g.pure_scores, "max", method)


def worst_minimax_cost(g: DuelInstance, method: str = "auto") -> tuple[float, MixedStrategy]:
    """``max_{x in M} SC(x)`` and an optimizer."""
    if g.mode != "cost":
        raise ModeError("worst_minimax_cost needs a cost-mode game")
    return MinimaxPolytope(g).optimize(g.pure_scores, "max", method)


def best_minimax_cost(g: DuelInstance, method: str = "auto") -> tuple[float, MixedStrategy]:
    if g.mode != "cost":
        raise ModeError("best_minimax_cost needs a cost-mode game")
    return MinimaxPolytope(g).optimize(g.pure_scores, "min", method)


def _ratio(num: float, den: float) -> float:
    # a game whose best strategy is worth nothing loses nothing to competition
    return 1.0 if den == 0 else num / den


def price_of_competition(g: DuelInstance, method: str = "auto") -> float:
    """Worst minimax welfare over optimal welfare."""
    worst, _ = worst_minimax_welfare(g, method)
    return _ratio(worst, optimal_welfare(g)[0])


def price_of_competition_cost(g: DuelInstance, method: str = "auto") -> float:
    """Worst minimax social cost over optimal social cost."""
    worst, _ = worst_minimax_cost(g, method)
    return _ratio(worst, optimal_cost(g)[0])


# ---------------------------------------------------------------- marginal form


@dataclass(frozen=True, eq=False)
class MarginalMatrix:
    """``q[w, i] = Pr[page w sits at position i]`` (positions 0-based)."""

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"marginal matrix must be square, got {q.shape}")
        err = doubly_stochastic_error(q)
        if err > MARGINAL_TOL or q.min() < -MARGINAL_TOL:
            raise ValueError(f"not doubly stochastic (error {err:.3g}, min {q.min():.3g})")
        q = np.clip(q, 0.0, 1.0)
        q.flags.writeable = False
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]


def doubly_stochastic_error(q: np.ndarray) -> float:
    return float(max(np.abs(q.sum(axis=0) - 1).max(), np.abs(q.sum(axis=1) - 1).max()))


def marginals(g: DuelInstance, x) -> MarginalMatrix:
    """Position marginals of a mixed strategy over a ranking duel's orderings."""
    pos = ranking_positions(g)
    w = x.weights if isinstance(x, MixedStrategy) else np.asarray(x, dtype=float)
    q = np.zeros((g.n, g.n))
    for s in np.flatnonzero(w):
        q[np.arange(g.n), pos[s]] += w[s]
    return MarginalMatrix(q)


def _marginal_lp(spec: RankingSpec, sense: str) -> lpc.LinearProgram:
    # Variables: q[w, i] >= 0, then free alpha[w] and beta[j].
    # The opponent's best reply is an assignment problem over positions j:
    #   min_sigma sum_w C[w, sigma(w)],  C[w, j] = p_w sum_i q[w, i] sign(j - i).
    # Its LP dual is max sum alpha + sum beta with alpha_w + beta_j <= C[w, j],
    # so "every reply scores <= 0 against us" becomes the rows below.
    n, p, f = spec.n, spec.p, spec.f
    b = lpc.LpBuilder()
    q = [[b.add_var(f"q{w}_{i}", cost=float(p[w] * f[i])) for i in range(n)] for w in range(n)]
    alpha = [b.add_var(f"alpha{w}", lower=None) for w in range(n)]
    beta = [b.add_var(f"beta{j}", lower=None) for j in range(n)]
    for w in range(n):
        b.add_row({q[w][i]: 1 for i in range(n)}, "=", 1, f"row{w}")
    for i in range(n):
        b.add_row({q[w][i]: 1 for w in range(n)}, "=", 1, f"col{i}")
    for w in range(n):
        for j in range(n):
            row = {alpha[w]: 1, beta[j]: 1}
            for i in range(n):
                if i != j:
                    row[q[w][i]] = -float(p[w] * np.sign(j - i))
            b.add_row(row, "<=", 0, f"reply{w}_{j}")
    b.add_row({v: 1 for v in alpha + beta}, ">=", 0, "guarantee")
    return b.build(sense)


def ranking_minimax_marginal(spec: RankingSpec, objective: str = "worst",
                             method: str = "auto") -> tuple[float, MarginalMatrix]:
    """Worst (or best) minimax welfare of a ranking duel without enumerating orderings.

    In cost mode "worst" means the largest social cost.

    Raises:
        NonMonotoneValuation: if position order is not strictly value order.
    """
    if not spec.rank_monotone:
        raise NonMonotoneValuation(
            "marginal path needs a strictly monotone valuation; use the explicit path"
        )
    if objective not in ("worst", "best"):
        raise ValueError("objective must be 'worst' or 'best'")
    low = (objective == "worst") == (spec.mode == "welfare")
    sol = lpc.solve(_marginal_lp(spec, "min" if low else "max"), method)
    if sol.status != "optimal":
        raise lpc.LpError(f"marginal minimax LP returned {sol.status}")
    n = spec.n
    q = sol.x[: n * n].reshape(n, n)
    return float(sol.objective), MarginalMatrix(_sinkhorn_polish(q))


def _sinkhorn_polish(q: np.ndarray, rounds: int = 50) -> np.ndarray:
    q = np.clip(q, 0.0, None)
    for _ in range(rounds):
        q = q / q.sum(axis=1, keepdims=True)
        q = q / q.sum(axis=0, keepdims=True)
        if doubly_stochastic_error(q) < 1e-14:
            break
    return q


def marginal_guarantee(spec: RankingSpec, q: np.ndarray) -> float:
    """Worst-case utility of marginals ``q`` against any ordering (assignment LP)."""
    n = spec.n
    S = np.sign(np.arange(n)[None, :] - np.arange(n)[:, None])  # S[i, j] = sign(j - i)
    C = spec.p[:, None] * (q @ S)
    r, c = linear_sum_assignment(C)
    return float(C[r, c].sum())


def price_of_competition_marginal(spec: RankingSpec, method: str = "auto") -> float:
    worst, _ = ranking_minimax_marginal(spec, "worst", method)
    return _ratio(worst, spec.optimal_value())


# ---------------------------------------------------------------- Birkhoff


def _bottleneck_matching(R: np.ndarray) -> np.ndarray | None:
    """Perfect matching maximising the smallest matched entry of ``R``."""
    n = R.shape[0]
    vals = np.unique(R[R > 0])
    lo, hi, best = 0, vals.size - 1, None
    while lo <= hi:
        mid = (lo + hi) // 2
        match = maximum_bipartite_matching(sparse.csr_matrix(R >= vals[mid]), perm_type="column")
        if np.all(match >= 0):
            best, lo = match, mid + 1
        else:
            hi = mid - 1
    return best if best is not None and len(best) == n else None


def _caratheodory(weights: list[float], perms: list[np.ndarray], n: int):
    # drop permutations until the rest are affinely independent
    while len(perms) > (n - 1) ** 2 + 1:
        M = np.zeros((n * n + 1, len(perms)))
        for k, perm in enumerate(perms):
            M[np.arange(n) * n + perm, k] = 1
        M[-1] = 1
        z = np.linalg.svd(M)[2][-1]
        if z.max() <= 0:
            z = -z
        pos = z > 1e-12
        w = np.asarray(weights)
        t = np.min(w[pos] / z[pos])
        w = w - t * z
        keep = w > BIRKHOFF_ZERO
        weights = w[keep].tolist()
        perms = [perm for perm, k in zip(perms, keep) if k]
    return weights, perms


def birkhoff_decompose(q) -> list[tuple[float, tuple[int, ...]]]:
    """Write ``q`` as a convex combination of permutation matrices.

    Returns ``(weight, perm)`` pairs where ``perm[w]`` is the column (position)
    matched to row ``w``.  At most ``n^2 - 2n + 2`` pairs are returned.

    Raises:
        ValueError: if ``q`` is not doubly stochastic within ``1e-7``.
    """
    q = np.array(q.q if isinstance(q, MarginalMatrix) else q, dtype=float)
    n = q.shape[0]
    if q.ndim != 2 or q.shape[1] != n:
        raise ValueError("need a square matrix")
    if q.min() < -BIRKHOFF_INPUT_TOL or doubly_stochastic_error(q) > BIRKHOFF_INPUT_TOL:
        raise ValueError("matrix is not doubly stochastic within tolerance")
    R = np.where(q > BIRKHOFF_ZERO, q, 0.0)
    weights: list[float] = []
    perms: list[np.ndarray] = []
    while R.max() > BIRKHOFF_ZERO and len(perms) < n * n:
        match = _bottleneck_matching(R)
        if match is None:
            break
        w = R[np.arange(n), match].min()
        weights.append(float(w))
        perms.append(match.copy())
        R[np.arange(n), match] -= w
        R[R <= BIRKHOFF_ZERO] = 0.0
    weights, perms = _caratheodory(weights, perms, n)
    total = sum(weights)
    return [(w / total, tuple(int(j) for j in perm)) for w, perm in zip(weights, perms)]


def reconstruct(decomposition: Sequence[tuple[float, Sequence[int]]], n: int) -> np.ndarray:
    Q = np.zeros((n, n))
    for w, perm in decomposition:
        Q[np.arange(n), list(perm)] += w
    return Q


def strategy_from_decomposition(g: DuelInstance, decomposition) -> MixedStrategy:
    """Mixed strategy over a ranking duel's orderings realising the decomposition."""
    weights = np.zeros(g.m)
    for w, perm in decomposition:
        ordering = tuple(int(v) for v in np.argsort(perm))
        weights[g.index_of(ordering)] += w
    return MixedStrategy(weights)


def sample_orderings(decomposition, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` position vectors from the decomposition."""
    w = np.array([d[0] for d in decomposition])
    perms = np.array([d[1] for d in decomposition])
    return perms[rng.choice(len(w), size=size, p=w / w.sum())]
