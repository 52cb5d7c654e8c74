"""Dueling games: requests, pure-strategy value tables, utilities and welfare."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np

PROB_TOL = 1e-12
RENORMALIZE_TOL = 1e-9
SUPPORT_TOL = 1e-10

# payoff matrices above this many entries are never materialised in full
_DENSE_PAYOFF_LIMIT = 4_000_000


class ModeError(ValueError):
    """A welfare quantity was requested from a cost game or vice versa."""


def _normalized(w, what: str) -> np.ndarray:
    w = np.array(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"{what} must be a nonempty vector")
    if not np.all(np.isfinite(w)):
        raise ValueError(f"{what} contains non-finite entries")
    if w.min() < -PROB_TOL:
        raise ValueError(f"{what} has negative entry {w.min():.3g}")
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise ValueError(f"{what} sums to {total!r}, not 1")
    if abs(total - 1.0) > PROB_TOL:
        w = w / total
    w.flags.writeable = False
    return w


@dataclass(frozen=True, eq=False)
class DuelInstance:
    """A finite dueling game ``(Omega, p, S, v)`` with an explicit value table.

    ``V[s, w]`` is the value (or cost, in ``mode="cost"``) of pure strategy
    ``s`` for request ``w``.  ``catalog`` optionally holds the structure each
    pure strategy index stands for (an ordering, a tree, ...).
    """

    p: np.ndarray
    V: np.ndarray
    mode: str = "welfare"
    catalog: tuple | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = _normalized(self.p, "request probabilities")
        V = np.array(self.V, dtype=float)
        if V.ndim != 2 or V.shape[1] != p.size or V.shape[0] < 1:
            raise ValueError(f"value table must be (m, {p.size}), got {V.shape}")
        if not np.all(np.isfinite(V)) or V.min() < 0:
            raise ValueError("value table entries must be finite and nonnegative")
        if self.mode not in ("welfare", "cost"):
            raise ValueError(f"mode must be 'welfare' or 'cost', got {self.mode!r}")
        if self.catalog is not None and len(self.catalog) != V.shape[0]:
            raise ValueError("catalog length does not match the number of pure strategies")
        V.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "V", V)
        if self.catalog is not None:
            object.__setattr__(self, "catalog", tuple(self.catalog))

    @property
    def n(self) -> int:
        return self.p.size

    @property
    def m(self) -> int:
        return self.V.shape[0]

    @cached_property
    def pure_scores(self) -> np.ndarray:
        """``sum_w p_w V[s, w]`` for every pure strategy: SW(s) or SC(s)."""
        return self.V @ self.p

    @cached_property
    def _catalog_index(self) -> dict:
        return {s: i for i, s in enumerate(self.catalog or ())}

    def index_of(self, strategy) -> int:
        try:
            return self._catalog_index[strategy]
        except KeyError:
            raise KeyError(f"{strategy!r} is not a pure strategy of this game") from None

    def _oriented(self) -> np.ndarray:
        # larger is better for the comparison in both modes
        return self.V if self.mode == "welfare" else -self.V

    def payoff_rows(self, rows: np.ndarray) -> np.ndarray:
        """``U[rows, :]`` with ``U[s, t] = sum_w p_w sign(v_w(s) - v_w(t))``."""
        W = self._oriented()
        out = np.empty((len(rows), self.m))
        step = max(1, _DENSE_PAYOFF_LIMIT // max(1, self.m * self.n))
        for start in range(0, len(rows), step):
            r = rows[start:start + step]
            out[start:start + step] = np.sign(W[r][:, None, :] - W[None, :, :]) @ self.p
        return out

    @cached_property
    def payoff_matrix(self) -> np.ndarray:
        """The full antisymmetric payoff matrix (refused for very large games)."""
        if self.m * self.m > _DENSE_PAYOFF_LIMIT:
            raise MemoryError(
                f"payoff matrix would have {self.m}^2 entries; use payoff_rows/payoffs_vs_pure"
            )
        U = self.payoff_rows(np.arange(self.m))
        U.flags.writeable = False
        return U


@dataclass(frozen=True, eq=False)
class MixedStrategy:
    """A probability vector over pure-strategy indices."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _normalized(self.weights, "strategy weights"))

    @classmethod
    def pure(cls, m: int, s: int) -> "MixedStrategy":
        w = np.zeros(m)
        w[s] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, m: int) -> "MixedStrategy":
        return cls(np.full(m, 1.0 / m))

    @classmethod
    def from_support(cls, m: int, support: dict[int, float]) -> "MixedStrategy":
        w = np.zeros(m)
        for s, v in support.items():
            w[s] += v
        return cls(w)

    @classmethod
    def from_lp(cls, raw: Sequence[float], dust: float = 1e-9) -> "MixedStrategy":
        """Clean solver output: clip float dust below zero and renormalise."""
        w = np.asarray(raw, dtype=float).copy()
        if w.min() < -dust:
            raise ValueError(f"LP weights have a negative entry {w.min():.3g}")
        w[w < 0] = 0.0
        return cls(w / w.sum())

    @property
    def m(self) -> int:
        return self.weights.size

    def support(self, tol: float = SUPPORT_TOL) -> np.ndarray:
        return np.flatnonzero(self.weights > tol)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self.m, size=size, p=self.weights)


def _as_weights(g: DuelInstance, x) -> np.ndarray:
    w = x.weights if isinstance(x, MixedStrategy) else np.asarray(x, dtype=float)
    if w.size != g.m:
        raise ValueError(f"strategy has {w.size} weights, game has {g.m} pure strategies")
    return w


def _pair_sum(g: DuelInstance, wx: np.ndarray, wy: np.ndarray, omega: int) -> float:
    # x^T S y with S[s, t] = sign(v(s) - v(t)) restricted to the two supports
    sx, sy = np.flatnonzero(wx), np.flatnonzero(wy)
    W = g._oriented()
    S = np.sign(W[sx, omega][:, None] - W[sy, omega][None, :])
    return float(wx[sx] @ S @ wy[sy])


def utility_omega(g: DuelInstance, x, y, omega: int) -> float:
    """Win-minus-loss probability of ``x`` against ``y`` when ``omega`` is requested.

    In cost mode the lower cost wins.  Ties contribute nothing.
    """
    if not 0 <= omega < g.n:
        raise IndexError(f"request {omega} out of range for n={g.n}")
    wx, wy = _as_weights(g, x), _as_weights(g, y)
    return float(0.5 * (_pair_sum(g, wx, wy, omega) - _pair_sum(g, wy, wx, omega)))


def utility(g: DuelInstance, x, y) -> float:
    """Overall utility ``u^A(x, y) = sum_w p_w u_w(x, y)``.

    Evaluated as half the difference of the two one-sided sums, which makes
    ``utility(g, x, y) == -utility(g, y, x)`` hold bit-for-bit.
    """
    wx, wy = _as_weights(g, x), _as_weights(g, y)
    fwd = sum(g.p[w] * _pair_sum(g, wx, wy, w) for w in range(g.n))
    bwd = sum(g.p[w] * _pair_sum(g, wy, wx, w) for w in range(g.n))
    return float(0.5 * (fwd - bwd))


def payoffs_vs_pure(g: DuelInstance, x) -> np.ndarray:
    """``u(x, t)`` for every pure strategy ``t`` of the game."""
    w = _as_weights(g, x)
    s = np.flatnonzero(w)
    return w[s] @ g.payoff_rows(s)


def guarantee(g: DuelInstance, x) -> float:
    """Worst-case utility of ``x``; nonnegative exactly for minimax strategies."""
    return float(payoffs_vs_pure(g, x).min())


def social_welfare(g: DuelInstance, x) -> float:
    if g.mode != "welfare":
        raise ModeError("social_welfare needs a welfare-mode game; use social_cost")
    return float(_as_weights(g, x) @ g.pure_scores)


def social_cost(g: DuelInstance, x) -> float:
    if g.mode != "cost":
        raise ModeError("social_cost needs a cost-mode game; use social_welfare")
    return float(_as_weights(g, x) @ g.pure_scores)


def optimal_welfare(g: DuelInstance) -> tuple[float, int]:
    """Best social welfare over pure strategies and the first index attaining it."""
    if g.mode != "welfare":
        raise ModeError("optimal_welfare needs a welfare-mode game")
    s = int(np.argmax(g.pure_scores))
    return float(g.pure_scores[s]), s


def optimal_cost(g: DuelInstance) -> tuple[float, int]:
    if g.mode != "cost":
        raise ModeError("optimal_cost needs a cost-mode game")
    s = int(np.argmin(g.pure_scores))
    return float(g.pure_scores[s]), s


def describe(g: DuelInstance, s: int) -> Any:
    """Human-readable label for pure strategy ``s``."""
    return g.catalog[s] if g.catalog is not None else s
