"""Trigger functions, pseudo-welfare and the 0-1 principle bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .minimax import worst_minimax_welfare
from .model import DuelInstance, MixedStrategy, ModeError, optimal_welfare, social_welfare

LAYER_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TriggerView:
    """0-1 view of a welfare game: ``vhat[s, w] = 1`` iff ``V[s, w] >= alpha``."""

    game: DuelInstance
    alpha: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("threshold must be nonnegative")
        if self.game.mode != "welfare":
            raise ModeError("trigger functions are defined for welfare games")

    @property
    def vhat(self) -> np.ndarray:
        return (self.game.V >= self.alpha).astype(float)

    @property
    def pure_pseudo(self) -> np.ndarray:
        return self.vhat @ self.game.p


def _weights(x) -> np.ndarray:
    return x.weights if isinstance(x, MixedStrategy) else np.asarray(x, dtype=float)


def pseudo_welfare(view: TriggerView, x) -> float:
    """``E_{s~x} sum_w p_w vhat_w(s)``."""
    return float(_weights(x) @ view.pure_pseudo)


def thresholds(g: DuelInstance) -> np.ndarray:
    """Distinct values of the value table: the only places the trigger view changes."""
    return np.unique(np.concatenate([[0.0], g.V.ravel()]))


def poc_alpha(g: DuelInstance, alpha: float, xstar=None) -> float:
    """Pseudo-welfare of the worst-welfare minimax strategy over that of OPT.

    ``xstar`` defaults to the optimizer returned by ``worst_minimax_welfare``;
    the ratio is 1 when OPT's pseudo-welfare vanishes.
    """
    if xstar is None:
        xstar = worst_minimax_welfare(g)[1]
    view = TriggerView(g, alpha)
    opt = float(view.pure_pseudo[optimal_welfare(g)[1]])
    if opt == 0:
        return 1.0
    return pseudo_welfare(view, xstar) / opt


def zero_one_profile(g: DuelInstance, xstar=None) -> list[tuple[float, float]]:
    """``(alpha, PoC_alpha)`` at every breakpoint threshold."""
    if xstar is None:
        xstar = worst_minimax_welfare(g)[1]
    return [(float(a), poc_alpha(g, float(a), xstar)) for a in thresholds(g)]


def zero_one_bound(g: DuelInstance, xstar=None) -> float:
    """``min_alpha PoC_alpha`` over the finite breakpoint set."""
    return min(v for _, v in zero_one_profile(g, xstar))


def layer_decomposition(g: DuelInstance, x) -> tuple[float, float]:
    """(SW(x), sum over layers of width times pseudo-welfare at the layer top)."""
    levels = thresholds(g)
    total = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        total += (hi - lo) * pseudo_welfare(TriggerView(g, float(hi)), x)
    return social_welfare(g, x), total


def layer_decomposition_check(g: DuelInstance, x, tol: float = LAYER_TOL) -> bool:
    sw, layered = layer_decomposition(g, x)
    return abs(sw - layered) <= tol
