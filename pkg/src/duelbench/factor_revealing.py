"""Factor-revealing LP machinery for the linear ranking duel lower bound.

The primal LP has variables ``p_1..p_k >= 0`` and ``h_ab >= 0`` (a < b),

    minimize    sum h_ab
    subject to  sum_a p_a (k - a) = 1                      (theta)
                h_ab - p_b                    >= 0          (beta_ab)
                h_ab - p_a + 2 p_b            >= 0          (gamma_ab)
                h_ab - (p_a - p_b) / 1.208    >= 0          (lambda_ab)
                h_ab - (2 p_a - p_b) / 3.2    >= 0          (rho_ab)

Its optimum ``alpha_k`` lower-bounds the PoC of every linear ranking duel
with at least ``k`` pages.  Its dual maximizes ``theta``.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lp as lpc
from .instances import ranking_positions
from .model import DuelInstance, MixedStrategy

# constants of the four-piece linearization of max{p_b, p_a - 2p_b + 2p_b^2/p_a}
KHAT_SLOPE = Fraction("1.208")
KHAT_MIX = Fraction("3.2")

PUBLISHED_THETA = "0.612275"
PUBLISHED_K = 10
# nonzero entries of the published dual point for k = 10; every gamma is zero
PUBLISHED_BETA = {
    (1, 2): "1", (1, 3): "1", (1, 4): "0.13026", (2, 3): "1", (2, 4): "1", (2, 5): "1",
    (2, 6): "0.0608937", (3, 4): "1", (3, 5): "1", (3, 6): "1", (3, 7): "0.667024",
    (4, 5): "1", (4, 6): "1", (4, 7): "0.946275", (4, 8): "0.384898", (5, 6): "1",
    (5, 7): "1", (5, 8): "1", (5, 9): "0.577297", (6, 7): "1", (6, 8): "1",
    (6, 9): "0.579201", (6, 10): "0.605612", (7, 8): "1", (7, 9): "1", (7, 10): "1",
    (8, 9): "1", (8, 10): "1", (9, 10): "1",
}
PUBLISHED_LAMBDA = {
    (1, 5): "1", (1, 6): "1", (1, 7): "1", (1, 8): "1", (1, 9): "1", (1, 10): "1",
    (2, 7): "1", (2, 8): "1", (2, 9): "1", (2, 10): "1", (3, 10): "1", (4, 10): "0.725619",
}
PUBLISHED_RHO = {
    (1, 4): "0.86974", (2, 6): "0.939106", (3, 7): "0.332976", (3, 8): "1", (3, 9): "1",
    (4, 7): "0.0537254", (4, 8): "0.615102", (4, 9): "1", (4, 10): "0.274381",
    (5, 9): "0.422703", (5, 10): "1", (6, 9): "0.420799", (6, 10): "0.394388",
}

DUAL_NAMES = ("beta", "gamma", "lambda", "rho")


# ---------------------------------------------------------------- identities


def zibaeq_identity(n: int, a: int, k: int) -> tuple[int, int, bool]:
    """Double-counting identity behind the subset aggregation, in exact integers.

    ``lhs = sum_i C(a-1, i) C(n-a, k-i-1) (k-i-1)`` and ``rhs = (n-a) C(n-2, k-2)``.
    """
    if not (1 <= a <= n - 1 and 2 <= k <= n):
        raise ValueError(f"need 1 <= a <= n-1 and 2 <= k <= n, got n={n}, a={a}, k={k}")
    lhs = sum(math.comb(a - 1, i) * math.comb(n - a, k - i - 1) * (k - i - 1) for i in range(k))
    rhs = (n - a) * math.comb(n - 2, k - 2)
    return lhs, rhs, lhs == rhs


def _rhs_terms(pa, pb):
    return (pb, pa - 2 * pb, (pa - pb) / float(KHAT_SLOPE), (2 * pa - pb) / float(KHAT_MIX))


def check_khat(p_a: float, p_b: float) -> bool:
    """Whether the exact lower bound on h dominates its four linear pieces at ``(p_a, p_b)``."""
    if not 0 <= p_b <= p_a <= 1 or p_a == 0:
        raise ValueError("need 0 <= p_b <= p_a <= 1 and p_a > 0")
    lhs = max(p_b, p_a - 2 * p_b + 2 * p_b * p_b / p_a)
    return lhs >= max(_rhs_terms(p_a, p_b))


def khat_grid(size: int = 2000) -> tuple[bool, float]:
    """Check the linearization on a ``size x size`` grid of the triangle.

    Returns (all points pass, smallest lhs - rhs).
    """
    pa = np.linspace(0, 1, size + 1)[1:]
    worst = np.inf
    for i in range(pa.size):
        a = pa[i]
        b = np.linspace(0, a, size)
        lhs = np.maximum(b, a - 2 * b + 2 * b * b / a)
        rhs = np.max(np.vstack(_rhs_terms(a, b)), axis=0)
        worst = min(worst, float((lhs - rhs).min()))
    return worst >= 0, worst


# ---------------------------------------------------------------- h table and aggregation


def pairwise_h(g: DuelInstance, x) -> np.ndarray:
    """``h[a, b] = p_a Pr[a above b] + p_b Pr[b above a]`` for ``a < b`` (zero elsewhere)."""
    pos = ranking_positions(g)
    w = x.weights if isinstance(x, MixedStrategy) else np.asarray(x, dtype=float)
    s = np.flatnonzero(w)
    P = pos[s]
    above = np.einsum("s,sab->ab", w[s], (P[:, :, None] < P[:, None, :]).astype(float))
    H = g.p[:, None] * above + g.p[None, :] * above.T
    return np.triu(H, 1)


def aggregation_check(g: DuelInstance, x, k: int, limit: int = 100_000) -> tuple[float, float]:
    """(min over k-subsets of the pairwise ratio, SW(x)/SW(OPT)) for ``f(i) = n - i``.

    The global ratio can never fall below the subset minimum.
    """
    n = g.n
    if not 2 <= k <= n:
        raise ValueError("need 2 <= k <= n")
    if math.comb(n, k) > limit:
        raise ValueError(f"C({n},{k}) exceeds the subset limit {limit}")
    H = pairwise_h(g, x)
    p = g.p
    weights = np.arange(k - 1, -1, -1)
    best = np.inf
    for idx in itertools.combinations(range(n), k):
        den = float(p[list(idx)] @ weights)
        if den <= 0:
            continue
        num = float(sum(H[i, j] for i, j in itertools.combinations(idx, 2)))
        best = min(best, num / den)
    total = float(H.sum())
    opt = float(p @ np.arange(n - 1, -1, -1))
    return best, (total / opt if opt > 0 else 1.0)


# ---------------------------------------------------------------- primal and dual LPs


def pairs(k: int) -> list[tuple[int, int]]:
    """1-based pairs ``a < b`` in lexicographic order."""
    return list(itertools.combinations(range(1, k + 1), 2))


def build_lp4(k: int, exact: bool = True) -> lpc.LinearProgram:
    """The primal LP for subset size ``k``; row order: normalization, then four rows per pair."""
    if k < 2:
        raise ValueError("k must be at least 2")
    conv = (lambda v: v) if exact else float
    one = Fraction(1) if exact else 1.0
    b = lpc.LpBuilder()
    p = [b.add_var(f"p{a}") for a in range(1, k + 1)]
    h = {ab: b.add_var(f"h{ab[0]}_{ab[1]}", cost=1) for ab in pairs(k)}
    b.add_row({p[a - 1]: k - a for a in range(1, k)}, "=", 1, "theta")
    s, t = conv(1 / KHAT_SLOPE), conv(1 / KHAT_MIX)
    for (a, c), hv in h.items():
        pa, pc = p[a - 1], p[c - 1]
        b.add_row({hv: one, pc: -one}, ">=", 0, f"beta{a}_{c}")
        b.add_row({hv: one, pa: -one, pc: 2 * one}, ">=", 0, f"gamma{a}_{c}")
        b.add_row({hv: one, pa: -s, pc: s}, ">=", 0, f"lambda{a}_{c}")
        b.add_row({hv: one, pa: -2 * t, pc: t}, ">=", 0, f"rho{a}_{c}")
    return b.build("min")


def build_dual_lp5(k: int, exact: bool = True) -> lpc.LinearProgram:
    """The dual LP: maximize theta over the multipliers of the primal rows."""
    if k < 2:
        raise ValueError("k must be at least 2")
    conv = (lambda v: v) if exact else float
    one = Fraction(1) if exact else 1.0
    b = lpc.LpBuilder()
    theta = b.add_var("theta", lower=None, cost=1)
    var = {}
    for ab in pairs(k):
        for name in DUAL_NAMES:
            var[name, ab] = b.add_var(f"{name}{ab[0]}_{ab[1]}")
    s, t = conv(1 / KHAT_SLOPE), conv(1 / KHAT_MIX)
    for a in range(1, k + 1):
        row = {}
        if k - a:
            row[theta] = k - a
        for i in range(1, a):
            row[var["beta", (i, a)]] = -one
            row[var["gamma", (i, a)]] = 2 * one
            row[var["lambda", (i, a)]] = s
            row[var["rho", (i, a)]] = t
        for j in range(a + 1, k + 1):
            row[var["gamma", (a, j)]] = -one
            row[var["lambda", (a, j)]] = -s
            row[var["rho", (a, j)]] = -2 * t
        b.add_row(row, "<=", 0, f"page{a}")
    for ab in pairs(k):
        b.add_row({var[name, ab]: one for name in DUAL_NAMES}, "<=", 1, f"pair{ab[0]}_{ab[1]}")
    return b.build("max")


def alpha_k(k: int, method: str = "auto") -> float:
    """Optimal value ``alpha_k`` of the primal LP (float solve)."""
    sol = lpc.solve(build_lp4(k, exact=False), method)
    if sol.status != "optimal":
        raise lpc.LpError(f"primal LP at k={k} returned {sol.status}")
    return float(sol.objective)


def solve_lp4(k: int, method: str = "auto") -> lpc.LpSolution:
    return lpc.solve(build_lp4(k, exact=False), method)


def lp4_active_pieces(k: int, sol: lpc.LpSolution, tol: float = 1e-7) -> bool:
    """Every h at the optimum equals the largest of its four lower bounds."""
    x = np.asarray(sol.x, dtype=float)
    p = x[:k]
    for t, (a, b) in enumerate(pairs(k)):
        pa, pb = p[a - 1], p[b - 1]
        if abs(x[k + t] - max(_rhs_terms(pa, pb))) > tol:
            return False
    return True


def alpha_2_scan(step: float = 1e-6) -> float:
    """One-dimensional oracle for k = 2 (p_1 = 1 is forced by the normalization)."""
    p2 = np.arange(0, 1 + step / 2, step)
    return float(np.max(np.vstack(_rhs_terms(1.0, p2)), axis=0).min())


def alpha_curve(k_max: int, k_min: int = 2, method: str = "auto") -> list[tuple[int, float]]:
    if k_max < 2 or k_min < 2 or k_min > k_max:
        raise ValueError("need 2 <= k_min <= k_max")
    return [(k, alpha_k(k, method)) for k in range(k_min, k_max + 1)]


# ---------------------------------------------------------------- certificates


def dual_point_lp4(k: int, theta, beta=None, gamma=None, lam=None, rho=None) -> tuple:
    """Primal row multipliers in row order from per-pair dictionaries (missing = 0)."""
    tables = {"beta": beta or {}, "gamma": gamma or {}, "lambda": lam or {}, "rho": rho or {}}
    y = [Fraction(theta)]
    for ab in pairs(k):
        for name in DUAL_NAMES:
            y.append(Fraction(tables[name].get(ab, 0)))
    return tuple(y)


def published_dual_point() -> tuple:
    return dual_point_lp4(PUBLISHED_K, PUBLISHED_THETA, PUBLISHED_BETA, None, PUBLISHED_LAMBDA, PUBLISHED_RHO)


@dataclass
class CertificateReport:
    """Outcome of checking a dual point for the primal LP in exact arithmetic."""

    valid: bool
    theta: Fraction
    max_residual: float
    row_residuals: list  # dual page rows: must be <= 0
    pair_sums: dict  # dual pair rows: must be <= 1
    negative_entries: int
    rigorous_bound: Fraction
    exact: bool = True
    seconds: float = 0.0
    violations: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "theta": float(self.theta),
            "theta_exact": str(self.theta),
            "max_residual": self.max_residual,
            "row_residuals": [float(r) for r in self.row_residuals],
            "violations": self.violations,
            "rigorous_bound": float(self.rigorous_bound),
            "exact": self.exact,
            "seconds": self.seconds,
        }


def check_dual_point(k: int, y: tuple, tol: float = lpc.FEAS_TOL) -> CertificateReport:
    """Verify ``y`` as a certificate ``alpha_k >= theta``.

    Besides the plain verdict, returns a bound that stays valid when ``y`` is
    only approximately feasible: for any primal point,
    ``theta <= (1 + e) H + D_1^+ p_1 + sum_{a>=2} D_a^+ p_a`` with ``H = sum h``,
    ``e`` the worst pair-row excess and ``D_a`` the page-row left-hand sides.
    Since ``p_1 <= 1/(k-1)`` and ``p_a <= h_1a <= H`` for ``a >= 2``, this gives
    ``H >= (theta - D_1^+/(k-1)) / (1 + e + sum_{a>=2} D_a^+)``.
    """
    start = time.perf_counter()
    lp4 = build_lp4(k, exact=True)
    check = lpc.verify_certificate(lp4, lpc.DualCertificate(y, y[0], "lower"))
    theta = Fraction(y[0])
    # reduced cost of p_a is -D_a, of h_ab is 1 - (pair sum)
    d = lpc.reduced_costs(lp4, y, exact=True)
    rows = [-d[a] for a in range(k)]
    sums = {ab: 1 - d[k + t] for t, ab in enumerate(pairs(k))}
    negative = sum(1 for v in y[1:] if v < 0)
    excess = max([s - 1 for s in sums.values()] + [Fraction(0)])
    pos = [max(r, Fraction(0)) for r in rows]
    bound = (theta - pos[0] / (k - 1)) / (1 + excess + sum(pos[1:]))
    violations = [f"page row {a + 1}: {float(r):+.3e}" for a, r in enumerate(rows) if r > 0]
    violations += [f"pair ({a},{b}) sum - 1: {float(s - 1):+.3e}" for (a, b), s in sums.items() if s > 1]
    if negative:
        violations.append(f"{negative} negative multipliers")
    return CertificateReport(
        valid=bool(check.valid and check.max_residual <= tol),
        theta=theta,
        max_residual=float(check.max_residual),
        row_residuals=rows,
        pair_sums=sums,
        negative_entries=negative,
        rigorous_bound=bound if negative == 0 else Fraction(0),
        exact=check.exact,
        seconds=time.perf_counter() - start,
        violations=violations,
    )


def verify_paper_certificate() -> CertificateReport:
    """Check the published k = 10 dual point exactly."""
    return check_dual_point(PUBLISHED_K, published_dual_point())


def mp2_to_lp4(p: np.ndarray, h: dict) -> tuple[np.ndarray, dict, float]:
    """Rescale a point of the nonlinear program so the primal normalization holds; returns (p', h', alpha)."""
    k = p.size
    den = float(p @ np.arange(k - 1, -1, -1))
    c = 1.0 / den
    return p * c, {ab: v * c for ab, v in h.items()}, sum(h.values()) / den


def lp4_feasible(p: np.ndarray, h: dict, tol: float = 1e-12) -> bool:
    k = p.size
    if p.min() < -tol or abs(float(p @ np.arange(k - 1, -1, -1)) - 1) > tol:
        return False
    for (a, b), v in h.items():
        if v < max(_rhs_terms(p[a - 1], p[b - 1])) - tol:
            return False
    return True


def sample_mp2_point(k: int, rng: np.random.Generator) -> tuple[np.ndarray, dict]:
    """Random feasible point of the nonlinear program: sorted probabilities, h at or above its lower bound."""
    p = np.sort(rng.dirichlet(np.ones(k + 1))[:k])[::-1]
    h = {}
    for a, b in pairs(k):
        pa, pb = p[a - 1], p[b - 1]
        low = max(pb, pa - 2 * pb + 2 * pb * pb / pa)
        h[a, b] = low * (1 + rng.exponential(0.1) * rng.integers(0, 2))
    return p, h
