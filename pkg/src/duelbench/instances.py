"""Concrete dueling games: ranking duels, tree duels and the fixed constructions.

Conventions used throughout:

* Requests (pages) are column indices ``0..n-1`` of the value table.  Trees
  label requests ``1..n`` so that binary-search-tree keys read naturally;
  label ``l`` is request ``l - 1``.
* A ranking strategy is an *ordering*: a tuple whose entry ``i`` is the page
  shown at position ``i`` (0-based).  ``(0, 2, 1)`` is written <a,c,b>.
* Positions and depths are 1-based when they index a valuation vector:
  ``f[0]`` is the value of position (or depth) 1.  Tree roots have depth 1.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np

from .model import DuelInstance, MixedStrategy, _normalized

DEFAULT_PERM_CAP = 8
TREE_CATALOG_CAP = 1_000_000
BST_EPSILON = 1e-9

PAGE_LETTERS = "abcdefghijklmnopqrstuvwxyz"
BUILTINS = ("appendix-example", "footnote-example")


class CapExceeded(RuntimeError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: {size} exceeds the enumeration cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap


class InstanceFormatError(ValueError):
    """Malformed instance description."""


# ---------------------------------------------------------------- ranking


@dataclass(frozen=True, eq=False)
class RankingSpec:
    """Request distribution plus a per-position valuation for a ranking duel.

    ``p`` is stored sorted in descending order; ``order`` records the
    permutation applied, so ``p == p_input[order]``.  ``f[i]`` is the value
    (cost, in cost mode) of position ``i + 1``.
    """

    p: np.ndarray
    f: np.ndarray
    order: np.ndarray
    mode: str = "welfare"
    kind: str = "explicit"
    c: float | None = None
    d: float | None = None

    @classmethod
    def explicit(cls, p: Sequence[float], f: Sequence[float], mode: str = "welfare") -> "RankingSpec":
        p = _normalized(p, "request probabilities")
        f = np.array(f, dtype=float)
        if f.shape != p.shape:
            raise ValueError(f"valuation has {f.size} entries for {p.size} positions")
        if not np.all(np.isfinite(f)) or f.min() < 0:
            raise ValueError("valuation entries must be finite and nonnegative")
        order = np.argsort(-p, kind="stable")
        return cls(_frozen(p[order]), _frozen(f), _frozen(order), mode, "explicit")

    @classmethod
    def linear(cls, p: Sequence[float], c: float = 1.0, d: float = 0.0,
               mode: str = "welfare") -> "RankingSpec":
        """Linear valuation ``f(i) = c(n - i) + d``; in cost mode ``cost(i) = c*i + d``."""
        if c < 0 or d < 0:
            raise ValueError("linear valuation needs c >= 0 and d >= 0")
        n = len(p)
        i = np.arange(1, n + 1, dtype=float)
        f = c * (n - i) + d if mode == "welfare" else c * i + d
        spec = cls.explicit(p, f, mode)
        object.__setattr__(spec, "kind", "linear")
        object.__setattr__(spec, "c", float(c))
        object.__setattr__(spec, "d", float(d))
        return spec

    @property
    def n(self) -> int:
        return self.p.size

    @property
    def rank_monotone(self) -> bool:
        """True when a better position always means a strictly better value."""
        step = np.diff(self.f)
        return bool(np.all(step < 0) if self.mode == "welfare" else np.all(step > 0))

    def optimal_value(self) -> float:
        """SW (or SC) of showing pages by decreasing probability."""
        return float(self.p @ self.f)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


def orderings(n: int) -> list[tuple[int, ...]]:
    return list(itertools.permutations(range(n)))


def positions_of(order: Sequence[int]) -> np.ndarray:
    """Inverse of an ordering: ``pos[page]`` is the 0-based position of ``page``."""
    return np.argsort(np.asarray(order))


def ranking_duel(spec: RankingSpec, cap: int = DEFAULT_PERM_CAP, name: str = "") -> DuelInstance:
    """All ``n!`` orderings (lexicographic) as pure strategies.

    Raises:
        CapExceeded: if ``n`` is above ``cap``.
    """
    if spec.n > cap:
        raise CapExceeded(f"ranking duel with n={spec.n} has {math.factorial(spec.n)} orderings; n", spec.n, cap)
    perms = np.array(orderings(spec.n), dtype=np.int64).reshape(-1, spec.n)
    pos = np.argsort(perms, axis=1)
    V = spec.f[pos]
    meta = {"kind": "ranking", "spec": spec, "positions": pos}
    return DuelInstance(spec.p, V, mode=spec.mode, catalog=tuple(map(tuple, perms.tolist())),
                        name=name or f"ranking-n{spec.n}", meta=meta)


def ranking_positions(g: DuelInstance) -> np.ndarray:
    """``pos[s, page]`` for a ranking duel built by :func:`ranking_duel`."""
    if g.meta.get("kind") != "ranking":
        raise ValueError("not a ranking duel")
    return g.meta["positions"]


def ranking_spec(g: DuelInstance) -> RankingSpec:
    if g.meta.get("kind") != "ranking":
        raise ValueError("not a ranking duel")
    return g.meta["spec"]


def format_ordering(order: Sequence[int]) -> str:
    n = len(order)
    names = PAGE_LETTERS if n <= len(PAGE_LETTERS) else None
    body = ",".join(names[i] if names else str(i + 1) for i in order)
    return f"<{body}>"


# ---------------------------------------------------------------- trees
#
# Leaf trees (compression duel): a leaf is an int label, an internal node is
# a pair (left, right).  BSTs: None or (key, left, right).


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def leaf_depths(tree) -> dict[int, int]:
    out: dict[int, int] = {}
    stack = [(tree, 1)]
    while stack:
        t, d = stack.pop()
        if isinstance(t, tuple):
            stack.append((t[0], d + 1))
            stack.append((t[1], d + 1))
        else:
            out[t] = d
    return out


def bst_depths(tree) -> dict[int, int]:
    out: dict[int, int] = {}
    stack = [(tree, 1)]
    while stack:
        t, d = stack.pop()
        if t is None:
            continue
        key, left, right = t
        out[key] = d
        stack.append((left, d + 1))
        stack.append((right, d + 1))
    return out


def bst_keys(tree) -> list[int]:
    """In-order key sequence."""
    if tree is None:
        return []
    return bst_keys(tree[1]) + [tree[0]] + bst_keys(tree[2])


def format_leaf_tree(tree) -> str:
    if isinstance(tree, tuple):
        return f"({format_leaf_tree(tree[0])},{format_leaf_tree(tree[1])})"
    return str(tree)


def format_bst(tree) -> str:
    if tree is None:
        return "-"
    key, left, right = tree
    if left is None and right is None:
        return str(key)
    return f"{key}({format_bst(left)},{format_bst(right)})"


def _leaf_shapes(n: int) -> list:
    # shapes use None as the leaf placeholder
    if n == 1:
        return [None]
    out = []
    for k in range(1, n):
        for left in _leaf_shapes(k):
            for right in _leaf_shapes(n - k):
                out.append((left, right))
    return out


def _fill(shape, labels: Iterator[int]):
    if shape is None:
        return next(labels)
    left = _fill(shape[0], labels)
    return (left, _fill(shape[1], labels))


def enumerate_leaf_trees(n: int, cap: int = TREE_CATALOG_CAP) -> list:
    """All full binary trees whose leaves are labelled ``1..n`` (ordered children)."""
    if n < 1:
        raise ValueError("need at least one leaf")
    size = catalan(n - 1) * math.factorial(n)
    if size > cap:
        raise CapExceeded(f"leaf trees with {n} leaves", size, cap)
    out = []
    for shape in _leaf_shapes(n):
        for perm in itertools.permutations(range(1, n + 1)):
            out.append(_fill(shape, iter(perm)))
    return out


def _bsts(lo: int, hi: int) -> list:
    if lo > hi:
        return [None]
    out = []
    for r in range(lo, hi + 1):
        for left in _bsts(lo, r - 1):
            for right in _bsts(r + 1, hi):
                out.append((r, left, right))
    return out


def enumerate_bsts(n: int, cap: int = TREE_CATALOG_CAP) -> list:
    """All binary search trees on keys ``1..n``."""
    if n < 1:
        raise ValueError("need at least one key")
    size = catalan(n)
    if size > cap:
        raise CapExceeded(f"binary search trees on {n} keys", size, cap)
    return _bsts(1, n)


def complete_bst(lo: int, hi: int):
    """Balanced BST on ``lo..hi`` (complete when the size is ``2^h - 1``)."""
    if lo > hi:
        return None
    mid = (lo + hi) // 2
    return (mid, complete_bst(lo, mid - 1), complete_bst(mid + 1, hi))


def _depth_value(f: np.ndarray, depth: np.ndarray) -> np.ndarray:
    # depths beyond the valuation vector are worth 0
    f_ext = np.concatenate([f, [0.0]])
    return f_ext[np.minimum(depth, f.size + 1) - 1]


def tree_duel(p: Sequence[float], trees: list, f: Sequence[float], kind: str,
              mode: str = "welfare", name: str = "") -> DuelInstance:
    """Tree duel with value ``f[depth - 1]`` for each request.

    ``kind`` is "compression" (leaf trees) or "bst".
    """
    p = np.asarray(p, dtype=float)
    n = p.size
    depth_fn = leaf_depths if kind == "compression" else bst_depths
    D = np.empty((len(trees), n), dtype=np.int64)
    for s, t in enumerate(trees):
        d = depth_fn(t)
        if sorted(d) != list(range(1, n + 1)):
            raise ValueError(f"tree {t!r} does not cover requests 1..{n}")
        for label, depth in d.items():
            D[s, label - 1] = depth
    V = _depth_value(np.asarray(f, dtype=float), D)
    return DuelInstance(p, V, mode=mode, catalog=tuple(trees), name=name or f"{kind}-n{n}",
                        meta={"kind": kind, "depths": D, "f": np.asarray(f, dtype=float)})


# ---------------------------------------------------------------- compression construction


@dataclass(frozen=True, eq=False)
class CompressionConstruction:
    epsilon: float
    game: DuelInstance
    opt_tree: Any
    xstar_tree: Any

    @property
    def opt_index(self) -> int:
        return self.game.index_of(self.opt_tree)

    @property
    def xstar_index(self) -> int:
        return self.game.index_of(self.xstar_tree)


def compression_f(epsilon: float) -> np.ndarray:
    """Value by depth 1..4: 1 up to depth 2, eps/16 at depth 3, 0 below."""
    return np.array([1.0, 1.0, epsilon / 16, 0.0])


def compression_duel_epsilon(epsilon: float) -> CompressionConstruction:
    """Four equally likely requests over all 120 labelled 4-leaf trees."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    trees = enumerate_leaf_trees(4)
    game = tree_duel(np.full(4, 0.25), trees, compression_f(epsilon), "compression",
                     name=f"compression-eps{epsilon:g}")
    game.meta["epsilon"] = epsilon
    return CompressionConstruction(epsilon, game, (((1, 2), 3), 4), ((1, 2), (3, 4)))


# ---------------------------------------------------------------- binary search construction


@dataclass(frozen=True, eq=False)
class BinarySearchConstruction:
    """The lazily evaluated binary search duel for a target ratio ``beta``.

    Pure strategies (BSTs on ``1..n``) are never enumerated; they are handled
    as depth vectors.
    """

    beta: float
    epsilon: float
    k: int
    n: int
    p: np.ndarray
    xstar_tree: Any
    opt_witness: Any
    _cdf: dict = field(default_factory=dict, repr=False)

    def f(self, depth):
        d = np.asarray(depth)
        return np.where(d == 1, 1.0, np.where(d <= self.k + 2, self.epsilon, 0.0))

    def depth_vector(self, tree) -> np.ndarray:
        d = bst_depths(tree)
        if sorted(d) != list(range(1, self.n + 1)):
            raise ValueError("tree is not a BST on 1..n")
        return np.array([d[i] for i in range(1, self.n + 1)])

    def welfare(self, tree) -> float:
        return float(self.f(self.depth_vector(tree)) @ self.p)

    @property
    def xstar_depths(self) -> np.ndarray:
        return self.depth_vector(self.xstar_tree)

    @property
    def xstar_welfare(self) -> float:
        return self.welfare(self.xstar_tree)

    @property
    def xstar_welfare_formula(self) -> float:
        q = 4 / (5 * (self.n - 1))
        return q + (1 - q) * self.epsilon

    def payoffs(self, x_depths: np.ndarray, y_depths: np.ndarray) -> np.ndarray:
        """``u(x, y)`` for one x depth vector against each row of ``y_depths``."""
        vx = self.f(x_depths)
        vy = self.f(np.atleast_2d(y_depths))
        return np.sign(vx[None, :] - vy) @ self.p

    def _root_cdf(self, size: int) -> list[float]:
        cdf = self._cdf.get(size)
        if cdf is None:
            total = catalan(size)
            acc, cdf = 0, []
            for r in range(1, size + 1):
                acc += catalan(r - 1) * catalan(size - r)
                cdf.append(acc / total)
            self._cdf[size] = cdf
        return cdf

    def sample_depths(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Depth vectors of ``count`` BSTs drawn uniformly from all Catalan(n) trees."""
        n = self.n
        out = np.empty((count, n), dtype=np.int64)
        cdfs = [None] + [self._root_cdf(s) for s in range(1, n + 1)]
        U = rng.random((count, n))
        for t in range(count):
            u = U[t]
            row = out[t]
            j = 0
            stack = [(1, n, 1)]
            while stack:
                lo, hi, d = stack.pop()
                size = hi - lo + 1
                r = lo + min(bisect.bisect_right(cdfs[size], u[j]), size - 1)
                j += 1
                row[r - 1] = d
                if r > lo:
                    stack.append((lo, r - 1, d + 1))
                if r < hi:
                    stack.append((r + 1, hi, d + 1))
        return out

    def case_conditions(self) -> dict[str, Any]:
        """The two numeric facts the minimax argument for x* rests on."""
        q = 4 / (5 * (self.n - 1))
        d = self.xstar_depths
        return {
            "root_one_outweighed": bool(self.p[0] < 2 ** self.k * q),
            "p1": float(self.p[0]),
            "deep_mass": float(2 ** self.k * q),
            "xstar_depth_of_1_is_2": bool(d[0] == 2),
            "xstar_root": int(np.flatnonzero(d == 1)[0] + 1),
            "xstar_root_expected": 2 ** self.k + 1,
            "xstar_max_depth": int(d.max()),
            "xstar_within_k_plus_2": bool(d.max() <= self.k + 2),
        }

    @property
    def poc_bound(self) -> float:
        return 5 / self.n


def binary_search_duel(beta: float, epsilon: float = BST_EPSILON) -> BinarySearchConstruction:
    """``k = ceil(lg 1/beta) + 2``, ``n = 3 * 2^k`` and the designated x* tree."""
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    k = math.ceil(math.log2(1 / beta)) + 2
    n = 3 * 2 ** k
    p = np.full(n, 4 / (5 * (n - 1)))
    p[0] = 1 / 5
    p.flags.writeable = False
    t1 = complete_bst(2, 2 ** k)
    t2 = complete_bst(2 ** k + 2, 2 ** (k + 1))
    t3 = complete_bst(2 ** (k + 1) + 2, n)
    xstar = (2 ** k + 1, (1, None, t1), (2 ** (k + 1) + 1, t2, t3))
    witness = (1, None, complete_bst(2, n))
    return BinarySearchConstruction(beta, epsilon, k, n, p, xstar, witness)


# ---------------------------------------------------------------- fixed examples


def appendix_example() -> tuple[DuelInstance, MixedStrategy]:
    """n=3, p=(0.4, 0.4, 0.2), f(i)=3-i and x* = 1/2 <a,c,b> + 1/2 <b,c,a>."""
    g = ranking_duel(RankingSpec.linear([0.4, 0.4, 0.2]), name="appendix-example")
    x = MixedStrategy.from_support(g.m, {g.index_of((0, 2, 1)): 0.5, g.index_of((1, 2, 0)): 0.5})
    return g, x


def footnote_example() -> DuelInstance:
    """n=3, p=(0.35, 0.33, 0.32), f(i)=3-i."""
    return ranking_duel(RankingSpec.linear([0.35, 0.33, 0.32]), name="footnote-example")


# ---------------------------------------------------------------- JSON instances


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise InstanceFormatError(f"{where}: missing required key {key!r}")
    return obj[key]


def instance_from_dict(obj: dict, cap_perms: int = DEFAULT_PERM_CAP) -> DuelInstance:
    """Build a game from the JSON schema.

    ``{"type": "ranking"|"compression"|"bst"|"explicit", "p": [...],
    "valuation": {"kind": "linear", "c": .., "d": ..} | {"kind": "explicit", "values": [...]},
    "mode": "welfare"|"cost"}``; "explicit" games give ``"V": [[...], ...]``
    instead of a valuation.  Tree valuations are indexed by depth.
    """
    if not isinstance(obj, dict):
        raise InstanceFormatError("instance must be a JSON object")
    kind = _require(obj, "type", "instance")
    mode = obj.get("mode", "welfare")
    if mode not in ("welfare", "cost"):
        raise InstanceFormatError(f"mode: expected 'welfare' or 'cost', got {mode!r}")
    p = _require(obj, "p", "instance")
    if not isinstance(p, list) or not p:
        raise InstanceFormatError("p: expected a nonempty list of probabilities")
    name = str(obj.get("name", ""))
    if kind == "explicit":
        V = _require(obj, "V", "explicit instance")
        try:
            return DuelInstance(p, V, mode=mode, name=name or "explicit")
        except ValueError as exc:
            raise InstanceFormatError(f"explicit instance: {exc}") from None
    if kind not in ("ranking", "compression", "bst"):
        raise InstanceFormatError(f"type: unknown instance type {kind!r}")
    val = _require(obj, "valuation", f"{kind} instance")
    vkind = _require(val, "kind", "valuation")
    n = len(p)
    try:
        if vkind == "linear":
            c, d = float(val.get("c", 1.0)), float(val.get("d", 0.0))
            if kind == "ranking":
                spec = RankingSpec.linear(p, c, d, mode)
            else:
                i = np.arange(1, n + 1, dtype=float)
                f = c * (n - i) + d if mode == "welfare" else c * i + d
        elif vkind == "explicit":
            f = _require(val, "values", "valuation")
            if kind == "ranking":
                spec = RankingSpec.explicit(p, f, mode)
        else:
            raise InstanceFormatError(f"valuation.kind: unknown kind {vkind!r}")
        if kind == "ranking":
            return ranking_duel(spec, cap=cap_perms, name=name)
        trees = enumerate_leaf_trees(n) if kind == "compression" else enumerate_bsts(n)
        return tree_duel(p, trees, f, kind, mode=mode, name=name)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{kind} instance: {exc}") from None


def load_instance(path: str, cap_perms: int = DEFAULT_PERM_CAP) -> DuelInstance:
    """Read an instance file; JSON syntax errors report line and column."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return instance_from_dict(obj, cap_perms=cap_perms)


def builtin_instance(name: str) -> DuelInstance:
    if name == "appendix-example":
        return appendix_example()[0]
    if name == "footnote-example":
        return footnote_example()
    raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
