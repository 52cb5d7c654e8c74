"""Linear programs, a two-phase simplex solver and dual-certificate checks.

Every LP in the package goes through :class:`LinearProgram`.  Rows are stored
sparsely as ``{column: coefficient}`` mappings so that exact coefficients
(``int`` / :class:`fractions.Fraction`) survive construction; the float solver
works on a dense copy.

Dual convention.  For ``min c.x`` the row multipliers ``y`` satisfy
``c = A^T y + d`` where ``d`` are the reduced costs, ``y >= 0`` on ``>=`` rows,
``y <= 0`` on ``<=`` rows and free on ``=`` rows.  The Lagrangian dual value is

    g(y) = b.y + sum_j min_{l_j <= x_j <= u_j} d_j x_j

which is a lower bound on the optimum whenever the minimum is finite.  For
``max`` problems every sign flips and ``g`` is an upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import sparse

FEAS_TOL = 1e-9
GAP_TOL = 1e-7
CERT_VALUE_TOL = 1e-6

# dense tableau size (rows * columns) above which "auto" hands the LP to HiGHS
DENSE_SIMPLEX_LIMIT = 4_000_000

_SENSES = ("<=", ">=", "=")


class LpError(Exception):
    """Base class for LP failures."""


class NumericalBreakdown(LpError):
    """The simplex method could not make progress within its pivot cap."""


def _is_exact(v) -> bool:
    return isinstance(v, (int, Rational, Decimal)) and not isinstance(v, bool)


def to_fraction(v) -> Fraction:
    """Convert an exact number (or a decimal literal string) to a Fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Decimal, str)):
        return Fraction(v)
    if isinstance(v, Rational):
        return Fraction(v.numerator, v.denominator)
    raise TypeError(f"{v!r} is not an exact number")


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``min/max c.x  s.t.  A_r.x (<=|>=|=) b_r,  lower <= x <= upper``.

    ``None`` in ``lower``/``upper`` means an infinite bound.  Instances are
    immutable after construction and safe to share between threads.
    """

    c: tuple
    rows: tuple[Mapping[int, object], ...]
    senses: tuple[str, ...]
    b: tuple
    lower: tuple
    upper: tuple
    sense: str = "min"
    var_names: tuple[str, ...] | None = None
    row_names: tuple[str, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __init__(
        self,
        c: Sequence,
        rows: Iterable[Mapping[int, object]],
        senses: Sequence[str],
        b: Sequence,
        lower: Sequence | None = None,
        upper: Sequence | None = None,
        sense: str = "min",
        var_names: Sequence[str] | None = None,
        row_names: Sequence[str] | None = None,
    ):
        c = tuple(c)
        n = len(c)
        rows = tuple({int(j): v for j, v in r.items() if v != 0} for r in rows)
        senses = tuple(senses)
        b = tuple(b)
        lower = tuple(0 for _ in range(n)) if lower is None else tuple(lower)
        upper = tuple(None for _ in range(n)) if upper is None else tuple(upper)
        if sense not in ("min", "max"):
            raise ValueError(f"objective sense must be 'min' or 'max', got {sense!r}")
        if not (len(rows) == len(senses) == len(b)):
            raise ValueError(
                f"row data mismatch: {len(rows)} rows, {len(senses)} senses, {len(b)} rhs"
            )
        if len(lower) != n or len(upper) != n:
            raise ValueError("bounds must have one entry per variable")
        for i, (r, s) in enumerate(zip(rows, senses)):
            if s not in _SENSES:
                raise ValueError(f"row {i}: unknown relation {s!r}")
            if not r:
                raise ValueError(f"row {i} has no nonzero coefficient")
            bad = [j for j in r if not 0 <= j < n]
            if bad:
                raise ValueError(f"row {i} references unknown columns {bad}")
        for j, (lo, up) in enumerate(zip(lower, upper)):
            if lo is not None and up is not None and lo > up:
                raise ValueError(f"variable {j}: lower bound {lo} exceeds upper bound {up}")
        if var_names is not None and len(var_names) != n:
            raise ValueError("var_names length mismatch")
        if row_names is not None and len(row_names) != len(rows):
            raise ValueError("row_names length mismatch")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "sense", sense)
        object.__setattr__(self, "var_names", tuple(var_names) if var_names else None)
        object.__setattr__(self, "row_names", tuple(row_names) if row_names else None)
        object.__setattr__(self, "_cache", {})

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def is_exact(self) -> bool:
        """True when every coefficient, rhs and finite bound is an exact rational."""
        if "exact" not in self._cache:
            vals = list(self.c) + list(self.b)
            vals += [v for v in self.lower if v is not None]
            vals += [v for v in self.upper if v is not None]
            vals += [v for r in self.rows for v in r.values()]
            self._cache["exact"] = all(_is_exact(v) for v in vals)
        return self._cache["exact"]

    def matrix(self) -> sparse.csr_matrix:
        """Float constraint matrix in CSR (row-major) form."""
        if "A" not in self._cache:
            data, indices, indptr = [], [], [0]
            for r in self.rows:
                for j, v in sorted(r.items()):
                    indices.append(j)
                    data.append(float(v))
                indptr.append(len(indices))
            self._cache["A"] = sparse.csr_matrix(
                (data, indices, indptr), shape=(self.n_rows, self.n_vars)
            )
        return self._cache["A"]

    def dense_c(self) -> np.ndarray:
        return np.array([float(v) for v in self.c])

    def dense_b(self) -> np.ndarray:
        return np.array([float(v) for v in self.b])

    def row_name(self, i: int) -> str:
        return self.row_names[i] if self.row_names else f"r{i}"

    def var_name(self, j: int) -> str:
        return self.var_names[j] if self.var_names else f"x{j}"


class LpBuilder:
    """Incremental construction of a :class:`LinearProgram` with named columns."""

    def __init__(self):
        self._c: list = []
        self._lo: list = []
        self._up: list = []
        self._names: list[str] = []
        self._rows: list[dict[int, object]] = []
        self._senses: list[str] = []
        self._b: list = []
        self._row_names: list[str] = []

    def add_var(self, name: str, lower=0, upper=None, cost=0) -> int:
        self._c.append(cost)
        self._lo.append(lower)
        self._up.append(upper)
        self._names.append(name)
        return len(self._c) - 1

    def add_row(self, coeffs: Mapping[int, object], sense: str, rhs, name: str | None = None) -> int:
        row: dict[int, object] = {}
        for j, v in coeffs.items():
            row[j] = row.get(j, 0) + v
        self._rows.append(row)
        self._senses.append(sense)
        self._b.append(rhs)
        self._row_names.append(name or f"r{len(self._rows) - 1}")
        return len(self._rows) - 1

    def build(self, sense: str = "min") -> LinearProgram:
        return LinearProgram(
            self._c, self._rows, self._senses, self._b, self._lo, self._up, sense,
            var_names=self._names, row_names=self._row_names,
        )


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float | None = None
    y: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    dual_objective: float | None = None
    primal_residual: float | None = None
    dual_residual: float | None = None
    iterations: int = 0
    method: str = "simplex"

    @property
    def gap(self) -> float | None:
        if self.objective is None or self.dual_objective is None:
            return None
        return abs(float(self.objective) - float(self.dual_objective))

    def certificate(self) -> "DualCertificate":
        if self.status != "optimal":
            raise LpError(f"no certificate for status {self.status!r}")
        return DualCertificate(
            y=tuple(self.y), bound=self.dual_objective, direction=None
        )


@dataclass(frozen=True)
class DualCertificate:
    """A dual point and the bound it claims on the primal optimum.

    ``direction`` is ``"lower"`` (certificates for ``min`` problems) or
    ``"upper"`` (for ``max``); ``None`` means "whatever the LP's sense implies".
    """

    y: tuple
    bound: object
    direction: str | None = None


class CertificateCheck(NamedTuple):
    valid: bool
    max_residual: float
    dual_value: object
    exact: bool


# --------------------------------------------------------------------------- #
# duality bookkeeping


def reduced_costs(lp: LinearProgram, y: Sequence, exact: bool = False) -> list:
    """``c - A^T y`` in original variable space."""
    if exact:
        d = [to_fraction(v) for v in lp.c]
        for yi, row in zip(y, lp.rows):
            if yi == 0:
                continue
            for j, a in row.items():
                d[j] -= yi * to_fraction(a)
        return d
    yv = np.asarray(y, dtype=float)
    return list(lp.dense_c() - lp.matrix().T @ yv)


def dual_objective(lp: LinearProgram, y: Sequence, exact: bool = False) -> tuple[object, object]:
    """Return ``(g(y), residual)`` for the Lagrangian dual of ``lp``.

    ``residual`` is the largest violation of dual feasibility: wrong-signed
    row multipliers, or reduced costs pushing a variable towards an infinite
    bound.  With ``exact=True`` all arithmetic is in :class:`Fraction`.
    """
    if len(y) != lp.n_rows:
        raise ValueError(f"dual point has {len(y)} entries, LP has {lp.n_rows} rows")
    conv = to_fraction if exact else float
    yv = [conv(v) for v in y]
    zero = Fraction(0) if exact else 0.0
    flip = 1 if lp.sense == "min" else -1
    resid = zero
    for yi, s in zip(yv, lp.senses):
        signed = flip * yi
        if s == ">=" and signed < 0:
            resid = max(resid, -signed)
        elif s == "<=" and signed > 0:
            resid = max(resid, signed)
    d = reduced_costs(lp, yv, exact=exact)
    val = sum((conv(bi) * yi for bi, yi in zip(lp.b, yv)), zero)
    for dj, lo, up in zip(d, lp.lower, lp.upper):
        dj = conv(dj)
        # min problems pick the bound that minimises d_j x_j, max problems maximise
        toward_upper = (flip * dj) < 0
        bound = up if toward_upper else lo
        if dj == 0:
            continue
        if bound is None:
            resid = max(resid, abs(dj))
            continue
        val += dj * conv(bound)
    return val, resid


def primal_residual(lp: LinearProgram, x: Sequence) -> float:
    """Largest violation of rows and bounds at ``x``."""
    xv = np.asarray(x, dtype=float)
    ax = lp.matrix() @ xv
    b = lp.dense_b()
    worst = 0.0
    for i, s in enumerate(lp.senses):
        if s == "<=":
            worst = max(worst, ax[i] - b[i])
        elif s == ">=":
            worst = max(worst, b[i] - ax[i])
        else:
            worst = max(worst, abs(ax[i] - b[i]))
    for j, (lo, up) in enumerate(zip(lp.lower, lp.upper)):
        if lo is not None:
            worst = max(worst, float(lo) - xv[j])
        if up is not None:
            worst = max(worst, xv[j] - float(up))
    return float(worst)


def _all_exact(values: Iterable) -> bool:
    return all(isinstance(v, (str, int, Rational, Decimal)) and not isinstance(v, bool) for v in values)


def verify_certificate(lp: LinearProgram, cert: DualCertificate) -> CertificateCheck:
    """Check that ``cert.y`` is dual feasible and attains ``cert.bound``.

    Exact rational arithmetic is used when the LP and the certificate are both
    given in exact numbers (ints, Fractions, Decimals or decimal strings).
    """
    if len(cert.y) != lp.n_rows:
        raise ValueError(f"certificate has {len(cert.y)} multipliers, LP has {lp.n_rows} rows")
    expected = "lower" if lp.sense == "min" else "upper"
    if cert.direction is not None and cert.direction != expected:
        raise ValueError(
            f"a dual point of a {lp.sense} problem gives a {expected} bound, not {cert.direction}"
        )
    exact = lp.is_exact and _all_exact(cert.y) and _all_exact([cert.bound])
    value, resid = dual_objective(lp, cert.y, exact=exact)
    claimed = to_fraction(cert.bound) if exact else float(cert.bound)
    ok = resid <= FEAS_TOL and abs(value - claimed) <= CERT_VALUE_TOL
    return CertificateCheck(bool(ok), resid, value, exact)


# --------------------------------------------------------------------------- #
# simplex


@dataclass
class _Standard:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    n_struct: int  # structural z columns
    # z -> x recovery: per original var (kind, cols, offset)
    recover: list
    row_sign: np.ndarray  # +-1 applied to each std row
    n_orig_rows: int
    basis: list  # initial basis (slack or artificial column per row)
    n_art: int
    art_rows: list  # std row owning each artificial column


def _standardize(lp: LinearProgram, exact: bool) -> _Standard:
    conv = to_fraction if exact else float
    dtype = object if exact else float
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    cols: list[tuple[int, object]] = []  # (orig var, multiplier) per z column
    recover = []
    shift = []  # constant added to x_j
    bound_rows = []  # (z column, rhs) for boxed variables
    for j, (lo, up) in enumerate(zip(lp.lower, lp.upper)):
        if lo is not None:
            cols.append((j, one))
            recover.append(("shift", len(cols) - 1, conv(lo)))
            shift.append(conv(lo))
            if up is not None:
                bound_rows.append((len(cols) - 1, conv(up) - conv(lo)))
        elif up is not None:
            cols.append((j, -one))
            recover.append(("flip", len(cols) - 1, conv(up)))
            shift.append(conv(up))
        else:
            cols.append((j, one))
            cols.append((j, -one))
            recover.append(("split", len(cols) - 2, zero))
            shift.append(zero)
    nz = len(cols)
    col_of: dict[int, list[tuple[int, object]]] = {}
    for k, (j, m) in enumerate(cols):
        col_of.setdefault(j, []).append((k, m))

    m_rows = lp.n_rows + len(bound_rows)
    senses = list(lp.senses) + ["<="] * len(bound_rows)
    n_slack = sum(1 for s in senses if s != "=")
    A = np.full((m_rows, nz + n_slack), zero, dtype=dtype)
    b = np.full(m_rows, zero, dtype=dtype)
    for i, row in enumerate(lp.rows):
        rhs = conv(lp.b[i])
        for j, a in row.items():
            a = conv(a)
            rhs -= a * shift[j]
            for k, m in col_of[j]:
                A[i, k] += a * m
        b[i] = rhs
    for t, (k, rhs) in enumerate(bound_rows):
        A[lp.n_rows + t, k] = one
        b[lp.n_rows + t] = rhs
    slack_col = {}
    s = nz
    for i, sense in enumerate(senses):
        if sense == "<=":
            A[i, s] = one
        elif sense == ">=":
            A[i, s] = -one
        else:
            continue
        slack_col[i] = s
        s += 1
    row_sign = np.ones(m_rows, dtype=int)
    for i in range(m_rows):
        flip = b[i] < 0 or (b[i] == 0 and i in slack_col and A[i, slack_col[i]] < 0)
        if flip:
            A[i] = -A[i]
            b[i] = -b[i]
            row_sign[i] = -1
    basis = []
    art_rows = []
    for i in range(m_rows):
        if i in slack_col and A[i, slack_col[i]] > 0:
            basis.append(slack_col[i])
        else:
            basis.append(None)
            art_rows.append(i)
    n_cols = A.shape[1]
    if art_rows:
        extra = np.full((m_rows, len(art_rows)), zero, dtype=dtype)
        for t, i in enumerate(art_rows):
            extra[i, t] = one
            basis[i] = n_cols + t
        A = np.hstack([A, extra])
    c = np.full(A.shape[1], zero, dtype=dtype)
    for k, (j, m) in enumerate(cols):
        c[k] = conv(lp.c[j]) * m
    if lp.sense == "max":
        c = -c
    return _Standard(A, b, c, nz, recover, row_sign, lp.n_rows, basis, len(art_rows), art_rows)


class _Tableau:
    def __init__(self, A, b, basis, exact: bool, cap: int, dantzig_budget: int):
        self.exact = exact
        m, n = A.shape
        self.T = np.empty((m + 1, n + 1), dtype=A.dtype)
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.T[m] = 0
        self.m, self.n = m, n
        self.basis = list(basis)
        self.tol = 0 if exact else 1e-9
        self.piv_tol = 0 if exact else 1e-9
        self.cap = cap
        self.dantzig_budget = dantzig_budget
        self.pivots = 0

    def set_objective(self, cost):
        m, n = self.m, self.n
        row = np.empty(n + 1, dtype=self.T.dtype)
        row[:n] = cost
        row[n] = 0
        for i, k in enumerate(self.basis):
            ck = cost[k]
            if ck != 0:
                row -= ck * self.T[i]
        self.T[m] = row

    def pivot(self, r: int, k: int):
        T = self.T
        prow = T[r] / T[r, k]
        col = T[:, k].copy()
        col[r] = 0
        T -= np.outer(col, prow)
        T[r] = prow
        if not self.exact:
            T[:, k] = 0.0
            T[r, k] = 1.0
        self.basis[r] = k
        self.pivots += 1
        if self.pivots > self.cap:
            raise NumericalBreakdown(
                f"simplex exceeded its pivot cap of {self.cap} (rows+cols scaled by 50)"
            )

    def run(self, allowed: np.ndarray) -> str:
        """Pivot until optimal or unbounded over columns with ``allowed`` set."""
        m, n = self.m, self.n
        T = self.T
        while True:
            red = T[m, :n]
            bland = self.pivots >= self.dantzig_budget
            if self.exact:
                cand = [k for k in range(n) if allowed[k] and red[k] < 0]
                if not cand:
                    return "optimal"
                k = cand[0] if bland else min(cand, key=lambda j: (red[j], j))
            else:
                mask = allowed & (red < -self.tol)
                if not mask.any():
                    return "optimal"
                if bland:
                    k = int(np.flatnonzero(mask)[0])
                else:
                    k = int(np.argmin(np.where(mask, red, np.inf)))
            colk = T[:m, k]
            rhs = T[:m, n]
            if self.exact:
                rows = [i for i in range(m) if colk[i] > 0]
                if not rows:
                    return "unbounded"
                best = min(rhs[i] / colk[i] for i in rows)
                ties = [i for i in rows if rhs[i] / colk[i] == best]
            else:
                pos = colk > self.piv_tol
                if not pos.any():
                    return "unbounded"
                ratios = np.full(m, np.inf)
                ratios[pos] = np.maximum(rhs[pos], 0.0) / colk[pos]
                best = ratios.min()
                ties = np.flatnonzero(ratios <= best + 1e-12 * (1 + abs(best)))
            if bland:
                r = min(ties, key=lambda i: self.basis[i])
            elif self.exact:
                r = ties[0]
            else:
                r = int(ties[np.argmax(np.abs(colk[ties]))])
            self.pivot(int(r), k)


def _exact_solve(M: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination over the rationals for a square nonsingular system."""
    n = len(M)
    aug = [list(row) + [v] for row, v in zip(M, rhs)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * bcol for a, bcol in zip(aug[i], aug[col])]
    return [aug[i][n] for i in range(n)]


def _simplex(lp: LinearProgram, exact: bool) -> LpSolution:
    std = _standardize(lp, exact)
    m, n = std.A.shape
    size = lp.n_rows + lp.n_vars
    tab = _Tableau(std.A, std.b, std.basis, exact, cap=50 * size, dantzig_budget=10 * size)
    n_real = n - std.n_art
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0

    active_rows = list(range(m))
    if std.n_art:
        cost1 = np.full(n, zero, dtype=std.A.dtype)
        cost1[n_real:] = one
        tab.set_objective(cost1)
        tab.run(np.ones(n, dtype=bool))
        infeas = -tab.T[m, n]
        if infeas > (0 if exact else 1e-9 * (1 + float(np.abs(std.b).max(initial=0)))):
            return LpSolution("infeasible", iterations=tab.pivots, method="exact" if exact else "simplex")
        # drive remaining artificials out of the basis; rows that cannot be cleared are redundant
        for i in range(m):
            if tab.basis[i] >= n_real:
                row = tab.T[i, :n_real]
                nz = [k for k in range(n_real) if (row[k] != 0 if exact else abs(row[k]) > 1e-9)]
                if nz:
                    k = max(nz, key=lambda j: abs(row[j]))
                    tab.pivot(i, k)
        # a stuck artificial marks its own constraint row as redundant
        stuck = [i for i in range(m) if tab.basis[i] >= n_real]
        dropped = {std.art_rows[tab.basis[i] - n_real] for i in stuck}
        active_rows = [r for r in range(m) if r not in dropped]
        if stuck:
            live = [i for i in range(m) if tab.basis[i] < n_real]
            tab.T = tab.T[live + [m]]
            tab.basis = [tab.basis[i] for i in live]
            tab.m = len(live)
    allowed = np.zeros(n, dtype=bool)
    allowed[:n_real] = True
    tab.set_objective(std.c)
    status = tab.run(allowed)
    method = "exact" if exact else "simplex"
    if status == "unbounded":
        return LpSolution("unbounded", iterations=tab.pivots, method=method)

    basis = tab.basis
    A_act = std.A[active_rows]
    b_act = std.b[active_rows]
    if exact:
        B = [[A_act[i, k] for k in basis] for i in range(len(active_rows))]
        zB = _exact_solve(B, list(b_act))
        BT = [[B[i][r] for i in range(len(B))] for r in range(len(B))]
        y_act = _exact_solve(BT, [std.c[k] for k in basis])
    else:
        B = A_act[:, basis]
        zB = np.linalg.solve(B, b_act)
        y_act = np.linalg.solve(B.T, std.c[basis])
    z = np.full(n, zero, dtype=std.A.dtype)
    for i, k in enumerate(basis):
        z[k] = zB[i]
    x = []
    for kind, k, off in std.recover:
        if kind == "shift":
            x.append(off + z[k])
        elif kind == "flip":
            x.append(off - z[k])
        else:
            x.append(z[k] - z[k + 1])
    y_std = [zero] * m
    for i, r in enumerate(active_rows):
        y_std[r] = y_act[i]
    sgn = 1 if lp.sense == "min" else -1
    y = [sgn * int(std.row_sign[i]) * y_std[i] for i in range(lp.n_rows)]
    if not exact:
        x = np.array(x, dtype=float)
        y = np.array(y, dtype=float)
    return _finish(lp, x, y, tab.pivots, method, exact)


def _finish(lp, x, y, iterations, method, exact=False) -> LpSolution:
    if exact:
        obj = sum((to_fraction(c) * xi for c, xi in zip(lp.c, x)), Fraction(0))
        dval, dres = dual_objective(lp, y, exact=True)
        d = reduced_costs(lp, y, exact=True)
        return LpSolution(
            "optimal", x=np.array(x, dtype=object), objective=obj,
            y=np.array(y, dtype=object), reduced_costs=np.array(d, dtype=object),
            dual_objective=dval, primal_residual=primal_residual(lp, [float(v) for v in x]),
            dual_residual=float(dres), iterations=iterations, method=method,
        )
    obj = float(lp.dense_c() @ x)
    dval, dres = dual_objective(lp, y)
    return LpSolution(
        "optimal", x=x, objective=obj, y=y,
        reduced_costs=np.array(reduced_costs(lp, y)), dual_objective=float(dval),
        primal_residual=primal_residual(lp, x), dual_residual=float(dres),
        iterations=iterations, method=method,
    )


def _highs(lp: LinearProgram) -> LpSolution:
    from scipy.optimize import linprog

    A = lp.matrix()
    b = lp.dense_b()
    senses = np.array(lp.senses)
    ub = np.flatnonzero(senses != "=")
    eq = np.flatnonzero(senses == "=")
    sign_ub = np.where(senses[ub] == "<=", 1.0, -1.0)
    A_ub = sparse.diags(sign_ub) @ A[ub] if len(ub) else None
    b_ub = sign_ub * b[ub] if len(ub) else None
    c = lp.dense_c() * (1 if lp.sense == "min" else -1)
    bounds = [
        (None if lo is None else float(lo), None if up is None else float(up))
        for lo, up in zip(lp.lower, lp.upper)
    ]
    res = linprog(
        c, A_ub=A_ub, b_ub=b_ub,
        A_eq=A[eq] if len(eq) else None, b_eq=b[eq] if len(eq) else None,
        bounds=bounds, method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        # HiGHS presolve can report an unbounded LP as infeasible; re-check feasibility alone
        probe = linprog(
            np.zeros_like(c), A_ub=A_ub, b_ub=b_ub,
            A_eq=A[eq] if len(eq) else None, b_eq=b[eq] if len(eq) else None,
            bounds=bounds, method="highs",
        )
        status = "unbounded" if probe.status == 0 else "infeasible"
        return LpSolution(status, method="highs")
    if res.status == 3:
        return LpSolution("unbounded", method="highs")
    if res.status != 0:
        raise NumericalBreakdown(f"HiGHS failed: {res.message}")
    y = np.zeros(lp.n_rows)
    if len(ub):
        y[ub] = sign_ub * res.ineqlin.marginals
    if len(eq):
        y[eq] = res.eqlin.marginals
    if lp.sense == "max":
        y = -y
    return _finish(lp, np.asarray(res.x, dtype=float), y, int(res.nit), "highs")


def solve(lp: LinearProgram, method: str = "auto") -> LpSolution:
    """Solve ``lp``.

    ``method`` is ``"simplex"`` (dense two-phase tableau, Dantzig pricing
    switching to Bland's rule), ``"exact"`` (the same simplex over Fractions;
    needs an exact LP), ``"highs"`` (scipy's HiGHS), or ``"auto"``: the float
    simplex for desk-size problems and HiGHS beyond ``DENSE_SIMPLEX_LIMIT``.
    """
    if method == "auto":
        n_bound = sum(1 for lo, up in zip(lp.lower, lp.upper) if lo is not None and up is not None)
        rows = lp.n_rows + n_bound
        cols = lp.n_vars + rows
        method = "simplex" if rows * cols <= DENSE_SIMPLEX_LIMIT else "highs"
    if method == "simplex":
        return _simplex(lp, exact=False)
    if method == "exact":
        if not lp.is_exact:
            raise LpError("exact solve needs integer/Fraction coefficients throughout")
        return _simplex(lp, exact=True)
    if method == "highs":
        return _highs(lp)
    raise ValueError(f"unknown method {method!r}")


def dual_of(lp: LinearProgram) -> LinearProgram:
    """The LP dual of ``lp`` (finite variable bounds become extra dual variables).

    For ``min c.x`` this is ``max g(y)``; solving it returns the primal optimum
    by strong duality.
    """
    bld = LpBuilder()
    flip = 1 if lp.sense == "min" else -1
    yvars = []
    for i, s in enumerate(lp.senses):
        if s == "=":
            lo, up = None, None
        elif (s == ">=") == (flip == 1):
            lo, up = 0, None
        else:
            lo, up = None, 0
        yvars.append(bld.add_var(f"y_{lp.row_name(i)}", lo, up, cost=lp.b[i]))
    cols: dict[int, dict[int, object]] = {j: {} for j in range(lp.n_vars)}
    for i, row in enumerate(lp.rows):
        for j, a in row.items():
            cols[j][yvars[i]] = a
    for j in range(lp.n_vars):
        lo, up = lp.lower[j], lp.upper[j]
        coeffs = dict(cols[j])
        # bound multipliers: w_lo on x_j >= lo, w_up on x_j <= up
        if lo is not None:
            w = bld.add_var(f"wlo_{lp.var_name(j)}", *((0, None) if flip == 1 else (None, 0)), cost=lo)
            coeffs[w] = 1
        if up is not None:
            w = bld.add_var(f"wup_{lp.var_name(j)}", *((None, 0) if flip == 1 else (0, None)), cost=up)
            coeffs[w] = 1
        if not coeffs:
            if lp.c[j] != 0:
                # column without rows or bounds: primal unbounded unless c_j = 0
                coeffs[bld.add_var(f"void_{j}", 0, 0)] = 1
            else:
                continue
        bld.add_row(coeffs, "=", lp.c[j], name=f"col_{lp.var_name(j)}")
    return bld.build("max" if lp.sense == "min" else "min")


def to_lp_format(lp: LinearProgram) -> str:
    """Serialise ``lp`` in CPLEX-LP text format for cross-checks with other solvers."""

    def term(coef, name, first):
        v = float(coef)
        sign = "-" if v < 0 else ("" if first else "+")
        return f"{sign} {abs(v):.17g} {name}".strip()

    names = [lp.var_name(j).replace(",", "_") for j in range(lp.n_vars)]
    out = ["Maximize" if lp.sense == "max" else "Minimize"]
    obj = [term(c, names[j], not k) for k, (j, c) in enumerate((j, c) for j, c in enumerate(lp.c) if c != 0)]
    out.append(" obj: " + (" ".join(obj) if obj else f"0 {names[0]}"))
    out.append("Subject To")
    for i, row in enumerate(lp.rows):
        items = sorted(row.items())
        lhs = " ".join(term(a, names[j], k == 0) for k, (j, a) in enumerate(items))
        rel = {"<=": "<=", ">=": ">=", "=": "="}[lp.senses[i]]
        out.append(f" {lp.row_name(i).replace(',', '_')}: {lhs} {rel} {float(lp.b[i]):.17g}")
    out.append("Bounds")
    for j, (lo, up) in enumerate(zip(lp.lower, lp.upper)):
        if lo is None and up is None:
            out.append(f" {names[j]} free")
        else:
            lo_s = "-inf" if lo is None else f"{float(lo):.17g}"
            up_s = "+inf" if up is None else f"{float(up):.17g}"
            out.append(f" {lo_s} <= {names[j]} <= {up_s}")
    out.append("End")
    return "\n".join(out) + "\n"

