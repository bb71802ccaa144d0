"""Dense two-phase simplex solver with dual and Farkas certificates.

Problems are stated as

    minimize    c @ x
    subject to  A[i] @ x  (<= | = | >=)  b[i]
                lower <= x <= upper

and brought to standard form internally (shifted/reflected/split variables,
explicit rows for finite upper bounds, slack and artificial columns).
Pricing uses Dantzig's rule for a bounded number of pivots and then falls back
to Bland's rule, so a fixed input always follows the same pivot path.

Sign conventions for the returned certificates:

* Optimal: ``dual`` holds row prices ``y`` with ``y[i] >= 0`` on ``>=`` rows,
  ``y[i] <= 0`` on ``<=`` rows; ``c - A.T @ y`` are the reduced costs.
* Infeasible: ``dual`` holds multipliers with the same sign pattern such that
  the aggregated row ``(A.T @ y) @ x >= y @ b`` cannot be met by any ``x``
  inside the bounds (see :func:`farkas_gap`).
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

FEASIBILITY_TOL = 1e-9
DUALITY_GAP_TOL = 1e-7
PIVOT_TOL = 1e-11
REDUCED_COST_TOL = 1e-10

_RELATIONS = ("<=", "=", ">=")

_feasibility_tol = contextvars.ContextVar("feasibility_tol", default=FEASIBILITY_TOL)


@contextlib.contextmanager
def feasibility_tolerance(tol: float):
    """Temporarily change the phase-one infeasibility threshold (context-local)."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    token = _feasibility_tol.set(float(tol))
    try:
        yield
    finally:
        _feasibility_tol.reset(token)


class LpError(Exception):
    """Base class for solver failures."""


class LpShapeError(LpError, ValueError):
    """Raised for malformed problem dimensions or relations."""


class LpNumericalError(LpError):
    """Raised when pivoting stalls or the final basis fails re-validation."""


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LpProblem:
    """A dense linear program. Variables default to ``x >= 0``."""

    objective: np.ndarray
    matrix: np.ndarray
    relations: Sequence[str]
    rhs: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        if c.ndim != 1:
            raise LpShapeError("objective must be a vector")
        nvar = c.size
        A = np.asarray(self.matrix, dtype=float)
        if A.size == 0:
            A = A.reshape(0, nvar)
        if A.ndim != 2:
            raise LpShapeError("constraint matrix must be two-dimensional")
        if A.shape[1] != nvar:
            raise LpShapeError(
                f"constraint rows have length {A.shape[1]}, objective has {nvar}")
        b = np.atleast_1d(np.asarray(self.rhs, dtype=float)).reshape(-1)
        rel = tuple(self.relations)
        if not (A.shape[0] == b.size == len(rel)):
            raise LpShapeError(
                f"{A.shape[0]} rows, {b.size} right-hand sides, {len(rel)} relations")
        bad = [r for r in rel if r not in _RELATIONS]
        if bad:
            raise LpShapeError(f"unknown relation(s) {bad}; expected one of {_RELATIONS}")
        lo = np.zeros(nvar) if self.lower is None else np.asarray(self.lower, dtype=float)
        hi = np.full(nvar, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        lo = np.broadcast_to(lo, (nvar,)).copy()
        hi = np.broadcast_to(hi, (nvar,)).copy()
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise LpShapeError("bounds must not be NaN")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise LpShapeError("objective, matrix and rhs must be finite")
        object.__setattr__(self, "objective", _frozen(c))
        object.__setattr__(self, "matrix", _frozen(A))
        object.__setattr__(self, "rhs", _frozen(b))
        object.__setattr__(self, "relations", rel)
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(hi))

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_rows(self) -> int:
        return self.rhs.size


@dataclass(frozen=True)
class LpOutcome:
    status: Status
    x: Optional[np.ndarray] = None
    objective: float = float("nan")
    dual: Optional[np.ndarray] = None
    ray: Optional[np.ndarray] = None
    iterations: int = 0
    basis: tuple = field(default=(), repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    @property
    def infeasible(self) -> bool:
        return self.status is Status.INFEASIBLE


# ---------------------------------------------------------------------------
# standard form


@dataclass
class _StandardForm:
    A: np.ndarray           # m x N, rows already sign-normalized (b >= 0)
    b: np.ndarray
    c: np.ndarray           # length N (structural + slack + artificial)
    c0: float
    basis: list             # initial basis: one identity column per row
    artificial: np.ndarray  # bool mask over columns
    n_struct: int           # columns that map back to user variables
    to_user: np.ndarray     # n_user x n_struct
    offset: np.ndarray      # x_user = offset + to_user @ x_struct
    row_flip: np.ndarray    # +-1 per row (user rows first, then bound rows)
    n_user_rows: int


def _standardize(p: LpProblem) -> _StandardForm:
    n = p.num_vars
    cols = []          # columns of to_user
    offset = np.zeros(n)
    bound_rows = []    # (struct column index, capacity)
    for j in range(n):
        lo, hi = p.lower[j], p.upper[j]
        e = np.zeros(n)
        e[j] = 1.0
        if np.isfinite(lo):
            offset[j] = lo
            cols.append(e)
            if np.isfinite(hi):
                bound_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append(-e)
        else:
            cols.append(e)
            cols.append(-e)
    S = np.column_stack(cols) if cols else np.zeros((n, 0))
    ns = S.shape[1]

    A_user = p.matrix @ S
    b_user = p.rhs - p.matrix @ offset
    rows = [A_user]
    rhs = [b_user]
    rel = list(p.relations)
    if bound_rows:
        B = np.zeros((len(bound_rows), ns))
        cap = np.zeros(len(bound_rows))
        for k, (col, width) in enumerate(bound_rows):
            B[k, col] = 1.0
            cap[k] = width
        rows.append(B)
        rhs.append(cap)
        rel += ["<="] * len(bound_rows)
    A = np.vstack(rows) if rows else np.zeros((0, ns))
    b = np.concatenate(rhs) if rhs else np.zeros(0)
    m = b.size

    flip = np.where(b < 0, -1.0, 1.0)
    A = A * flip[:, None]
    b = b * flip
    rel = [r if f > 0 else {"<=": ">=", ">=": "<=", "=": "="}[r] for r, f in zip(rel, flip)]

    extra = []
    is_art = []
    basis = [0] * m
    for i, r in enumerate(rel):
        e = np.zeros(m)
        e[i] = 1.0
        if r == "<=":
            extra.append(e)
            is_art.append(False)
            basis[i] = ns + len(extra) - 1
        elif r == ">=":
            extra.append(-e)
            is_art.append(False)
            extra.append(e)
            is_art.append(True)
            basis[i] = ns + len(extra) - 1
        else:
            extra.append(e)
            is_art.append(True)
            basis[i] = ns + len(extra) - 1
    E = np.column_stack(extra) if extra else np.zeros((m, 0))
    full = np.hstack([A, E])
    art = np.concatenate([np.zeros(ns, dtype=bool), np.array(is_art, dtype=bool)])
    c = np.zeros(full.shape[1])
    c[:ns] = p.objective @ S
    return _StandardForm(full, b, c, float(p.objective @ offset), basis, art, ns,
                         S, offset, flip, p.num_rows)


# ---------------------------------------------------------------------------
# pivoting


def _pivot(T: np.ndarray, r: int, q: int) -> None:
    T[r] /= T[r, q]
    col = T[:, q].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


class _Unbounded(Exception):
    def __init__(self, column):
        self.column = column


def _run_simplex(T, basis, cost, allowed, dantzig_budget, max_iter):
    """Minimize ``cost @ x`` over the tableau. Returns the pivot count."""
    m = T.shape[0]
    it = 0
    use_bland = False
    degenerate_streak = 0
    while True:
        d = cost - cost[basis] @ T[:, :-1]
        cand = np.flatnonzero(allowed & (d < -REDUCED_COST_TOL))
        if cand.size == 0:
            return it
        if it >= max_iter:
            raise LpNumericalError(
                f"simplex did not terminate within {max_iter} pivots")
        if use_bland:
            q = int(cand[0])
        else:
            q = int(cand[np.argmin(d[cand])])
        col = T[:, q]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            raise _Unbounded(q)
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        if best <= 1e-12:
            degenerate_streak += 1
        else:
            degenerate_streak = 0
        _pivot(T, r, q)
        basis[r] = q
        it += 1
        if not use_bland and (it >= dantzig_budget or degenerate_streak > m + 5):
            use_bland = True


def solve(problem: LpProblem, *, dantzig_budget: Optional[int] = None) -> LpOutcome:
    """Solve ``problem`` with the two-phase simplex method.

    Raises
    ------
    LpNumericalError
        If pivoting does not terminate or the final basis does not reproduce a
        feasible point within tolerance.
    """
    if not isinstance(problem, LpProblem):
        raise LpShapeError("expected an LpProblem")
    sf = _standardize(problem)
    m, N = sf.A.shape
    if dantzig_budget is None:
        dantzig_budget = 10 * (m + N) + 50
    max_iter = dantzig_budget + 200 * (m + N) + 1000

    T = np.hstack([sf.A, sf.b[:, None]])
    basis = list(sf.basis)
    init_cols = list(sf.basis)
    iterations = 0

    bscale = max(1.0, float(np.max(np.abs(sf.b), initial=0.0)))
    feas_tol = _feasibility_tol.get()

    # phase one
    if sf.artificial.any():
        c1 = sf.artificial.astype(float)
        iterations += _run_simplex(T, basis, c1, np.ones(N, dtype=bool),
                                   dantzig_budget, max_iter)
        w = float(c1[basis] @ T[:, -1])
        if w > feas_tol * bscale:
            pi = c1[basis] @ T[:, init_cols]
            y = (pi * sf.row_flip)[: sf.n_user_rows]
            return LpOutcome(Status.INFEASIBLE, dual=y, iterations=iterations,
                             basis=tuple(basis))
        for r in range(m):
            if sf.artificial[basis[r]]:
                cand = np.flatnonzero(~sf.artificial & (np.abs(T[r, :-1]) > 1e-9))
                if cand.size:
                    q = int(cand[np.argmax(np.abs(T[r, cand]))])
                    _pivot(T, r, q)
                    basis[r] = q
                    iterations += 1

    # phase two
    allowed = ~sf.artificial
    try:
        iterations += _run_simplex(T, basis, sf.c, allowed, dantzig_budget, max_iter)
    except _Unbounded as ub:
        r_std = np.zeros(N)
        r_std[ub.column] = 1.0
        for i, bi in enumerate(basis):
            r_std[bi] -= T[i, ub.column]
        ray = sf.to_user @ r_std[: sf.n_struct]
        return LpOutcome(Status.UNBOUNDED, ray=ray, objective=-np.inf,
                         iterations=iterations, basis=tuple(basis))

    # re-derive the basic solution from the original data
    Bmat = sf.A[:, basis]
    try:
        xb = np.linalg.solve(Bmat, sf.b)
        pi = np.linalg.solve(Bmat.T, sf.c[basis])
    except np.linalg.LinAlgError:
        xb = T[:, -1].copy()
        pi = sf.c[basis] @ T[:, init_cols]
    if np.any(xb < -1e-7 * bscale):
        xb = T[:, -1].copy()
        pi = sf.c[basis] @ T[:, init_cols]
    xs = np.zeros(N)
    xs[basis] = np.maximum(xb, 0.0)
    x = sf.offset + sf.to_user @ xs[: sf.n_struct]
    y = (pi * sf.row_flip)[: sf.n_user_rows]
    outcome = LpOutcome(Status.OPTIMAL, x=x, objective=float(problem.objective @ x),
                        dual=y, iterations=iterations, basis=tuple(basis))
    viol = primal_violation(problem, x)
    xscale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
    if viol > max(feas_tol, FEASIBILITY_TOL) * bscale * xscale * 10:
        raise LpNumericalError(
            f"final basis violates constraints by {viol:.3e}")
    return outcome


def feasibility(problem: LpProblem) -> LpOutcome:
    """Phase-one check: ``Optimal`` (feasible, with a point) or ``Infeasible``."""
    zero = LpProblem(np.zeros(problem.num_vars), problem.matrix, problem.relations,
                     problem.rhs, problem.lower, problem.upper)
    return solve(zero)


# ---------------------------------------------------------------------------
# certificate checks


def primal_violation(problem: LpProblem, x: np.ndarray) -> float:
    """Largest violation of any row or bound at ``x`` (0 when feasible)."""
    x = np.asarray(x, dtype=float)
    worst = 0.0
    if problem.num_rows:
        ax = problem.matrix @ x
        for val, rel, rhs in zip(ax, problem.relations, problem.rhs):
            if rel == "<=":
                worst = max(worst, val - rhs)
            elif rel == ">=":
                worst = max(worst, rhs - val)
            else:
                worst = max(worst, abs(val - rhs))
    worst = max(worst, float(np.max(problem.lower - x, initial=0.0)))
    worst = max(worst, float(np.max(x - problem.upper, initial=0.0)))
    return worst


def _sign_violation(problem: LpProblem, y: np.ndarray) -> float:
    worst = 0.0
    for yi, rel in zip(y, problem.relations):
        if rel == ">=":
            worst = max(worst, -yi)
        elif rel == "<=":
            worst = max(worst, yi)
    return worst


def _box_extreme(g: np.ndarray, problem: LpProblem, *, maximize: bool,
                 tol: float) -> float:
    """sup (or inf) of ``g @ x`` over the variable box; +-inf when unbounded."""
    total = 0.0
    for gj, lo, hi in zip(g, problem.lower, problem.upper):
        if abs(gj) <= tol:
            continue
        pick = hi if (gj > 0) == maximize else lo
        if not np.isfinite(pick):
            return np.inf if maximize else -np.inf
        total += gj * pick
    return total


def farkas_gap(problem: LpProblem, y: np.ndarray, tol: float = DUALITY_GAP_TOL) -> float:
    """How strongly ``y`` proves infeasibility.

    Every feasible ``x`` satisfies ``(A.T @ y) @ x >= y @ b`` when ``y`` has the
    row sign pattern described in the module docstring. The returned value is
    ``y @ b - sup_{x in box} (A.T @ y) @ x``; it is positive exactly when no
    point of the box can satisfy the aggregated row, i.e. the certificate is
    valid. Sign-pattern violations beyond ``tol`` give ``-inf``.
    """
    y = np.asarray(y, dtype=float)
    if _sign_violation(problem, y) > tol:
        return -np.inf
    g = problem.matrix.T @ y
    sup = _box_extreme(g, problem, maximize=True, tol=tol)
    return float(y @ problem.rhs - sup)


def dual_objective(problem: LpProblem, y: np.ndarray, tol: float = 1e-9) -> float:
    """Lagrangian dual value ``y @ b + min_{x in box} (c - A.T @ y) @ x``."""
    y = np.asarray(y, dtype=float)
    d = problem.objective - problem.matrix.T @ y
    return float(y @ problem.rhs + _box_extreme(d, problem, maximize=False, tol=tol))
