"""Discrete data, the linear-in-parameters model and its minimax fit."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .lp_core import LpNumericalError, LpProblem, solve
from .poly_basis import Basis

DEFAULT_EXTREMAL_RTOL = 1e-7


class ApproximationError(ValueError):
    """Raised for ill-posed inputs (empty data, vanishing error, shape mismatch)."""


@dataclass(frozen=True)
class Dataset:
    """Finite point set with target values. ``points`` has shape (k, d)."""

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim == 1:
            P = P.reshape(-1, 1)
        f = np.asarray(self.values, dtype=float).reshape(-1)
        if P.ndim != 2 or P.shape[1] < 1:
            raise ApproximationError("points must be a (k, d) array with d >= 1")
        if P.shape[0] != f.size:
            raise ApproximationError(
                f"{P.shape[0]} points but {f.size} values")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(f))):
            raise ApproximationError("points and values must be finite")
        if P.shape[0] > 1:
            _, first = np.unique(P, axis=0, return_index=True)
            if first.size != P.shape[0]:
                dup = sorted(set(range(P.shape[0])) - set(first.tolist()))
                raise ApproximationError(f"duplicate point(s) at index {dup}")
        P.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "values", f)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray
    error: float
    deviations: np.ndarray
    lp_objective: float


@dataclass(frozen=True)
class ExtremalSets:
    """Indices of maximal-deviation points split by the sign of ``f - L``."""

    positive: Tuple[int, ...]
    negative: Tuple[int, ...]
    error: float
    tolerance: float

    @property
    def one_sided(self) -> bool:
        return not self.positive or not self.negative


def _check(basis: Basis, coefficients, dataset: Dataset | None = None):
    A = np.asarray(coefficients, dtype=float).reshape(-1)
    if A.size != basis.size:
        raise ApproximationError(
            f"{A.size} coefficients for a basis of size {basis.size}")
    if dataset is not None and dataset.dimension != basis.dimension:
        raise ApproximationError(
            f"dataset dimension {dataset.dimension} does not match basis dimension {basis.dimension}")
    return A


def evaluate_model(basis: Basis, coefficients, point) -> float:
    """``a_0 + sum a_i g_i(x)`` at a single point."""
    A = _check(basis, coefficients)
    x = np.asarray(point, dtype=float).reshape(-1)
    if x.size != basis.dimension:
        raise ApproximationError(
            f"point dimension {x.size} does not match basis dimension {basis.dimension}")
    return float(A @ basis.lift(x))


def deviations(basis: Basis, coefficients, dataset: Dataset) -> np.ndarray:
    """Signed deviations ``f(x) - L(A, x)`` at every data point."""
    A = _check(basis, coefficients, dataset)
    return dataset.values - basis.lift(dataset.points) @ A


def uniform_error(basis: Basis, coefficients, dataset: Dataset) -> float:
    if len(dataset) == 0:
        raise ApproximationError("empty dataset")
    return float(np.max(np.abs(deviations(basis, coefficients, dataset))))


def minimax_lp(basis: Basis, dataset: Dataset) -> LpProblem:
    """LP over ``(a_0..a_n, z)``: minimize ``z`` with ``|f_k - L(A, x_k)| <= z``."""
    G = basis.lift(dataset.points)
    k, p = G.shape
    ones = np.ones((k, 1))
    matrix = np.vstack([np.hstack([-G, -ones]), np.hstack([G, -ones])])
    rhs = np.concatenate([-dataset.values, dataset.values])
    c = np.zeros(p + 1)
    c[-1] = 1.0
    lower = np.full(p + 1, -np.inf)
    lower[-1] = 0.0
    return LpProblem(c, matrix, ["<="] * (2 * k), rhs, lower=lower)


def fit_minimax(basis: Basis, dataset: Dataset) -> FitResult:
    """Best uniform approximation of ``dataset`` in the span of ``basis``.

    The coefficient vector is the vertex reached by the deterministic simplex;
    when the optimal face is not a single point, other minimizers exist.
    """
    if len(dataset) == 0:
        raise ApproximationError("empty dataset")
    _check(basis, np.zeros(basis.size), dataset)
    if len(dataset) < basis.size + 1:
        warnings.warn(
            f"{len(dataset)} points for {basis.size} coefficients; the fit interpolates",
            stacklevel=2)
    out = solve(minimax_lp(basis, dataset))
    if not out.optimal:
        raise LpNumericalError(f"minimax LP reported {out.status.value}")
    A = out.x[:-1].copy()
    dev = deviations(basis, A, dataset)
    err = float(np.max(np.abs(dev)))
    scale = max(1.0, float(np.max(np.abs(dataset.values))))
    if abs(err - out.objective) > 1e-8 * scale:
        raise LpNumericalError(
            f"recomputed error {err!r} differs from LP optimum {out.objective!r}")
    return FitResult(A, err, dev, float(out.objective))


def default_extremal_tolerance(error: float, rtol: float = DEFAULT_EXTREMAL_RTOL) -> float:
    return rtol * max(1.0, error)


def extract_extremal_sets(basis: Basis, coefficients, dataset: Dataset,
                          tolerance: float | None = None) -> ExtremalSets:
    """Points whose deviation is within ``tolerance`` of the uniform error."""
    dev = deviations(basis, coefficients, dataset)
    err = float(np.max(np.abs(dev)))
    tol = default_extremal_tolerance(err) if tolerance is None else float(tolerance)
    if tol <= 0:
        raise ApproximationError("tolerance must be positive")
    if err <= tol:
        raise ApproximationError(
            "approximation error below tolerance; extremal signs undefined")
    pos = tuple(int(i) for i in np.flatnonzero(dev >= err - tol))
    neg = tuple(int(i) for i in np.flatnonzero(dev <= -err + tol))
    return ExtremalSets(pos, neg, err, tol)
