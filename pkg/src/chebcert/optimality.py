"""Optimality certificates and separation witnesses for minimax fits.

A coefficient vector is a best uniform approximation exactly when the convex
hulls of the lifted positive and negative extremal points meet. The hull test
is a phase-one LP; a feasible point is turned into a sparse certificate, an
infeasibility proof into a separating hyperplane (an isolating model function)
which also gives a direction of descent for the uniform error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .approx import (ApproximationError, Dataset, ExtremalSets, _check,
                     extract_extremal_sets, uniform_error)
from .lp_core import LpNumericalError, LpProblem, feasibility, solve
from .poly_basis import Basis

CERTIFICATE_TOL = 1e-7
WEIGHT_EPS = 1e-12


@dataclass(frozen=True)
class OptimalityCertificate:
    """Convex weights on both extremal sets whose lifted combinations coincide.

    ``positive`` and ``negative`` hold ``(point index, weight)`` pairs; indices
    refer to rows of the lifted arrays the certificate was built from.
    """

    positive: Tuple[Tuple[int, float], ...]
    negative: Tuple[Tuple[int, float], ...]
    residual: float
    point: np.ndarray = field(repr=False, default=None)

    @property
    def support_size(self) -> int:
        return len(self.positive) + len(self.negative)

    def weights(self, side: str) -> dict:
        return dict(self.positive if side == "+" else self.negative)


@dataclass(frozen=True)
class SeparationWitness:
    """Hyperplane ``<normal, tail(x)> - offset`` over the non-constant coordinates.

    Positive extremal points satisfy ``>= margin`` and negative ones
    ``<= -margin``. Read as coefficients ``(-offset, *normal)`` it is a model
    function positive on one set and negative on the other.
    """

    normal: np.ndarray
    offset: float
    margin: float

    def as_coefficients(self) -> np.ndarray:
        return np.concatenate([[-self.offset], self.normal])

    def values(self, lifted: np.ndarray) -> np.ndarray:
        lifted = np.atleast_2d(lifted)
        return lifted[:, 1:] @ self.normal - self.offset


@dataclass(frozen=True)
class Verdict:
    optimal: bool
    extremal: ExtremalSets
    certificate: Optional[OptimalityCertificate] = None
    witness: Optional[SeparationWitness] = None

    def __post_init__(self):
        if (self.certificate is None) == (self.witness is None):
            raise ValueError("exactly one of certificate / witness must be set")


# ---------------------------------------------------------------------------
# hull intersection


def _hull_lp(P: np.ndarray, N: np.ndarray) -> LpProblem:
    """Variables (alpha, beta) >= 0 with P.T alpha = N.T beta, sum alpha = sum beta = 1."""
    kp, kn = P.shape[0], N.shape[0]
    rows = np.hstack([P.T, -N.T])
    unit_p = np.concatenate([np.ones(kp), np.zeros(kn)])
    unit_n = np.concatenate([np.zeros(kp), np.ones(kn)])
    A = np.vstack([rows, unit_p, unit_n])
    b = np.concatenate([np.zeros(P.shape[1]), [1.0, 1.0]])
    return LpProblem(np.zeros(kp + kn), A, ["="] * A.shape[0], b)


def hull_intersection(P, N, *, reduce: bool = True):
    """Test whether ``co(P)`` and ``co(N)`` intersect.

    Returns ``(certificate, None)`` or ``(None, witness)``. Certificate indices
    are row indices into ``P`` and ``N``. The witness separates the full
    coordinates of the rows of ``P`` and ``N``; callers pass lifted points whose
    first (constant) column is dropped by prefixing a column of ones.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    N = np.atleast_2d(np.asarray(N, dtype=float))
    if P.shape[0] == 0 or N.shape[0] == 0:
        raise ValueError("both point sets must be non-empty")
    if P.shape[1] != N.shape[1]:
        raise ValueError("point sets live in different dimensions")
    problem = _hull_lp(P, N)
    out = feasibility(problem)
    if out.optimal:
        kp = P.shape[0]
        alpha, beta = out.x[:kp], out.x[kp:]
        cert = _make_certificate(P, N, np.flatnonzero(alpha > WEIGHT_EPS),
                                 alpha, np.flatnonzero(beta > WEIGHT_EPS), beta)
        if reduce:
            cert = caratheodory_reduce(cert, P, N)
        return cert, None
    return None, _witness_from_farkas(P, N, out.dual)


def _make_certificate(P, N, pidx, alpha, nidx, beta) -> OptimalityCertificate:
    a = np.asarray(alpha, dtype=float)[pidx]
    b = np.asarray(beta, dtype=float)[nidx]
    a = a / a.sum()
    b = b / b.sum()
    hp = a @ P[pidx]
    hn = b @ N[nidx]
    return OptimalityCertificate(
        tuple((int(i), float(w)) for i, w in zip(pidx, a)),
        tuple((int(i), float(w)) for i, w in zip(nidx, b)),
        float(np.max(np.abs(hp - hn))),
        0.5 * (hp + hn))


def _orient(P, N, u):
    p = P @ u
    q = N @ u
    offset = 0.5 * (p.min() + q.max())
    margin = 0.5 * (p.min() - q.max())
    return offset, margin


def _witness_from_farkas(P, N, y) -> SeparationWitness:
    # y = (w, s, t): w over hull rows; P w <= -s, N w >= t, s + t > 0,
    # so -w (restricted to non-constant coordinates) puts P above N.
    w = np.asarray(y[: P.shape[1]], dtype=float)
    u = -w[1:]
    scale = float(np.max(np.abs(u), initial=0.0))
    if scale == 0.0:
        raise LpNumericalError("Farkas certificate has a vanishing normal")
    u = u / scale
    offset, margin = _orient(P[:, 1:], N[:, 1:], u)
    if margin <= 0:
        # the dual vector was too loose; fall back to margin maximization
        witness = max_margin_separation(P, N)
        if witness is None:
            raise LpNumericalError("hull LP infeasible but no separating hyperplane found")
        return witness
    return SeparationWitness(u, float(offset), float(margin))


def max_margin_separation(P, N, tol: float = 1e-9) -> Optional[SeparationWitness]:
    """Hyperplane with ``|normal|_inf <= 1`` maximizing the separation margin.

    Rows of ``P`` and ``N`` are lifted points (first column constant). Among
    the margin-optimal hyperplanes the one with the smallest ``|normal|_1`` is
    returned, which keeps witnesses sparse and reproducible. Returns ``None``
    when the best margin is not above ``tol``.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))[:, 1:]
    N = np.atleast_2d(np.asarray(N, dtype=float))[:, 1:]
    n, kp, kn = P.shape[1], P.shape[0], N.shape[0]
    # stage 1 variables: u (n, in [-1, 1]), offset (free), margin (<= 1)
    c = np.zeros(n + 2)
    c[-1] = -1.0
    A = np.vstack([np.hstack([P, -np.ones((kp, 1)), -np.ones((kp, 1))]),
                   np.hstack([N, -np.ones((kn, 1)), np.ones((kn, 1))])])
    rel = [">="] * kp + ["<="] * kn
    lower = np.concatenate([-np.ones(n), [-np.inf, -np.inf]])
    upper = np.concatenate([np.ones(n), [np.inf, 1.0]])
    out = solve(LpProblem(c, A, rel, np.zeros(kp + kn), lower, upper))
    if not out.optimal:
        raise LpNumericalError(f"margin LP reported {out.status.value}")
    best = -out.objective
    if best <= tol or not np.any(out.x[:n]):
        return None
    # stage 2: u = up - um with up, um in [0, 1]; minimize sum(up + um)
    # keeping the margin at its optimum
    floor = best * (1 - 1e-9)
    c2 = np.concatenate([np.ones(2 * n), [0.0]])
    A2 = np.vstack([np.hstack([P, -P, -np.ones((kp, 1))]),
                    np.hstack([N, -N, -np.ones((kn, 1))])])
    b2 = np.concatenate([np.full(kp, floor), np.full(kn, -floor)])
    lower2 = np.concatenate([np.zeros(2 * n), [-np.inf]])
    upper2 = np.concatenate([np.ones(2 * n), [np.inf]])
    out2 = solve(LpProblem(c2, A2, rel, b2, lower2, upper2))
    u = out2.x[:n] - out2.x[n:2 * n] if out2.optimal else out.x[:n]
    u = u / np.max(np.abs(u))
    offset, margin = _orient(P, N, u)
    if margin <= tol:
        return None
    return SeparationWitness(u, float(offset), float(margin))


# ---------------------------------------------------------------------------
# Caratheodory sparsification


def caratheodory_reduce(cert: OptimalityCertificate, P, N) -> OptimalityCertificate:
    """Shrink the support of ``cert`` to at most ``dim + 1`` points.

    ``P`` and ``N`` are the lifted point arrays the indices refer to; ``dim`` is
    their column count (``n + 1``). Repeatedly moves along a null vector of the
    support columns until some weight hits zero. The two lifted combinations
    stay equal throughout, but their common point may move inside the
    intersection: pinning it would need up to ``dim`` points per side.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    N = np.atleast_2d(np.asarray(N, dtype=float))
    check_certificate(cert, P, N)
    pw, nw = {}, {}
    for i, w in cert.positive:
        pw[i] = pw.get(i, 0.0) + w
    for i, w in cert.negative:
        nw[i] = nw.get(i, 0.0) + w
    pidx = sorted(pw)
    nidx = sorted(nw)
    w = np.array([pw[i] for i in pidx] + [nw[i] for i in nidx])

    def columns(pi, ni):
        top = np.hstack([P[pi].T, -N[ni].T]) if (pi or ni) else np.zeros((P.shape[1], 0))
        u1 = np.concatenate([np.ones(len(pi)), np.zeros(len(ni))])
        u2 = np.concatenate([np.zeros(len(pi)), np.ones(len(ni))])
        return np.vstack([top, u1, u2])

    while True:
        M = columns(pidx, nidx)
        _, s, vt = np.linalg.svd(M)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
        if M.shape[1] <= rank:
            break
        z = vt[-1]
        if not np.any(z > 1e-14):
            z = -z
        ratios = np.where(z > 1e-14, w / np.where(z > 1e-14, z, 1.0), np.inf)
        hit = int(np.argmin(ratios))
        w = w - ratios[hit] * z
        w[hit] = 0.0
        keep = w > WEIGHT_EPS
        kp = len(pidx)
        pidx = [i for i, k in zip(pidx, keep[:kp]) if k]
        nidx = [i for i, k in zip(nidx, keep[kp:]) if k]
        w = w[keep]
    kp = len(pidx)
    alpha = np.zeros(P.shape[0])
    beta = np.zeros(N.shape[0])
    alpha[pidx] = w[:kp]
    beta[nidx] = w[kp:]
    return _make_certificate(P, N, np.array(pidx, dtype=int), alpha,
                             np.array(nidx, dtype=int), beta)


def check_certificate(cert: OptimalityCertificate, P, N, tol: float = CERTIFICATE_TOL) -> float:
    """Re-validate ``cert`` arithmetically; returns the hull-point mismatch."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    N = np.atleast_2d(np.asarray(N, dtype=float))
    if not cert.positive or not cert.negative:
        raise ValueError("certificate needs support on both sides")
    a = np.array([w for _, w in cert.positive])
    b = np.array([w for _, w in cert.negative])
    if np.any(a < -tol) or np.any(b < -tol):
        raise ValueError("certificate has negative weights")
    if abs(a.sum() - 1) > tol or abs(b.sum() - 1) > tol:
        raise ValueError("certificate weights do not sum to one")
    if a.max() <= 0 or b.max() <= 0:
        raise ValueError("certificate needs a positive weight on each side")
    hp = a @ P[[i for i, _ in cert.positive]]
    hn = b @ N[[i for i, _ in cert.negative]]
    mismatch = float(np.max(np.abs(hp - hn)))
    if mismatch > tol:
        raise ValueError(f"lifted combinations differ by {mismatch:.3e}")
    return mismatch


def check_witness(witness: SeparationWitness, P, N) -> bool:
    vp = witness.values(P)
    vn = witness.values(N)
    return bool(witness.margin > 0 and np.all(vp >= witness.margin * (1 - 1e-9))
                and np.all(vn <= -witness.margin * (1 - 1e-9)))


# ---------------------------------------------------------------------------
# public operations on fits


def _lifted_sets(basis: Basis, dataset: Dataset, ext: ExtremalSets):
    G = basis.lift(dataset.points)
    return G[list(ext.positive)], G[list(ext.negative)]


def _localize(cert: OptimalityCertificate, ext: ExtremalSets) -> OptimalityCertificate:
    """Map certificate indices from extremal-set rows to dataset indices."""
    return OptimalityCertificate(
        tuple((ext.positive[i], w) for i, w in cert.positive),
        tuple((ext.negative[i], w) for i, w in cert.negative),
        cert.residual, cert.point)


def verify_optimality(basis: Basis, coefficients, dataset: Dataset,
                      tolerance: float | None = None) -> Verdict:
    """Decide whether ``coefficients`` minimize the uniform error on ``dataset``.

    Certificate indices refer to dataset rows. With an empty positive or
    negative extremal set the answer is ``NotOptimal`` with a constant-shift
    witness (moving ``a_0`` toward the violated side lowers the error).
    """
    if len(dataset) == 0:
        raise ApproximationError("empty dataset")
    _check(basis, coefficients, dataset)
    ext = extract_extremal_sets(basis, coefficients, dataset, tolerance)
    if ext.one_sided:
        n = basis.size - 1
        offset = -1.0 if ext.positive else 1.0
        return Verdict(False, ext, witness=SeparationWitness(np.zeros(n), offset, 1.0))
    P, N = _lifted_sets(basis, dataset, ext)
    cert, witness = hull_intersection(P, N)
    if cert is not None:
        return Verdict(True, ext, certificate=_localize(cert, ext))
    return Verdict(False, ext, witness=witness)


def zero_in_subdifferential(basis: Basis, coefficients, dataset: Dataset,
                            tolerance: float | None = None) -> bool:
    """Direct test of ``0 in co{-lift(x): x in E+} u {lift(x): x in E-}``.

    Kept as an independent formulation of the hull test: one set of convex
    weights over signed subgradients instead of two unit-sum blocks.
    """
    ext = extract_extremal_sets(basis, coefficients, dataset, tolerance)
    G = basis.lift(dataset.points)
    S = np.vstack([-G[list(ext.positive)], G[list(ext.negative)]])
    A = np.vstack([S.T, np.ones(S.shape[0])])
    b = np.concatenate([np.zeros(S.shape[1]), [1.0]])
    out = feasibility(LpProblem(np.zeros(S.shape[0]), A, ["="] * A.shape[0], b))
    return out.optimal


def check_isolability(E_plus, E_minus, basis: Basis):
    """Isolability test: can a basis combination be positive on ``E_plus`` and negative on ``E_minus``?

    Returns a :class:`SeparationWitness` (isolable) or ``None`` (not isolable).
    Inputs are raw points in R^d. If one set is empty the constant function
    isolates them; both empty is an error.
    """
    Ep = np.asarray(E_plus, dtype=float).reshape(-1, basis.dimension)
    Em = np.asarray(E_minus, dtype=float).reshape(-1, basis.dimension)
    if Ep.size == 0 and Em.size == 0:
        raise ValueError("both point sets are empty")
    if Ep.size == 0 or Em.size == 0:
        return SeparationWitness(np.zeros(basis.size - 1), -1.0 if Ep.size else 1.0, 1.0)
    return max_margin_separation(basis.lift(Ep), basis.lift(Em))


def descent_direction(basis: Basis, coefficients, dataset: Dataset,
                      witness: SeparationWitness, *, halvings: int = 20) -> np.ndarray:
    """Direction ``h`` along which the uniform error strictly decreases.

    ``h`` is the witness read as coefficients: it raises the model on positive
    extremal points and lowers it on negative ones. A step ``t`` starting at
    ``1e-3 * error / |h|`` is halved until the error drops.
    """
    A = _check(basis, coefficients, dataset)
    h = witness.as_coefficients()
    if not np.any(h):
        raise ValueError("witness has a zero direction")
    if line_search(basis, A, dataset, h, halvings=halvings) is None:
        raise ArithmeticError("witness inconsistent: no descent within the halving budget")
    return h


def line_search(basis: Basis, coefficients, dataset: Dataset, h, *, halvings: int = 20):
    """Return ``(t, new_error)`` for the first accepted halving step, or ``None``."""
    A = np.asarray(coefficients, dtype=float)
    psi = uniform_error(basis, A, dataset)
    t = 1e-3 * psi / float(np.linalg.norm(h))
    for _ in range(halvings + 1):
        e = uniform_error(basis, A + t * h, dataset)
        if e < psi - 1e-12:
            return t, e
        t *= 0.5
    return None


def hulls_intersect(P: Sequence, N: Sequence) -> bool:
    """Plain convex-hull intersection of two raw point sets in R^d."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    N = np.atleast_2d(np.asarray(N, dtype=float))
    ones_p = np.ones((P.shape[0], 1))
    ones_n = np.ones((N.shape[0], 1))
    return feasibility(_hull_lp(np.hstack([ones_p, P]), np.hstack([ones_n, N]))).optimal
