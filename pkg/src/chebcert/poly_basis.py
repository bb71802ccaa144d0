"""Model bases: graded-lex monomials and user-supplied function lists.

A basis of size ``n + 1`` maps a point ``x`` in R^d to its lifted vector
``(1, g_1(x), ..., g_n(x))``; the leading constant carries ``a_0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Sequence, Tuple, Union

import numpy as np

ExponentVector = Tuple[int, ...]


def degree(e: ExponentVector) -> int:
    return sum(e)


def _check_exponents(e: Sequence[int]) -> ExponentVector:
    e = tuple(int(k) for k in e)
    if any(k < 0 for k in e):
        raise ValueError(f"exponents must be non-negative, got {e}")
    return e


def _compositions(total: int, parts: int):
    """All exponent tuples of length ``parts`` summing to ``total``, lex ascending."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def grlex_key(e: ExponentVector):
    return (sum(e),) + tuple(e)


@dataclass(frozen=True)
class MonomialBasis:
    """All monomials in ``dimension`` variables of total degree at most ``degree``.

    Ordered by total degree, then lexicographically on the exponent tuple, so
    for two variables and degree 2 the order is ``1, x2, x1, x2^2, x1 x2, x1^2``.
    """

    dimension: int
    degree: int
    monomials: Tuple[ExponentVector, ...] = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if not self.monomials:
            mons = tuple(e for m in range(self.degree + 1)
                         for e in _compositions(m, self.dimension))
            object.__setattr__(self, "monomials", mons)
        else:
            mons = tuple(_check_exponents(e) for e in self.monomials)
            if any(len(e) != self.dimension for e in mons):
                raise ValueError("exponent length differs from dimension")
            if len(set(mons)) != len(mons):
                raise ValueError("duplicate monomials")
            if any(sum(e) != 0 for e in mons[:1]):
                raise ValueError("the first monomial must be the constant 1")
            if any(sum(e) > self.degree for e in mons):
                raise ValueError(f"monomial of degree above {self.degree}")
            object.__setattr__(self, "monomials", mons)

    @property
    def size(self) -> int:
        return len(self.monomials)

    @property
    def n(self) -> int:
        """Number of non-constant basis functions."""
        return self.size - 1

    @property
    def names(self) -> list:
        return [monomial_name(e) for e in self.monomials]

    def index(self, e: Sequence[int]) -> int:
        return self.monomials.index(tuple(e))

    def lift(self, points) -> np.ndarray:
        """Evaluate every monomial; ``points`` is (d,) or (k, d)."""
        X = np.asarray(points, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.dimension:
            raise ValueError(
                f"point dimension {X.shape[1]} does not match basis dimension {self.dimension}")
        E = np.array(self.monomials, dtype=int)
        out = np.ones((X.shape[0], E.shape[0]))
        for j in range(self.dimension):
            out *= X[:, j:j + 1] ** E[None, :, j]
        out[:, 0] = 1.0
        return out[0] if single else out


def monomial_name(e: ExponentVector) -> str:
    parts = []
    for i, k in enumerate(e, start=1):
        if k == 1:
            parts.append(f"x{i}")
        elif k > 1:
            parts.append(f"x{i}^{k}")
    return "*".join(parts) if parts else "1"


@dataclass(frozen=True)
class CustomBasis:
    """User-supplied basis functions ``g_1 .. g_n`` (the constant is implicit).

    Each function takes a length-``dimension`` array and returns a float.
    """

    dimension: int
    functions: Tuple[Callable[[np.ndarray], float], ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        funcs = tuple(self.functions)
        if len(funcs) < 1:
            raise ValueError("a custom basis needs at least one function")
        object.__setattr__(self, "functions", funcs)
        labels = tuple(self.labels) or tuple(f"g{i}" for i in range(1, len(funcs) + 1))
        if len(labels) != len(funcs):
            raise ValueError("one label per basis function")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return len(self.functions) + 1

    @property
    def n(self) -> int:
        return len(self.functions)

    @property
    def names(self) -> list:
        return ["1", *self.labels]

    def lift(self, points) -> np.ndarray:
        X = np.asarray(points, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.dimension:
            raise ValueError(
                f"point dimension {X.shape[1]} does not match basis dimension {self.dimension}")
        out = np.ones((X.shape[0], self.size))
        for k, x in enumerate(X):
            for i, g in enumerate(self.functions, start=1):
                out[k, i] = float(g(x))
        return out[0] if single else out


Basis = Union[MonomialBasis, CustomBasis]


def enumerate_monomials(dimension: int, degree: int) -> MonomialBasis:
    """Graded-lex basis of all monomials of degree <= ``degree``.

    >>> enumerate_monomials(2, 2).monomials
    ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))
    """
    basis = MonomialBasis(dimension, degree)
    assert basis.size == comb(dimension + degree, degree)
    return basis


def lift(basis: Basis, point) -> np.ndarray:
    """The vector ``(1, g_1(x), ..., g_n(x))`` for one point (or rows for many)."""
    return basis.lift(point)


def basis_from_config(cfg: dict) -> MonomialBasis:
    """Build a basis from ``{"kind": "monomial", "dimension": d, "degree": m}``."""
    kind = cfg.get("kind", "monomial")
    if kind != "monomial":
        raise ValueError(f"unsupported basis kind {kind!r} in configuration")
    return enumerate_monomials(int(cfg["dimension"]), int(cfg["degree"]))


def shift_coordinates(points, j: int, delta: float) -> np.ndarray:
    """Return a copy of ``points`` with coordinate ``j`` replaced by ``x_j - delta``."""
    P = np.array(points, dtype=float)
    if P.ndim != 2:
        P = P.reshape(len(P), -1)
    if not 0 <= j < P.shape[1]:
        raise ValueError(f"coordinate index {j} out of range for dimension {P.shape[1]}")
    P[:, j] -= delta
    return P


def shift_lemma_residuals(alpha, a, x, beta, b, y, delta):
    """Residuals of the two premises and of the shifted identity.

    Premises: ``sum(alpha*a*x) == sum(beta*b*y)`` and ``sum(alpha*a) == sum(beta*b)``.
    Conclusion: ``sum(alpha*a*(x - delta)) == sum(beta*b*(y - delta))``.
    """
    alpha, a, x = (np.asarray(v, dtype=float) for v in (alpha, a, x))
    beta, b, y = (np.asarray(v, dtype=float) for v in (beta, b, y))
    first = float(np.sum(alpha * a * x) - np.sum(beta * b * y))
    second = float(np.sum(alpha * a) - np.sum(beta * b))
    lhs = float(np.sum(alpha * a * (x - delta)))
    rhs = float(np.sum(beta * b * (y - delta)))
    return first, second, lhs, rhs


def verify_shift_lemma(alpha, a, x, beta, b, y, delta, tol: float = 1e-9) -> bool:
    """True when the shifted identity holds to relative tolerance ``tol``.

    If both premises hold, the shifted sums agree for every ``delta`` since the
    shift only subtracts ``delta`` times the (equal) weighted totals.
    """
    _, _, lhs, rhs = shift_lemma_residuals(alpha, a, x, beta, b, y, delta)
    return abs(lhs - rhs) <= tol * (1.0 + abs(lhs))

