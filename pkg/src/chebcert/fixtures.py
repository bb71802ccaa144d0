"""Embedded example problems used by ``cheb demo`` and the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .approx import Dataset
from .poly_basis import MonomialBasis, enumerate_monomials


@dataclass(frozen=True)
class Example:
    name: str
    description: str
    basis: MonomialBasis
    dataset: Dataset
    coefficients: np.ndarray | None  # None: fit first


def _signed_dataset(positive, negative) -> Dataset:
    """Values +1 / -1 so that the zero model has exactly these extremal sets."""
    pts = list(positive) + list(negative)
    vals = [1.0] * len(positive) + [-1.0] * len(negative)
    return Dataset(pts, vals)


UNEVEN_POINTS = [(1.0, 1.0), (-1.0, 1.0), (0.0, -1.0), (0.0, 0.0)]
UNEVEN_VALUES = [0.0, 0.0, 0.0, 2.0]

CONIC_POSITIVE = [(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)]
CONIC_NEGATIVE = [(0.0, 1.0), (1.0, -1.0), (2.0, 1.0)]
# same configuration with the last negative point moved off the common conic
OFF_CONIC_NEGATIVE = [(0.0, 1.0), (1.0, -1.0), (2.0, 1.1)]


def uneven() -> Example:
    return Example(
        "uneven",
        "best linear fit of four planar points; one positive, three negative extremal points",
        enumerate_monomials(2, 1),
        Dataset(UNEVEN_POINTS, UNEVEN_VALUES),
        None)


def triangles() -> Example:
    return Example(
        "triangles",
        "two interleaved triangles under the quadratic lift (all six points on one conic)",
        enumerate_monomials(2, 2),
        _signed_dataset(CONIC_POSITIVE, CONIC_NEGATIVE),
        np.zeros(6))


def triangles_off_conic() -> Example:
    return Example(
        "triangles-off-conic",
        "the triangles with one point nudged off the conic: every line cut passes, "
        "the full quadratic condition fails",
        enumerate_monomials(2, 2),
        _signed_dataset(CONIC_POSITIVE, OFF_CONIC_NEGATIVE),
        np.zeros(6))


EXAMPLES = {e().name: e for e in (uneven, triangles, triangles_off_conic)}
