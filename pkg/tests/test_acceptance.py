"""Acceptance criteria, one test each, at the stated tolerances and time limits."""

import functools
import time
import warnings

import numpy as np
import pytest

from chebcert import (Dataset, SignedPointSet, check_isolability, cut_condition_check,
                      descent_direction, enumerate_monomials, fit_minimax, uniform_error,
                      verify_necessary_condition, verify_optimality, verify_shift_lemma)
from chebcert.fixtures import CONIC_NEGATIVE, CONIC_POSITIVE, UNEVEN_POINTS, UNEVEN_VALUES
from chebcert.lp_core import Status, feasibility
from chebcert.optimality import _hull_lp, check_certificate, line_search
from chebcert.reduction import alternation_count

from oracles import equioscillation_1d, minimax_by_circuits, shift_lemma_instance


def _fit(basis, ds):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fit_minimax(basis, ds)


def _signed(ds, ext, degree):
    idx = list(ext.positive) + list(ext.negative)
    return SignedPointSet(ds.points[idx], (1,) * len(ext.positive) + (-1,) * len(ext.negative),
                          degree, tuple(idx))


# instance families shared by the soundness and equivalence criteria

def uneven_instance():
    return enumerate_monomials(2, 1), Dataset(UNEVEN_POINTS, UNEVEN_VALUES)


def triangles_instance():
    ds = Dataset(CONIC_POSITIVE + CONIC_NEGATIVE, [1.0] * 3 + [-1.0] * 3)
    return enumerate_monomials(2, 2), ds, np.zeros(6)


@functools.lru_cache(maxsize=None)
def univariate_instances():
    rng = np.random.default_rng(20240601)
    out = []
    for _ in range(200):
        m = int(rng.integers(1, 4))
        k = int(rng.integers(6, 13))
        x = np.linspace(-1, 1, k)
        out.append((enumerate_monomials(1, m), Dataset(x, rng.normal(size=k))))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def small_instances():
    rng = np.random.default_rng(7)
    out = []
    for i in range(100):
        d = 1 + i % 2
        m = int(rng.integers(1, 6)) if d == 1 else int(rng.integers(1, 3))
        basis = enumerate_monomials(d, m)
        k = int(rng.integers(2, 9))
        pts = np.unique(rng.uniform(-1, 1, size=(k, d)).round(4), axis=0)
        out.append((basis, Dataset(pts, rng.normal(size=len(pts)))))
    return tuple(out)


def _perturbed(basis, ds, A, psi, rng):
    """Coefficients along a random direction with error at least 1.1 * psi."""
    h = rng.normal(size=basis.size)
    t = 0.01 * psi / np.linalg.norm(h)
    while uniform_error(basis, A + t * h, ds) < 1.1 * psi:
        t *= 2
    return A + t * h


@functools.lru_cache(maxsize=None)
def all_candidates():
    """(basis, dataset, coefficients) triples drawn from criteria 1 to 4."""
    rng = np.random.default_rng(99)
    out = []
    b, ds = uneven_instance()
    out += [(b, ds, np.array([1.0, 0, 0])), (b, ds, np.array([0.5, 0, 0])),
            (b, ds, np.zeros(3))]
    out.append(triangles_instance())
    for basis, ds in univariate_instances() + small_instances():
        fit = _fit(basis, ds)
        if fit.error <= 1e-7:
            continue
        out.append((basis, ds, fit.coefficients))
        out.append((basis, ds, _perturbed(basis, ds, fit.coefficients, fit.error, rng)))
    return tuple(out)


@pytest.mark.criterion(1, "uneven four-point example: error 1, Optimal, weights 1/4 1/4 1/2")
def test_criterion_1_uneven_example():
    t0 = time.perf_counter()
    basis, ds = uneven_instance()
    fit = fit_minimax(basis, ds)
    v = verify_optimality(basis, fit.coefficients, ds)
    elapsed = time.perf_counter() - t0
    assert abs(fit.error - 1.0) <= 1e-9
    assert v.optimal
    assert v.extremal.positive == (3,)
    assert set(v.extremal.negative) == {0, 1, 2}
    neg = v.certificate.weights("-")
    assert abs(neg[0] - 0.25) <= 1e-7 and abs(neg[1] - 0.25) <= 1e-7
    assert abs(neg[2] - 0.5) <= 1e-7
    assert v.certificate.weights("+") == pytest.approx({3: 1.0}, abs=1e-7)
    assert elapsed < 1.0


@pytest.mark.criterion(2, "interleaved triangles: lifted hull LP infeasible, every line cut feasible")
def test_criterion_2_triangles_counterexample():
    t0 = time.perf_counter()
    basis = enumerate_monomials(2, 2)
    out = feasibility(_hull_lp(basis.lift(CONIC_POSITIVE), basis.lift(CONIC_NEGATIVE)))
    cuts = cut_condition_check(SignedPointSet.from_sets(CONIC_POSITIVE, CONIC_NEGATIVE, 2))
    elapsed = time.perf_counter() - t0
    infeasible = out.status is Status.INFEASIBLE
    assert infeasible, ("full lifted condition is feasible for the stated points: "
                        f"common lifted point {out.x[:3] @ basis.lift(CONIC_POSITIVE)}")
    assert cuts.checks and all(c.feasible for c in cuts.checks)
    assert elapsed < 1.0


@pytest.mark.criterion(3, "univariate alternance: 200 grids, Optimal + reduction holds, perturbed NotOptimal")
def test_criterion_3_univariate_alternance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    failures = []
    for i, (basis, ds) in enumerate(univariate_instances()):
        m = basis.degree
        fit = fit_minimax(basis, ds)
        v = verify_optimality(basis, fit.coefficients, ds)
        ext = v.extremal
        s = _signed(ds, ext, m)
        alt = alternation_count(s.points[:, 0], s.signs)
        if alt < m + 2:
            failures.append((i, "alternance", alt, m))
        if not v.optimal:
            failures.append((i, "not optimal"))
        if not verify_necessary_condition(s).holds:
            failures.append((i, "reduction"))
        A = _perturbed(basis, ds, fit.coefficients, fit.error, rng)
        if verify_optimality(basis, A, ds).optimal:
            failures.append((i, "perturbed still optimal"))
    elapsed = time.perf_counter() - t0
    assert failures == []
    assert elapsed < 30.0


@pytest.mark.criterion(4, "LP minimax error matches subset-enumeration oracles within 1e-5")
def test_criterion_4_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for basis, ds in small_instances():
        assert basis.dimension <= 2 and basis.size <= 6 and len(ds) <= 8
        fit = _fit(basis, ds)
        if basis.dimension == 1:
            ref = equioscillation_1d(ds.points[:, 0], ds.values, basis.degree)
        else:
            ref = minimax_by_circuits(basis.lift(ds.points), ds.values)
        worst = max(worst, abs(fit.error - ref))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-5
    assert elapsed < 60.0


@pytest.mark.criterion(5, "certificates re-validate; every NotOptimal yields strict descent")
def test_criterion_5_soundness():
    optimal = not_optimal = 0
    for basis, ds, A in all_candidates():
        v = verify_optimality(basis, A, ds)
        if v.optimal:
            optimal += 1
            c = v.certificate
            G = basis.lift(ds.points)
            assert check_certificate(c, G, G) <= 1e-7
            assert c.support_size <= basis.n + 2
            assert abs(sum(w for _, w in c.positive) - 1) <= 1e-7
            assert abs(sum(w for _, w in c.negative) - 1) <= 1e-7
        else:
            not_optimal += 1
            h = descent_direction(basis, A, ds, v.witness, halvings=20)
            step = line_search(basis, A, ds, h, halvings=20)
            assert step is not None and step[1] < uniform_error(basis, A, ds)
    assert optimal > 100 and not_optimal > 100


@pytest.mark.criterion(6, "Optimal iff extremal sets not isolable, zero disagreements")
def test_criterion_6_isolability_equivalence():
    disagreements = []
    for i, (basis, ds, A) in enumerate(all_candidates()):
        v = verify_optimality(basis, A, ds)
        ext = v.extremal
        isolable = check_isolability(ds.points[list(ext.positive)],
                                     ds.points[list(ext.negative)], basis) is not None
        if v.optimal == isolable:
            disagreements.append(i)
    assert disagreements == []


@pytest.mark.criterion(7, "shift identity: 1000 instances x 10 shifts, residual <= 1e-9 relative")
def test_criterion_7_shift_lemma():
    rng = np.random.default_rng(1)
    bad = 0
    for _ in range(1000):
        inst = shift_lemma_instance(rng)
        for delta in rng.normal(scale=10, size=10):
            bad += not verify_shift_lemma(*inst, delta, tol=1e-9)
    assert bad == 0
