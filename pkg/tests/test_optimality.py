import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chebcert import (Dataset, OptimalityCertificate, caratheodory_reduce,
                      check_isolability, descent_direction, enumerate_monomials,
                      extract_extremal_sets, fit_minimax, uniform_error, verify_optimality)
from chebcert.fixtures import (CONIC_NEGATIVE, CONIC_POSITIVE, OFF_CONIC_NEGATIVE,
                               UNEVEN_POINTS, UNEVEN_VALUES)
from chebcert.optimality import (Verdict, check_certificate, check_witness,
                                 hull_intersection, hulls_intersect, line_search,
                                 max_margin_separation, zero_in_subdifferential)

LINEAR = enumerate_monomials(2, 1)
QUAD = enumerate_monomials(2, 2)


@pytest.fixture
def uneven():
    return Dataset(UNEVEN_POINTS, UNEVEN_VALUES)


def test_uneven_optimum_certificate(uneven):
    v = verify_optimality(LINEAR, [1, 0, 0], uneven, 1e-9)
    assert v.optimal and v.witness is None
    c = v.certificate
    assert c.weights("+") == pytest.approx({3: 1.0})
    assert c.weights("-") == pytest.approx({0: 0.25, 1: 0.25, 2: 0.5}, abs=1e-7)
    assert c.support_size == 4
    G = LINEAR.lift(uneven.points)
    assert check_certificate(c, G, G) <= 1e-7


def test_uneven_suboptimal_coefficients(uneven):
    v = verify_optimality(LINEAR, [0.5, 0, 0], uneven, 1e-9)
    assert not v.optimal and v.certificate is None
    assert v.extremal.positive == (3,) and v.extremal.negative == ()
    h = descent_direction(LINEAR, [0.5, 0, 0], uneven, v.witness)
    assert line_search(LINEAR, [0.5, 0, 0], uneven, h)[1] < 1.5


def test_descent_from_zero_raises_constant(uneven):
    A = np.zeros(3)
    v = verify_optimality(LINEAR, A, uneven)
    h = descent_direction(LINEAR, A, uneven, v.witness)
    assert h[0] > 0
    t, err = line_search(LINEAR, A, uneven, h)
    assert err < uniform_error(LINEAR, A, uneven) - 1e-12


def test_optimum_has_no_witness(uneven):
    v = verify_optimality(LINEAR, [1, 0, 0], uneven)
    assert v.witness is None
    E = uneven.points
    assert check_isolability(E[[3]], E[[0, 1, 2]], LINEAR) is None


def test_verdict_requires_exactly_one_payload(uneven):
    ext = extract_extremal_sets(LINEAR, [1, 0, 0], uneven)
    with pytest.raises(ValueError):
        Verdict(True, ext)


def test_two_point_isolation_is_the_bisector():
    w = check_isolability([(0.0, 0.0)], [(1.0, 0.0)], LINEAR)
    assert w is not None
    # normal over (x2, x1); the zero set of -x1 + 1/2 is the line x1 = 1/2
    assert w.normal == pytest.approx([0.0, -1.0])
    assert w.offset == pytest.approx(-0.5)
    assert w.margin == pytest.approx(0.5)


def test_isolability_with_one_empty_side():
    w = check_isolability([(0.0, 0.0)], np.zeros((0, 2)), LINEAR)
    assert w.as_coefficients().tolist() == [1.0, 0.0, 0.0]
    with pytest.raises(ValueError):
        check_isolability(np.zeros((0, 2)), np.zeros((0, 2)), LINEAR)


def test_conic_triangles_hulls_meet():
    # all six points lie on the conic 2*x1^2 + x2^2 - 4*x1 - x2 = 0
    P, N = QUAD.lift(CONIC_POSITIVE), QUAD.lift(CONIC_NEGATIVE)
    cert, witness = hull_intersection(P, N)
    assert witness is None
    assert check_certificate(cert, P, N) <= 1e-7
    assert check_isolability(CONIC_POSITIVE, CONIC_NEGATIVE, QUAD) is None


def test_off_conic_triangles_are_isolable():
    P, N = QUAD.lift(CONIC_POSITIVE), QUAD.lift(OFF_CONIC_NEGATIVE)
    cert, witness = hull_intersection(P, N)
    assert cert is None
    assert check_witness(witness, P, N)
    w = check_isolability(CONIC_POSITIVE, OFF_CONIC_NEGATIVE, QUAD)
    q = w.as_coefficients()
    assert np.all(P @ q > 0) and np.all(N @ q < 0)


def test_max_margin_returns_none_for_overlapping_sets():
    P = LINEAR.lift([(0, 0), (2, 0), (0, 2)])
    N = LINEAR.lift([(0.5, 0.5)])
    assert max_margin_separation(P, N) is None


def test_hulls_intersect_raw_points():
    assert hulls_intersect([(0, 0), (2, 2)], [(0, 2), (2, 0)])
    assert not hulls_intersect([(0, 0), (1, 0)], [(0, 1), (1, 1)])


def _cert(pos, neg):
    return OptimalityCertificate(tuple(pos), tuple(neg), 0.0)


def test_caratheodory_keeps_small_support():
    P = LINEAR.lift([(0.0, 0.0)])
    N = LINEAR.lift([(0.0, 0.0)])
    out = caratheodory_reduce(_cert([(0, 1.0)], [(0, 1.0)]), P, N)
    assert out.positive == ((0, 1.0),) and out.negative == ((0, 1.0),)


def test_caratheodory_merges_duplicates():
    pts = [(1.0, 1.0), (-1.0, 1.0), (0.0, -1.0)]
    P = LINEAR.lift([(0.0, 0.0)])
    N = LINEAR.lift(pts)
    cert = _cert([(0, 1.0)], [(0, 0.125), (0, 0.125), (1, 0.25), (2, 0.5)])
    out = caratheodory_reduce(cert, P, N)
    assert out.weights("-") == pytest.approx({0: 0.25, 1: 0.25, 2: 0.5})
    assert out.support_size == 4


def test_caratheodory_random_large_support():
    rng = np.random.default_rng(7)
    # both clouds surround the origin, so each hull contains it
    Pp = rng.normal(size=(4, 2))
    Pn = rng.normal(size=(4, 2))
    Pp -= Pp.mean(axis=0)
    Pn -= Pn.mean(axis=0)
    P, N = LINEAR.lift(Pp), LINEAR.lift(Pn)
    cert = _cert([(i, 0.25) for i in range(4)], [(i, 0.25) for i in range(4)])
    assert cert.support_size == 2 * (LINEAR.n + 2)
    before = check_certificate(cert, P, N)
    out = caratheodory_reduce(cert, P, N)
    assert out.support_size <= LINEAR.n + 2
    assert check_certificate(out, P, N) <= 1e-7
    assert before <= 1e-12
    # the common point stays inside both hulls
    matched = sum(w * P[i] for i, w in out.positive)
    x = matched[[2, 1]]  # lift order is (1, x2, x1)
    assert hulls_intersect(Pp, [x]) and hulls_intersect(Pn, [x])


def test_caratheodory_keeps_point_when_support_allows():
    # a segment crossing a segment: support 4 = n + 2 already, nothing to drop
    P = LINEAR.lift([(-1.0, 0.0), (1.0, 0.0)])
    N = LINEAR.lift([(0.0, -1.0), (0.0, 1.0)])
    cert = _cert([(0, 0.5), (1, 0.5)], [(0, 0.5), (1, 0.5)])
    out = caratheodory_reduce(cert, P, N)
    assert out.point == pytest.approx([1.0, 0.0, 0.0])
    assert out.support_size == 4


def test_caratheodory_rejects_invalid_certificate():
    P = LINEAR.lift([(0.0, 0.0)])
    N = LINEAR.lift([(1.0, 0.0)])
    with pytest.raises(ValueError):
        caratheodory_reduce(_cert([(0, 1.0)], [(0, 1.0)]), P, N)


def _instance(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 3))
    m = int(rng.integers(1, 3 if d == 2 else 4))
    k = int(rng.integers(4, 10))
    pts = np.unique(rng.uniform(-1, 1, size=(k, d)).round(3), axis=0)
    return enumerate_monomials(d, m), Dataset(pts, rng.normal(size=len(pts))), rng


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_verdicts_agree_and_validate(seed, perturb):
    basis, ds, rng = _instance(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = fit_minimax(basis, ds)
    if fit.error < 1e-6:
        return
    A = fit.coefficients + (0.2 * rng.normal(size=basis.size) if perturb else 0.0)
    v = verify_optimality(basis, A, ds)
    G = basis.lift(ds.points)
    ext = v.extremal
    assert v.optimal == zero_in_subdifferential(basis, A, ds)
    if v.optimal:
        c = v.certificate
        assert check_certificate(c, G, G) <= 1e-7
        assert c.support_size <= basis.n + 2
        assert uniform_error(basis, A, ds) == pytest.approx(fit.error, abs=1e-7)
    else:
        assert check_witness(v.witness, G[list(ext.positive)], G[list(ext.negative)]) \
            or ext.one_sided
        h = descent_direction(basis, A, ds, v.witness)
        assert line_search(basis, A, ds, h) is not None


def test_descent_for_univariate_quadratic():
    rng = np.random.default_rng(2)
    x = np.linspace(-1, 1, 9)
    ds = Dataset(x, np.abs(x) + 0.1 * rng.normal(size=9))
    basis = enumerate_monomials(1, 2)
    best = fit_minimax(basis, ds).error
    for _ in range(20):
        A = rng.normal(size=3)
        v = verify_optimality(basis, A, ds)
        assert not v.optimal
        h = descent_direction(basis, A, ds, v.witness)
        t, err = line_search(basis, A, ds, h)
        assert best <= err < uniform_error(basis, A, ds)
