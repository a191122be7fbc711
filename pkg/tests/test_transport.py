import cmath
from fractions import Fraction as F

import numpy as np
import pytest

from fuchsmono.fuchsian import ThetaParams, build_system
from fuchsmono.transport import (GeometryError, PathPolyline, circle_path, continue_frame,
                                 cyclic_relation_residual, direct_infinity, loop_matrix,
                                 loop_polyline, monodromy_group)
from fuchsmono.errors import DomainError


class Euler:
    """Y' = (A/z) Y; monodromy around 0 is exp(2 pi i A)."""
    singularities = [0j]

    def __init__(self, a, b):
        self.A = np.diag([a, b]).astype(complex)

    def __call__(self, z):
        return self.A / z


class Flat:
    singularities = [2 + 0j]

    def __call__(self, z):
        return np.array([[0, 1], [-1 / (z - 2), 0]], dtype=complex)


BASE = 0.5 - 0.5j
PTS = [0j, 1 + 0j, 3 + 0j]


@pytest.fixture(scope="module")
def picard_sys():
    return build_system(ThetaParams(0, 0, 0, 1), F(1, 3), F(2, 5), F(1), F(3))


@pytest.fixture(scope="module")
def picard_group(picard_sys):
    return monodromy_group(picard_sys, BASE, labels=["0", "1", "t"])


def test_euler_loop():
    a, b = 0.3 + 0.1j, -0.45
    path = loop_polyline(1 + 0j, 0j)
    M, err = loop_matrix(Euler(a, b), path)
    want = np.diag([cmath.exp(2j * np.pi * a), cmath.exp(2j * np.pi * b)])
    assert np.abs(M - want).max() < 1e-9
    assert err < 1e-8


def test_contractible_loop_is_identity():
    path = circle_path(0.5 + 0j, 0.3)
    M, _ = loop_matrix(Flat(), path, estimate_error=False)
    assert np.abs(M - np.eye(2)).max() < 1e-10


def test_reversal_inverts():
    path = loop_polyline(1 + 0j, 0j)
    obj = Euler(0.21, 0.6j)
    M, _ = loop_matrix(obj, path, estimate_error=False)
    R, _ = loop_matrix(obj, path.reversed(), estimate_error=False)
    assert np.abs(M @ R - np.eye(2)).max() < 1e-9


def test_concatenation_composes(picard_sys):
    p0 = loop_polyline(BASE, 0j, PTS[:2] + [complex(picard_sys.t)])
    p1 = loop_polyline(BASE, 1 + 0j, PTS[:2] + [complex(picard_sys.t)])
    M0, _ = loop_matrix(picard_sys, p0, estimate_error=False)
    M1, _ = loop_matrix(picard_sys, p1, estimate_error=False)
    M01, _ = loop_matrix(picard_sys, p0 + p1, estimate_error=False)
    assert np.abs(M01 - M1 @ M0).max() < 1e-8


@pytest.mark.parametrize("k", range(3))
def test_winding_numbers(k):
    path = loop_polyline(BASE, PTS[k], PTS)
    for j, p in enumerate(PTS):
        assert path.winding_number(p) == pytest.approx(1.0 if j == k else 0.0, abs=1e-12)


def test_clearance_violations():
    with pytest.raises(GeometryError):
        loop_polyline(BASE, 0j, [0j, 0.05 + 0j], clearance=0.1)
    with pytest.raises(GeometryError):
        loop_polyline(0.01 + 0j, 0j, PTS, clearance=0.05)
    with pytest.raises(GeometryError):
        continue_frame(Flat(), PathPolyline((1 + 0j, 3 + 0j), clearance=0.1), np.eye(2))


def test_bad_tolerance():
    with pytest.raises(DomainError):
        continue_frame(Flat(), PathPolyline((0j, 1 + 0j)), np.eye(2), tol=0)


def test_picard_local_monodromy_unipotent(picard_group):
    for lab in ("0", "1", "t"):
        N = picard_group[lab].matrix - np.eye(2)
        assert np.abs(N @ N).max() < 1e-8
        assert np.linalg.det(picard_group[lab].matrix) == pytest.approx(1, abs=1e-9)
    # theta_inf = 1: eigenvalues -1, -1
    assert np.trace(picard_group["inf"].matrix) == pytest.approx(-2, abs=1e-8)


def test_integer_thetas_det_one():
    s = build_system(ThetaParams(1, 1, 1, 4), F(2), F(1, 3), F(1), F(3))
    res = monodromy_group(s, BASE, estimate_error=False)
    for r in res.values():
        assert abs(np.linalg.det(r.matrix) - 1) < 1e-8


def test_trace_independent_of_frame(picard_sys, picard_group):
    rng = np.random.default_rng(3)
    Y0 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    other = monodromy_group(picard_sys, BASE, labels=["0", "1", "t"], Y0=Y0, estimate_error=False)
    a = np.trace(picard_group["0"].matrix @ picard_group["1"].matrix)
    b = np.trace(other["0"].matrix @ other["1"].matrix)
    assert abs(a - b) < 1e-8


def test_cyclic_relation_and_direct_infinity(picard_sys, picard_group):
    from fuchsmono.transport import _fan_order
    order = [["0", "1", "t"][i] for i in _fan_order(BASE, PTS)]
    assert cyclic_relation_residual(picard_group, order) < 1e-12
    Minf = direct_infinity(picard_sys, BASE)
    assert np.abs(Minf - picard_group["inf"].matrix).max() < 1e-8


def test_generic_eigenvalues():
    th = ThetaParams(F(1, 5), F(2, 7), F(-1, 3), F(3, 4))
    s = build_system(th, F(1, 2), F(3), F(2), F(3))
    res = monodromy_group(s, BASE, estimate_error=False)
    for lab, th_i in zip(("0j", "(1+0j)", "(3+0j)"), (th.theta0, th.theta1, th.thetat)):
        ev = np.sort_complex(np.linalg.eigvals(res[lab].matrix))
        want = np.sort_complex(np.array([1, cmath.exp(2j * np.pi * float(th_i))]))
        assert np.abs(ev - want).max() < 1e-8


def test_error_shrinks_with_tolerance(picard_sys):
    path = loop_polyline(BASE, 0j, PTS)
    ref, _ = loop_matrix(picard_sys, path, tol=1e-13, estimate_error=False)
    errs = [np.abs(loop_matrix(picard_sys, path, tol=tol, estimate_error=False)[0] - ref).max()
            for tol in (1e-5, 1e-8, 1e-11)]
    assert errs[0] > errs[2]
    assert errs[2] < 1e-9
