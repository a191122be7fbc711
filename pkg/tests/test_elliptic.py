import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fuchsmono.elliptic import (lattice_from_t, lattice_from_tau, log_sigma, sigma, tilde_wp,
                                tilde_wp_inverse, wp, wp_inverse, wp_prime, zeta_w)
from fuchsmono.errors import DegenerateError, DomainError, PoleError

from conftest import cell_points


def mp_wp(x, tau, scale=1.0):
    """wp from mpmath's theta functions (independent of the package's series)."""
    with mp.workdps(30):
        w1 = mp.mpc(scale) / 2
        q = mp.exp(1j * mp.pi * mp.mpc(tau))
        c = mp.pi / (2 * w1)
        d1 = mp.jtheta(1, 0, q, 1)
        d3 = mp.jtheta(1, 0, q, 3)
        eta1 = -mp.pi**2 * d3 / (12 * w1 * d1)
        v = c * mp.mpc(x)
        th = mp.jtheta(1, v, q)
        l1 = mp.jtheta(1, v, q, 1) / th
        l2 = mp.jtheta(1, v, q, 2) / th
        return complex(-eta1 / w1 - c**2 * (l2 - l1**2))


@pytest.mark.parametrize("tau", [0.2 + 1.1j, 1.3j, -0.4 + 0.9j, 0.45 + 0.6j])
def test_wp_matches_mpmath_theta_oracle(tau):
    L = lattice_from_tau(tau)
    rng = np.random.default_rng(7)
    for x in cell_points(L, rng, 8):
        ref = mp_wp(x, tau)
        assert abs(wp(x, L) - ref) < 1e-10 * max(1.0, abs(ref))


def test_square_lattice_is_lemniscatic():
    L = lattice_from_tau(1j)
    assert abs(L.e2) < 1e-12
    assert abs(L.e1 + L.e3) < 1e-12
    assert L.legendre_residual() < 1e-12


def test_branch_values_and_sum(lattice):
    L = lattice
    assert abs(L.e1 + L.e2 + L.e3) < 1e-11
    for i in (1, 2, 3):
        assert abs(wp(L.half_period(i), L) - L.e(i)) < 1e-10


def test_legendre_relation(lattice):
    assert lattice.legendre_residual() < 1e-10


@pytest.mark.parametrize("scale", [1.0, 0.7 - 0.3j, 2.5j])
def test_scaled_lattices(scale):
    L = lattice_from_tau(0.3 + 1.2j, scale)
    assert L.legendre_residual() < 1e-10
    ref = lattice_from_tau(0.3 + 1.2j)
    # homogeneity wp(s x; s L) = wp(x; L) / s^2
    x = 0.21 + 0.13j
    assert abs(wp(scale * x, L) - wp(x, ref) / scale**2) < 1e-10 * abs(wp(x, ref))


def test_wp_differential_equation(lattice, rng):
    L = lattice
    xs = np.array(cell_points(L, rng, 100))
    w, dw = wp(xs, L), wp_prime(xs, L)
    res = np.abs(dw**2 - 4 * (w - L.e1) * (w - L.e2) * (w - L.e3)) / np.maximum(1, np.abs(dw) ** 2)
    assert res.max() < 1e-9


def test_wp_prime_central_difference(lattice):
    L = lattice
    x = 0.37 * L.omega1 + 0.52 * L.omega3
    errs = []
    for h in (1e-2, 5e-3):
        fd = (wp(x + h, L) - wp(x - h, L)) / (2 * h)
        errs.append(abs(fd - wp_prime(x, L)))
    assert errs[1] < errs[0] / 3.5       # O(h^2)


def test_zeta_derivative_is_minus_wp(lattice):
    L = lattice
    x = 0.41 * L.omega1 + 0.33 * L.omega3
    h = 1e-4
    fd = (zeta_w(x + h, L) - zeta_w(x - h, L)) / (2 * h)
    assert abs(fd + wp(x, L)) < 1e-6 * abs(wp(x, L))


def test_sigma_quasi_periodicity(lattice, rng):
    L = lattice
    for x in cell_points(L, rng, 10):
        for j in (1, 3):
            w, eta = L.half_period(j), L.eta(j)
            lhs = sigma(x + 2 * w, L)
            rhs = -sigma(x, L) * cmath.exp(2 * eta * (x + w))
            assert abs(lhs - rhs) < 1e-9 * abs(rhs)


def test_zeta_quasi_periodicity(lattice, rng):
    L = lattice
    for x in cell_points(L, rng, 10):
        for j in (1, 3):
            assert abs(zeta_w(x + 2 * L.half_period(j), L) - zeta_w(x, L) - 2 * L.eta(j)) < 1e-9


def test_sigma_is_odd_and_normalised(lattice):
    L = lattice
    x = 0.3 + 0.1j
    assert abs(sigma(-x, L) + sigma(x, L)) < 1e-14
    eps = 1e-6
    assert abs(sigma(eps, L) / eps - 1) < 1e-10


def test_log_sigma_far_from_cell(lattice):
    L = lattice
    x = 0.2 + 0.1j + 6 * L.omega1 - 4 * L.omega3
    assert abs(cmath.exp(log_sigma(x, L)) - sigma(x, L)) < 1e-9 * abs(sigma(x, L))


def test_tilde_wp_at_half_periods(lattice):
    L = lattice
    assert abs(tilde_wp(L.omega1, L)) < 1e-10
    assert abs(tilde_wp(L.omega2, L) - 1) < 1e-10
    assert abs(tilde_wp(L.omega3, L) - L.t) < 1e-10


def test_tilde_wp_round_trip_and_branch(lattice):
    L = lattice
    z = 2 + 1j
    for b in (1, -1):
        x = tilde_wp_inverse(z, L, b)
        assert abs(tilde_wp(x, L) - z) < 1e-10
    x1, x2 = tilde_wp_inverse(z, L, 1), tilde_wp_inverse(z, L, -1)
    assert abs(wp_prime(x1, L) + wp_prime(x2, L)) < 1e-8


def test_tilde_wp_even(lattice):
    x = 0.33 - 0.12j
    assert abs(tilde_wp(-x, lattice) - tilde_wp(x, lattice)) < 1e-12


def test_wp_inverse_rejects_bad_branch(lattice):
    with pytest.raises(DomainError):
        wp_inverse(1.0, lattice, branch=2)


def test_pole_raises(lattice):
    with pytest.raises(PoleError):
        wp(2 * lattice.omega1, lattice)


def test_lattice_from_tau_rejects_lower_half_plane():
    with pytest.raises(DomainError):
        lattice_from_tau(-1j)


def test_t_minus_one_is_square():
    L = lattice_from_t(-1)
    assert abs(L.t + 1) < 1e-10
    # square lattice up to Gamma(2): g3 = 0
    g3 = 4 * L.e1 * L.e2 * L.e3
    assert abs(g3) < 1e-9 * max(abs(L.e(i)) for i in (1, 2, 3)) ** 3


@pytest.mark.parametrize("t", [0.5, 2 + 1j, -3 + 0.2j, 0.1 - 0.7j])
def test_lattice_from_t_round_trip(t):
    L = lattice_from_t(t)
    assert abs(L.t - t) < 1e-10 * max(1, abs(t))
    tau = L.tau
    assert abs(tau.real) <= 1 + 1e-9 and abs(tau - 0.5) >= 0.5 - 1e-9


def test_lattice_from_tau_then_t_matches_e_multiset():
    L = lattice_from_tau(0.3 + 0.8j)
    M = lattice_from_t(L.t)
    # same t; e's agree up to the common scale fixed by omega1 = 1/2 and Gamma(2)
    assert abs(M.t - L.t) < 1e-10
    ratio = (M.e2 - M.e1) / (L.e2 - L.e1)
    assert abs((M.e3 - M.e1) - ratio * (L.e3 - L.e1)) < 1e-9 * abs(M.e3 - M.e1)


def test_lattice_from_t_degenerate():
    with pytest.raises(DegenerateError):
        lattice_from_t(1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(0.5, 2.0), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_property_wp_ode_and_legendre(re, im, a, b):
    L = lattice_from_tau(complex(re, im))
    assert L.legendre_residual() < 1e-10
    x = 2 * (a * L.omega1 + b * L.omega3)
    w, dw = wp(x, L), wp_prime(x, L)
    assert abs(dw**2 - 4 * (w - L.e1) * (w - L.e2) * (w - L.e3)) < 1e-9 * max(1, abs(dw) ** 2)
