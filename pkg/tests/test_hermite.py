import cmath

import numpy as np
import pytest

from fuchsmono.elliptic import wp, zeta_w
from fuchsmono.errors import DegenerateError, DomainError
from fuchsmono.hermite import (C_from_H, H_from_C, HKData, accessory_from_hk, apparent_C, apparent_C_l0,
                               d2_f_hk, d_f_hk, f_hk, hg_l0_residual, hk_from_accessory, phi, q_poly)

from conftest import cell_points

LAM, MU = 2.0, 1 / 3


@pytest.fixture
def hk(lattice):
    return hk_from_accessory(LAM, MU, lattice)


@pytest.mark.filterwarnings("ignore:divide by zero")
def test_phi_vanishes_at_alpha(hk):
    L = hk.lattice
    assert abs(phi(0, hk.alpha, hk.alpha, L)) < 1e-13
    assert abs(phi(0, hk.alpha + 0.1, hk.alpha, L)) > 1e-3


def test_phi_shift(hk):
    L = hk.lattice
    x = 0.13 + 0.07j
    for i in (1, 2, 3):
        w = L.half_period(i)
        want = phi(0, x + w, hk.alpha, L) * cmath.exp(-zeta_w(hk.alpha, L) * w)
        assert phi(i, x, hk.alpha, L) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("j", [1, 3])
def test_multiplier(hk, j):
    L = hk.lattice
    x = 0.21 + 0.11j
    ratio = f_hk(x + 2 * L.half_period(j), hk) / f_hk(x, hk)
    assert ratio == pytest.approx(hk.multiplier(j), rel=1e-11)


@pytest.mark.parametrize("sign", [1, -1])
def test_round_trip(lattice, sign):
    hk = hk_from_accessory(LAM, MU, lattice, sign)
    assert hk.curve_residual() < 1e-9
    lam, mu = accessory_from_hk(hk)
    assert lam == pytest.approx(LAM, abs=1e-11)
    assert mu == pytest.approx(MU, abs=1e-11)


def test_sign_flip_negates(lattice):
    a = hk_from_accessory(LAM, MU, lattice, 1)
    b = hk_from_accessory(LAM, MU, lattice, -1)
    assert b.kappa == pytest.approx(-a.kappa, rel=1e-12)
    # -alpha up to the lattice
    assert wp(a.alpha + b.alpha + 0.3, lattice) == pytest.approx(wp(0.3, lattice), rel=1e-9)


def test_kappa_over_wp_prime(hk):
    from fuchsmono.elliptic import wp_prime
    L = hk.lattice
    assert hk.kappa / wp_prime(hk.alpha, L) == pytest.approx(-MU / (L.e2 - L.e1), rel=1e-11)


def test_q_poly_and_kappa(hk):
    L = hk.lattice
    d = L.e2 - L.e1
    assert hk.kappa**2 == pytest.approx(-d * d * q_poly(LAM, MU, L) / (4 * MU**2), rel=1e-12)


def test_half_period_degeneration(lattice):
    from fuchsmono.elliptic import wp_prime
    hk = hk_from_accessory(2.0, 0.25, lattice)     # 2 lambda mu = 1, exact in binary
    assert abs(hk.kappa) < 1e-12
    assert abs(wp_prime(hk.alpha, lattice)) < 1e-10
    assert wp(hk.alpha, lattice) == pytest.approx(lattice.e1, rel=1e-12)
    with pytest.raises(DegenerateError):
        accessory_from_hk(hk)


def test_mu_zero_rejected(lattice):
    with pytest.raises(DomainError):
        hk_from_accessory(1.5, 0, lattice)


def test_l0_residual(hk, rng):
    L = hk.lattice
    for x in cell_points(L, rng, 20):
        f, df, d2f = f_hk(x, hk), d_f_hk(x, hk), d2_f_hk(x, hk)
        scale = max(abs(f), abs(df), abs(d2f))
        assert abs(hg_l0_residual(x, f, df, d2f, LAM, MU, L)) < 1e-7 * scale


def test_wrong_C_fails(hk):
    L = hk.lattice
    x = 0.3 + 0.2j
    f, df, d2f = f_hk(x, hk), d_f_hk(x, hk), d2_f_hk(x, hk)
    C = apparent_C_l0(LAM, MU, L) + 0.1
    assert abs(hg_l0_residual(x, f, df, d2f, LAM, MU, L, C)) > 1e-3 * abs(f)


def test_derivatives_by_differences(hk):
    x, h = 0.27 + 0.19j, 1e-3

    def diff(g):
        return (-g(x + 2 * h, hk) + 8 * g(x + h, hk) - 8 * g(x - h, hk) + g(x - 2 * h, hk)) / (12 * h)

    assert d_f_hk(x, hk) == pytest.approx(diff(f_hk), rel=1e-8)
    assert d2_f_hk(x, hk) == pytest.approx(diff(d_f_hk), rel=1e-8)


def test_apparent_C_reduces_at_l0(lattice):
    for lam, mu in [(LAM, MU), (0.3 + 0.4j, -1.2), (2.5j, 0.7 - 0.1j)]:
        assert apparent_C((0, 0, 0, 0), lam, mu, lattice) == pytest.approx(
            apparent_C_l0(lam, mu, lattice), rel=1e-13)


def test_C_H_round_trip(lattice):
    l = (1, 0, 2, 1)
    C = C_from_H(l, 0.4 + 0.1j, 1.3, -0.7 + 0.2j, lattice)
    assert H_from_C(l, 0.4 + 0.1j, 1.3, C, lattice) == pytest.approx(-0.7 + 0.2j, rel=1e-13)


def test_to_dict(hk):
    assert set(hk.to_dict()) == {"alpha", "kappa", "b0"}
    assert isinstance(hk, HKData)
