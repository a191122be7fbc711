"""Hermite-Krichever ansatz: the sigma-quotients Phi_i and the explicit
solution exp(kappa x) Phi_0(x, alpha) of the elliptic-form equation when all
four l_i vanish."""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .elliptic import (PeriodLattice, log_sigma, wp, wp_inverse, wp_prime, zeta_w)
from .errors import DegenerateError, DomainError, NumericError
from .fuchsian import SecondOrderODE, ThetaParams, _dy1_ode


@dataclass(frozen=True)
class HKData:
    alpha: complex
    kappa: complex
    lattice: PeriodLattice
    b0: complex = 1.0

    def curve_residual(self) -> float:
        L = self.lattice
        w = wp(self.alpha, L)
        return abs(wp_prime(self.alpha, L) ** 2 - 4 * (w - L.e1) * (w - L.e2) * (w - L.e3))

    def multiplier(self, j: int) -> complex:
        """f_hk(x + 2 omega_j) / f_hk(x)."""
        L = self.lattice
        w, eta = L.half_period(j), L.eta(j)
        return cmath.exp(-2 * eta * self.alpha + 2 * w * zeta_w(self.alpha, L) + 2 * self.kappa * w)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "kappa": self.kappa, "b0": self.b0}


def phi(i: int, x, alpha: complex, L: PeriodLattice):
    """sigma(x + w_i - alpha)/sigma(x + w_i) * exp(zeta(alpha) x)."""
    w = L.half_period(i)
    x = np.asarray(x, dtype=complex)
    val = np.exp(log_sigma(x + w - alpha, L) - log_sigma(x + w, L) + zeta_w(alpha, L) * x)
    return complex(val) if val.ndim == 0 else val


def phi_logderiv(i: int, x, alpha: complex, L: PeriodLattice):
    w = L.half_period(i)
    return zeta_w(np.asarray(x) + w - alpha, L) - zeta_w(np.asarray(x) + w, L) + zeta_w(alpha, L)


def q_poly(lam: complex, mu: complex, L: PeriodLattice) -> complex:
    """The discriminant-like polynomial whose square root enters alpha and kappa."""
    t, d = L.t, L.e2 - L.e1
    return -2 * mu * (2 * lam * mu - 1) * (2 * (lam - 1) * mu - 1) * (2 * (lam - t) * mu - 1) / d


def _invert_alpha(w_target: complex, wp_target: complex, L: PeriodLattice) -> complex:
    # double roots of the cubic: alpha sits on a half-period
    for i in (1, 2, 3):
        if abs(w_target - L.e(i)) < 1e-10 * max(1.0, abs(L.e(i))) and abs(wp_target) < 1e-6:
            return L.half_period(i)
    a = wp_inverse(w_target, L, 1)
    if abs(wp_prime(a, L) - wp_target) > abs(wp_prime(a, L) + wp_target):
        a = -a
    return a


def hk_from_accessory(lam: complex, mu: complex, L: PeriodLattice, sign: int = 1,
                      b0: complex = 1.0) -> HKData:
    """(alpha, kappa) of the ansatz from the accessory pair (lambda, mu).

    ``sign`` flips the square root of -Q; both choices give solutions, and
    they are exchanged by (alpha, kappa) -> (-alpha, -kappa).
    """
    lam, mu = complex(lam), complex(mu)
    if mu == 0:
        raise DomainError("mu = 0 lies outside the chart of the ansatz")
    d = L.e2 - L.e1
    root = sign * cmath.sqrt(-q_poly(lam, mu, L))
    w_alpha = L.e1 + d * (lam - 1 / (2 * mu))
    wp_alpha = -d * d * root / (2 * mu * mu)
    kappa = d * root / (2 * mu)
    if abs(wp_alpha**2 - 4 * (w_alpha - L.e1) * (w_alpha - L.e2) * (w_alpha - L.e3)) > \
            1e-8 * max(1.0, abs(wp_alpha) ** 2):
        raise NumericError("(wp(alpha), wp'(alpha)) is not a point of the curve")
    alpha = _invert_alpha(w_alpha, wp_alpha, L)
    return HKData(complex(alpha), complex(kappa), L, complex(b0))


def accessory_from_hk(hk: HKData) -> tuple[complex, complex]:
    L = hk.lattice
    d = L.e2 - L.e1
    wpa = wp_prime(hk.alpha, L)
    if abs(hk.kappa) < 1e-14 or abs(wpa) < 1e-14:
        raise DegenerateError("kappa = 0 or wp'(alpha) = 0: (lambda, mu) not recoverable")
    lam = (wp(hk.alpha, L) - L.e1 - wpa / (2 * hk.kappa)) / d
    mu = -d * hk.kappa / wpa
    return lam, mu


def f_hk(x, hk: HKData):
    x = np.asarray(x, dtype=complex)
    val = hk.b0 * np.exp(hk.kappa * x) * phi(0, x, hk.alpha, hk.lattice)
    return complex(val) if np.ndim(val) == 0 else val


def d_f_hk(x, hk: HKData):
    return f_hk(x, hk) * (hk.kappa + phi_logderiv(0, x, hk.alpha, hk.lattice))


def d2_f_hk(x, hk: HKData):
    L = hk.lattice
    g = hk.kappa + phi_logderiv(0, x, hk.alpha, L)
    dg = -wp(np.asarray(x) - hk.alpha, L) + wp(x, L)
    return f_hk(x, hk) * (g * g + dg)


def apparent_C_l0(lam: complex, mu: complex, L: PeriodLattice) -> complex:
    """Constant C making x = +-delta apparent when all l_i = 0."""
    t = L.t
    return 2 * (2 * lam * (lam - 1) * (lam - t) * mu**2 - (3 * lam**2 - 2 * (1 + t) * lam + t) * mu) * (L.e2 - L.e1)


def hg_l0_residual(x, f, df, d2f, lam, mu, L: PeriodLattice, C: complex | None = None):
    """Residual of the l = 0 elliptic-form equation at x."""
    C = apparent_C_l0(lam, mu, L) if C is None else C
    d = L.e2 - L.e1
    wd = L.e1 + d * lam
    den = wp(x, L) - wd
    return (-d2f + wp_prime(x, L) / den * df
            - 4 * mu * lam * (lam - 1) * (lam - L.t) * d * d / den * f + C * f)


# --- general l: the elliptic-form constant C and its z-form equation --------


def _l_rest(l: Sequence[int], lam, L: PeriodLattice):
    l0, l1, l2, l3 = l
    e1, e2, e3 = L.e1, L.e2, L.e3
    return ((l1 + l2 + l3 + l0 + 1) * (l1 + l2 + l3 - l0) * e3
            - 2 * (l1 * l2 * e3 + l2 * l3 * e1 + l3 * l1 * e2)
            + 2 * (l1 + l2 + l3) * ((e2 - e1) * lam + e1)
            + l1 * (l1 + 2) * e1 + l2 * (l2 + 2) * e2 + l3 * (l3 + 2) * e3)


def C_from_H(l: Sequence[int], lam, mu, H, L: PeriodLattice) -> complex:
    """C of the elliptic form expressed through the accessory parameter H."""
    t = L.t
    return 4 * (L.e2 - L.e1) * (lam * (1 - lam) * mu - t * (1 - t) * H) + _l_rest(l, lam, L)


def H_from_C(l: Sequence[int], lam, mu, C, L: PeriodLattice) -> complex:
    t = L.t
    return (4 * (L.e2 - L.e1) * lam * (1 - lam) * mu + _l_rest(l, lam, L) - C) / (4 * (L.e2 - L.e1) * t * (1 - t))


def apparent_C(l: Sequence[int], lam, mu, L: PeriodLattice) -> complex:
    """C for which x = +-delta are apparent singular points (general integer l)."""
    l0, l1, l2, l3 = l
    e1, e2, e3 = L.e1, L.e2, L.e3
    t, d = L.t, e2 - e1
    return (4 * d * lam * (lam - 1) * (lam - t) * mu
            * (mu - (l1 + 0.5) / lam - (l2 + 0.5) / (lam - 1) - (l3 + 0.5) / (lam - t))
            + l1 * (l1 + 2) * e1 + l2 * (l2 + 2) * e2 + l3 * (l3 + 2) * e3
            + (d * lam + e1) * ((l1 + l2 + l3 + l0 + 2) * (l1 + l2 + l3 - l0 + 1) - 2)
            - 2 * (l1 * l2 * e3 + l2 * l3 * e1 + l3 * l1 * e2))


def theta_from_l(l: Sequence[int]) -> ThetaParams:
    l0, l1, l2, l3 = l
    return ThetaParams(l1 + 0.5, l2 + 0.5, l3 + 0.5, -l0 + 0.5)


def elliptic_form_zode(l: Sequence[int], lam, mu, C, L: PeriodLattice) -> SecondOrderODE:
    """The elliptic-form equation with constant C, written in z = tilde-wp(x)
    for y1 = z^(l1/2)(z-1)^(l2/2)(z-t)^(l3/2) f."""
    P = theta_from_l(l)
    H = H_from_C(l, lam, mu, C, L)
    return _dy1_ode(P.theta0, P.theta1, P.thetat, P.kappa1, P.kappa2, lam, mu, L.t, H)
