"""Quadrature for the sigma-function integral representations.

Every kernel here is an integral over the straight segment from 2*w_i - x
to x of N(xi) / sqrt(sigma(x - xi) sigma(x + xi)).  With xi = w_i + h*nu,
h = x - w_i, both endpoint zeros of the square root are linear in nu, so
Gauss-Jacobi nodes with exponents (-1/2, -1/2) absorb them exactly and the
remaining factor is smooth.

Branch of the square root: sqrt(R(nu)) with
R = sigma(x - xi) sigma(x + xi) / (h^2 (1 - nu^2)) is continued along the
real nu-axis from nu = 0, where it is pinned to an analytic expression in x
(sigma(x) for i = 0, -1j sigma(x - w_i) exp(eta_i x) / h otherwise).  This
makes every f_i analytic in x and fixes f_0 ~ sigma(-alpha) pi x at x = 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .elliptic import (PeriodLattice, sigma, tilde_wp, tilde_wp_inverse, wp, wp_prime, zeta_w)
from .errors import DomainError, NumericError, ParameterError

DEFAULT_ORDER = 64
_DENSE = 768


class PathDeformationError(NumericError):
    """A kernel pole sits on the path and no detour could be placed."""


class UnsupportedRegularizationError(ParameterError):
    def __init__(self, msg: str):
        super().__init__("kappa1", msg)


@lru_cache(maxsize=64)
def _jacobi(n: int, a: float, b: float):
    x, w = roots_jacobi(n, a, b)
    return x.astype(complex), w


@lru_cache(maxsize=16)
def _legendre(n: int):
    x, w = roots_legendre(n)
    return x, w


@dataclass(frozen=True)
class IntegralSpec:
    """Serializable description of one integral evaluation."""

    i: int
    x: complex
    kernel: str                      # alpha | g-alpha | kappa-tilde | omega-shift | general
    params: dict = field(default_factory=dict)
    order: int = DEFAULT_ORDER
    branch_seed: int = 1

    def to_dict(self) -> dict:
        return {"i": self.i, "x": self.x, "kernel": self.kernel, "params": dict(self.params),
                "order": self.order, "branch_seed": self.branch_seed}


# --- the segment and its square root ----------------------------------------


def segment_half_period(i: int, L: PeriodLattice) -> complex:
    """Midpoint of the i-th segment: 0, w_1, w_1 + w_3, w_3.

    The class of w_2 is represented by w_1 + w_3 = -w_2, which keeps all four
    segments short for x in the cell spanned by w_1 and w_3.
    """
    return (0j, complex(L.omega1), complex(L.omega1 + L.omega3), complex(L.omega3))[i]


def segment_eta(i: int, L: PeriodLattice) -> complex:
    return (0j, complex(L.eta1), complex(L.eta1 + L.eta3), complex(L.eta3))[i]


class _Segment:
    def __init__(self, i: int, x: complex, L: PeriodLattice, seed: int = 1):
        if i not in (0, 1, 2, 3):
            raise DomainError(f"endpoint index must be 0..3, got {i}")
        self.i, self.x, self.L = i, complex(x), L
        self.w = segment_half_period(i, L)
        self.h = self.x - self.w
        if abs(self.h) < 1e-13:
            raise DomainError("x coincides with the half-period of the segment")
        nu = np.cos(np.pi * (np.arange(_DENSE) + 0.5) / _DENSE)[::-1]
        self.dense = np.concatenate([nu[nu < 0], [0.0], nu[nu > 0]]).astype(complex)
        r = self.rhat(self.dense)
        ph = np.unwrap(np.angle(r))
        s = np.sqrt(np.abs(r)) * np.exp(0.5j * ph)
        k0 = int(np.argmin(np.abs(self.dense)))
        anchor = self._anchor() * seed
        if abs(s[k0] + anchor) < abs(s[k0] - anchor):
            s = -s
        if abs(s[k0] - anchor) > 1e-6 * abs(anchor):
            raise NumericError("square-root anchor does not match the tracked branch")
        self.dense_sqrt = s
        self.dense_r = r
        if np.min(np.abs(r)) < 1e-12 * np.max(np.abs(r)):
            raise DomainError("sigma(x - xi) sigma(x + xi) vanishes inside the segment")

    def xi(self, nu):
        return self.w + self.h * nu

    def rhat(self, nu):
        nu = np.asarray(nu, dtype=complex)
        xi = self.xi(nu)
        return (sigma(self.x - xi, self.L) * sigma(self.x + xi, self.L)
                / (self.h * self.h * (1 - nu) * (1 + nu)))

    def _anchor(self) -> complex:
        L = self.L
        if self.i == 0:
            return complex(sigma(self.x, L)) / self.h
        return -1j * complex(sigma(self.x - self.w, L)) * cmath.exp(segment_eta(self.i, L) * self.x) / self.h

    def sqrt_rhat(self, nu):
        """Branch-tracked sqrt(R) at points near the real segment."""
        nu = np.asarray(nu, dtype=complex)
        idx = np.searchsorted(self.dense.real, nu.real).clip(1, len(self.dense) - 1)
        left = self.dense.real[idx - 1]
        idx = np.where(np.abs(nu.real - left) < np.abs(nu.real - self.dense.real[idx]), idx - 1, idx)
        r = self.rhat(nu)
        return self.dense_sqrt[idx] * np.sqrt(r / self.dense_r[idx])


def _nu_pieces(seg: _Segment, poles: Sequence[complex], order: int, rho: float):
    """Nodes and weights on [-1, 1] (with left detours around poles).

    Returns (nu, weight) such that int F dnu ~ sum weight * G(nu) where
    F = G / sqrt(1 - nu^2)."""
    cuts = sorted(p.real for p in poles)
    if not cuts:
        x, w = _jacobi(order, -0.5, -0.5)
        return x, w.astype(complex)
    for c in cuts:
        if c - rho <= -1 + rho or c + rho >= 1 - rho:
            raise PathDeformationError("kernel pole too close to a segment endpoint for a detour")
    for a, b in zip(cuts, cuts[1:]):
        if b - a < 3 * rho:
            raise PathDeformationError("kernel poles too close together on the path")
    nus, wts = [], []
    # first piece [-1, c0 - rho]: weight (1 + nu)^(-1/2)
    c = cuts[0] - rho
    u, w = _jacobi(order, 0.0, -0.5)
    nu = -1 + (c + 1) * (1 + u) / 2
    nus.append(nu)
    wts.append(w * math.sqrt((c + 1) / 2) / np.sqrt(1 - nu))
    gl_x, gl_w = _legendre(order)
    for k, cc in enumerate(cuts):
        th = (gl_x + 1) * math.pi / 2
        nu = cc - rho * np.exp(-1j * th)
        dnu = 1j * rho * np.exp(-1j * th) * math.pi / 2
        nus.append(nu)
        wts.append(gl_w * dnu / np.sqrt(1 - nu * nu))
        if k + 1 < len(cuts):
            a, b = cc + rho, cuts[k + 1] - rho
            nu = (a + b) / 2 + (b - a) / 2 * gl_x
            nus.append(nu.astype(complex))
            wts.append(gl_w * (b - a) / 2 / np.sqrt(1 - nu * nu))
    c = cuts[-1] + rho
    u, w = _jacobi(order, -0.5, 0.0)
    nu = c + (1 - c) * (1 + u) / 2
    nus.append(nu)
    wts.append(w * math.sqrt((1 - c) / 2) / np.sqrt(1 + nu))
    return np.concatenate(nus), np.concatenate(wts)


def _lattice_poles_on(seg: _Segment, rho: float) -> list[complex]:
    """nu-coordinates of lattice points within rho of the open segment."""
    L = seg.L
    w1, w3 = L.omega1, L.omega3
    M = np.array([[w1.real, w3.real], [w1.imag, w3.imag]]) * 2
    found = []
    ends = [seg.xi(-1.0), seg.xi(1.0)]
    lo = np.linalg.solve(M, [min(e.real for e in ends), min(e.imag for e in ends)])
    hi = np.linalg.solve(M, [max(e.real for e in ends), max(e.imag for e in ends)])
    span = int(np.ceil(np.max(np.abs(np.concatenate([lo, hi]))))) + 2
    for m in range(-span, span + 1):
        for n in range(-span, span + 1):
            p = 2 * m * w1 + 2 * n * w3
            nu = (p - seg.w) / seg.h
            if -1 < nu.real < 1 and abs(nu.imag) < rho:
                found.append(complex(nu))
    return found


def _integrate(seg: _Segment, numer: Callable, order: int, poles: bool = False,
               rho: float = 0.1) -> complex:
    if order < 2:
        raise ParameterError("order", "quadrature order must be at least 2")
    pl = _lattice_poles_on(seg, rho) if poles else []
    nu, wt = _nu_pieces(seg, pl, order, rho)
    vals = numer(seg.xi(nu)) / seg.sqrt_rhat(nu)
    if not np.all(np.isfinite(vals)):
        raise NumericError("non-finite integrand value at a quadrature node")
    return complex(np.sum(wt * vals))


# --- kernels -------------------------------------------------------------------


def _sigma_zeta(u, L: PeriodLattice):
    """sigma(u) zeta(u), finite at the lattice points."""
    u = np.asarray(u, dtype=complex)
    out = np.empty_like(u)
    small = np.abs(u) < 1e-4
    g2 = -4 * (L.e1 * L.e2 + L.e2 * L.e3 + L.e3 * L.e1)
    out[small] = 1 - g2 * u[small] ** 4 / 48
    if np.any(~small):
        out[~small] = sigma(u[~small], L) * zeta_w(u[~small], L)
    return out


def f_alpha(i: int, x, alpha, kappa, L: PeriodLattice, order: int = DEFAULT_ORDER) -> complex:
    """f_i(x) for the (alpha, kappa) kernel exp((kappa + zeta(alpha)) xi) sigma(x) sigma(xi - alpha)."""
    alpha, kappa = complex(alpha), complex(kappa)
    seg = _Segment(i, x, L)
    c = kappa + complex(zeta_w(alpha, L))
    sx = complex(sigma(seg.x, L))
    return _integrate(seg, lambda xi: np.exp(c * xi) * sx * sigma(xi - alpha, L), order)


def g_alpha(i: int, x, alpha, kappa, k, L: PeriodLattice, order: int = DEFAULT_ORDER) -> complex:
    """Second component paired with f_alpha.

    (wp'(xi) + wp'(alpha)) / (wp(xi) - wp(alpha)) is written as
    2 (zeta(xi - alpha) - zeta(xi) + zeta(alpha)); the factor sigma(xi - alpha)
    cancels the pole at xi = alpha, and xi = -alpha is not a pole.  The double
    poles at lattice points have zero residue and are passed on the left.
    """
    alpha, kappa, k = complex(alpha), complex(kappa), complex(k)
    if k == 0:
        raise ParameterError("k", "k = 0")
    seg = _Segment(i, x, L)
    c = kappa + complex(zeta_w(alpha, L))
    za, wa = complex(zeta_w(alpha, L)), complex(wp(alpha, L))
    sx = complex(sigma(seg.x, L))

    def numer(xi):
        sa = sigma(xi - alpha, L)
        ker = ((kappa * kappa + 2 * kappa * (za - zeta_w(xi, L)) + 2 * wp(xi, L) + wa) * sa
               + 2 * kappa * _sigma_zeta(xi - alpha, L))
        return np.exp(c * xi) * sx * ker

    val = _integrate(seg, numer, order, poles=True)
    return val / (4 * k * (L.e2 - L.e1))


def f_kappa_tilde(i: int, x, kappa_tilde, L: PeriodLattice, order: int = DEFAULT_ORDER) -> complex:
    kt = complex(kappa_tilde)
    seg = _Segment(i, x, L)
    sx = complex(sigma(seg.x, L))
    return _integrate(seg, lambda xi: np.exp(kt * xi) * sx * sigma(xi, L), order)


def f_omega_shift(i_prime: int, x, i: int, kappa, L: PeriodLattice,
                  order: int = DEFAULT_ORDER) -> complex:
    if i not in (1, 2, 3):
        raise DomainError("the shifted kernel needs i in 1..3")
    kappa = complex(kappa)
    w, eta = complex(L.half_period(i)), complex(L.eta(i))
    seg = _Segment(i_prime, x, L)
    sx = complex(sigma(seg.x, L))
    return _integrate(seg, lambda xi: np.exp((kappa + eta) * xi) * sx * sigma(xi - w, L), order)


def reversed_segment_integral(i: int, x, numer: Callable, L: PeriodLattice,
                              order: int = DEFAULT_ORDER) -> complex:
    """Same integral traversed from x to 2 w_i - x (nu -> -nu), with the branch
    continued along the path rather than re-anchored."""
    seg = _Segment(i, x, L)
    nu, wt = _nu_pieces(seg, [], order, 0.1)
    vals = numer(seg.xi(-nu)) / seg.sqrt_rhat(-nu)
    return -complex(np.sum(wt * vals))


# --- linear relations -----------------------------------------------------------


def combination_coefficients(e: Sequence[complex], j: int) -> tuple[complex, complex]:
    """(c0, c1) with f_j = c0 f_0 + c1 f_1 for j = 2, 3.

    ``e`` holds the e-factors of the segment midpoints (w_1, w_1 + w_3, w_3).
    c0 = (e_1 + e_j)/(1 - e_1), c1 = (1 - e_j)/(1 - e_1); the plus sign in c0
    comes from exp(2(eta_1 w_j - eta_j w_1)) = -1.
    """
    if j not in (2, 3):
        raise DomainError("j must be 2 or 3")
    e1, ej = e[0], e[j - 1]
    if abs(1 - e1) < 1e-12:
        raise NumericError("e[1] = 1: f_0 and f_1 are dependent")
    return (e1 + ej) / (1 - e1), (1 - ej) / (1 - e1)


# --- derivatives in x ----------------------------------------------------------


def x_derivatives(fun: Callable[[complex], complex], x: complex, radius: float,
                  n: int = 32, nd: int = 2) -> list[complex]:
    """[f, f', ..., f^(nd)] at x from the trapezoid rule on a circle.

    Converges geometrically when f is analytic on a disk somewhat larger
    than the circle."""
    x = complex(x)
    th = 2 * np.pi * np.arange(n) / n
    pts = x + radius * np.exp(1j * th)
    vals = np.array([fun(p) for p in pts])
    out = [complex(fun(x))]
    for m in range(1, nd + 1):
        c = np.mean(vals * np.exp(-1j * m * th)) / radius**m
        out.append(complex(math.factorial(m) * c))
    return out


def singular_distance(x: complex, L: PeriodLattice, extra: Sequence[complex] = ()) -> float:
    """Distance from x to the nearest half-lattice point or extra singular point (mod lattice)."""
    w1, w3 = L.omega1, L.omega3
    pts = [m * w1 + n * w3 for m in range(-6, 7) for n in range(-6, 7)]
    for e in extra:
        pts += [e + 2 * m * w1 + 2 * n * w3 for m in range(-3, 4) for n in range(-3, 4)]
    return float(min(abs(complex(x) - p) for p in pts))


# --- the general integrand ----------------------------------------------------


def kappa1_of(l: Sequence[int]) -> float:
    return -(sum(l) + 1) / 2


def general_integrand(xi, l: Sequence[int], lam, mu, f_hk: Callable, L: PeriodLattice,
                      d_f_hk: Callable | None = None, h: float = 1e-5):
    """Integrand of the l-family representation without the factor (z - tilde_wp(xi))^kappa1.

    ``f_hk`` evaluates the ansatz function; its derivative comes from
    ``d_f_hk`` when supplied, else from a central difference of step h.
    The product prod (wp - e_j)^(l_j/2) uses principal roots; quadrature
    callers re-track its branch.
    """
    xi = np.asarray(xi, dtype=complex)
    k1 = kappa1_of(l)
    d = L.e2 - L.e1
    w = wp(xi, L)
    wpr = wp_prime(xi, L)
    tw = (w - L.e1) / d
    s = sum(l[j] / (2 * (w - L.e(j))) for j in (1, 2, 3))
    shift = tw - lam - k1 / mu
    f = f_hk(xi)
    df = d_f_hk(xi) if d_f_hk is not None else (f_hk(xi + h) - f_hk(xi - h)) / (2 * h)
    bracket = (k1 / d + shift * s) * wpr * f + shift * df
    prod = np.ones_like(xi)
    for j in (1, 2, 3):
        prod = prod * (w - L.e(j)) ** (l[j] / 2)
    return bracket * prod / (tw - lam)


class ParityError(ParameterError):
    def __init__(self, msg: str):
        super().__init__("l", msg)


def _half_root(xi, j: int, L: PeriodLattice):
    """Analytic square root of wp(xi) - e_j: sigma(xi - w_j) exp(eta_j xi) / (sigma(xi) sigma(w_j))."""
    w = L.half_period(j)
    return sigma(xi - w, L) * np.exp(L.eta(j) * xi) / (sigma(xi, L) * complex(sigma(w, L)))


def y_tilde(i: int, z, l: Sequence[int], lam, mu, f_hk: Callable, L: PeriodLattice,
            d_f_hk: Callable | None = None, order: int = DEFAULT_ORDER, branch: int = 1,
            x: complex | None = None, strict: bool = False) -> complex:
    """Solution of the transformed scalar equation at z for the l-family.

    ``x`` (a preimage of z) may be given directly; otherwise it is
    tilde_wp_inverse(z, branch).  Fractional powers are written through
    sigma quotients, so the only branch choice is the tracked segment root
    and the result is analytic in x.

    The value is the Pochhammer-contour integral normalised to one straight
    traversal.  For odd l-sum the integrand is single-valued, the two
    traversals cancel and 0 is returned (or ParityError with ``strict``).
    """
    l = tuple(int(v) for v in l)
    two_k1 = -(sum(l) + 1)
    if two_k1 % 2 == 0:
        if strict:
            raise ParityError("odd l-sum: the contour integral vanishes identically")
        return 0j
    k1 = two_k1 / 2
    if k1 <= -1:
        raise UnsupportedRegularizationError(
            f"kappa1 = {k1} <= -1 needs a regularised contour; not implemented")
    if x is None:
        x = tilde_wp_inverse(complex(z), L, branch)
    seg = _Segment(i, x, L)
    order += order % 2          # keep xi = w_i off the node set
    nu, wt = _jacobi(order, k1, k1)
    xi = seg.xi(nu)
    d = L.e2 - L.e1
    w = wp(xi, L)
    tw = (w - L.e1) / d
    shift = tw - lam - k1 / mu
    s = sum(l[j] / (2 * (w - L.e(j))) for j in (1, 2, 3))
    f = f_hk(xi)
    df = d_f_hk(xi) if d_f_hk is not None else (f_hk(xi + 1e-5) - f_hk(xi - 1e-5)) / 2e-5
    bracket = (k1 / d + shift * s) * wp_prime(xi, L) * f + shift * df
    A = np.ones_like(xi)
    for j in (1, 2, 3):
        A = A * _half_root(xi, j, L) ** l[j]
    sx = complex(sigma(seg.x, L))
    # (z - tw)^k1 = (-1/d)^k1 (sigma(x) sigma(xi))^(-2 k1) (sigma(x+xi) sigma(x-xi))^k1
    pw = (-1 / d) ** k1 * (sx * sigma(xi, L)) ** (-two_k1) * (seg.h * seg.sqrt_rhat(nu)) ** two_k1
    vals = bracket / (tw - lam) * A * pw
    return complex(np.sum(wt * vals)) * seg.h


# --- kappa-tilde = 0: the w = wp(xi) reduction --------------------------------


def algebraic_integral(i: int, z, L: PeriodLattice, order: int = 64) -> complex:
    """int_{e_i}^{z} dw / sqrt((w - z)(w - e_1)(w - e_2)(w - e_3)) on the straight w-segment.

    Gauss-Chebyshev in w (closed-form nodes), the remaining root continued
    from the midpoint.  Defined up to an overall sign.
    """
    if i not in (1, 2, 3):
        raise DomainError("the algebraic form starts at e_1, e_2 or e_3")
    z, ei = complex(z), complex(L.e(i))
    others = [complex(L.e(j)) for j in (1, 2, 3) if j != i]
    n = order + (order % 2) + 1          # odd: s = 0 is a node
    s = np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))[::-1]
    w = ei + (z - ei) * (1 + s) / 2
    scale = max(abs(z - ei), 1e-300)
    if min(float(np.min(np.abs(w - e))) for e in others) < 1e-3 * scale:
        raise PathDeformationError("w-segment passes through a branch point")
    r = np.sqrt((w - others[0]) * (w - others[1]))
    # continue the root from the middle node outward
    mid = n // 2
    for rng in (range(mid + 1, n), range(mid - 1, -1, -1)):
        for k in rng:
            prev = k - 1 if k > mid else k + 1
            if abs(r[k] - r[prev]) > abs(r[k] + r[prev]):
                r[k] = -r[k]
    # (w - e_i)(w - z) = -((z - e_i)/2)^2 (1 - s^2), dw = (z - e_i) ds / 2
    return complex(np.sum(1 / r)) * (np.pi / n) / 1j


def borcea_shapiro_mismatch(i: int, x, L: PeriodLattice, order: int = DEFAULT_ORDER) -> float:
    """Relative gap between f_i at kappa-tilde = 0 and the algebraic integral at z = wp(x), up to sign."""
    a = f_kappa_tilde(i, x, 0.0, L, order)
    b = algebraic_integral(i, complex(wp(x, L)), L, order)
    return min(abs(a - b), abs(a + b)) / max(abs(b), 1e-300)
