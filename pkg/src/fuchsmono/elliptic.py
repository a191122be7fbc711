"""Weierstrass elliptic functions on a period lattice.

Evaluation goes through Jacobi theta series in the nome of a *reduced*
basis of the lattice, so |q| <= exp(-pi*sqrt(3)/2) and a dozen terms are
enough for double precision regardless of how skewed the user's basis is.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import elliprf

from .errors import DegenerateError, DomainError, NumericError, PoleError

POLE_TOL = 1e-12
_NTERMS = 14


@dataclass(frozen=True)
class PeriodLattice:
    """Lattice generated by 2*omega1, 2*omega3 with Im(omega3/omega1) > 0."""

    omega1: complex
    omega3: complex
    e1: complex
    e2: complex
    e3: complex
    eta1: complex
    eta3: complex
    # reduced basis used for evaluation: (w1, w3, eta1, eta3, q)
    _red: tuple = field(repr=False, compare=False, default=())

    @property
    def tau(self) -> complex:
        return self.omega3 / self.omega1

    @property
    def omega2(self) -> complex:
        return -self.omega1 - self.omega3

    @property
    def eta2(self) -> complex:
        return -self.eta1 - self.eta3

    @property
    def t(self) -> complex:
        """Position of tilde_wp(omega3): (e3 - e1)/(e2 - e1)."""
        return (self.e3 - self.e1) / (self.e2 - self.e1)

    def half_period(self, i: int) -> complex:
        return {0: 0j, 1: self.omega1, 2: self.omega2, 3: self.omega3}[i]

    def eta(self, i: int) -> complex:
        return {0: 0j, 1: self.eta1, 2: self.eta2, 3: self.eta3}[i]

    def e(self, i: int) -> complex:
        return {1: self.e1, 2: self.e2, 3: self.e3}[i]

    def legendre_residual(self) -> float:
        return abs(self.eta1 * self.omega3 - self.eta3 * self.omega1 - 0.5j * math.pi)

    def to_dict(self) -> dict:
        return {
            "omega1": self.omega1, "omega3": self.omega3, "tau": self.tau,
            "e1": self.e1, "e2": self.e2, "e3": self.e3,
            "eta1": self.eta1, "eta3": self.eta3, "t": self.t,
        }


def _theta1_derivs(v: np.ndarray, q: complex) -> tuple[np.ndarray, ...]:
    """theta_1 and its first three derivatives in v (nome q)."""
    n = np.arange(_NTERMS)
    m = 2 * n + 1
    coef = 2.0 * (-1.0) ** n * q ** ((n + 0.5) ** 2)
    arg = np.multiply.outer(v, m)
    s, c = np.sin(arg), np.cos(arg)
    th = (s * coef).sum(-1)
    th1 = (c * (coef * m)).sum(-1)
    th2 = -(s * (coef * m**2)).sum(-1)
    th3 = -(c * (coef * m**3)).sum(-1)
    return th, th1, th2, th3


def _reduce_basis(w1: complex, w3: complex) -> tuple[complex, complex, np.ndarray]:
    """Gauss-reduce (w1, w3); return reduced pair and integer matrix M with
    (w3_red, w1_red) = M @ (w3, w1)."""
    M = np.eye(2, dtype=np.int64)
    a, b = complex(w3), complex(w1)
    for _ in range(200):
        tau = a / b
        n = round(tau.real)
        if n:
            a -= n * b
            M[0] -= n * M[1]
            tau = a / b
        if abs(tau) < 1 - 1e-14:
            a, b = -b, a
            M = np.array([-M[1], M[0]])
            continue
        break
    else:  # pragma: no cover
        raise NumericError("lattice basis reduction did not terminate")
    return b, a, M


def lattice_from_tau(tau: complex, scale: complex = 1.0) -> PeriodLattice:
    """Lattice with omega1 = scale/2 and omega3 = scale*tau/2."""
    tau = complex(tau)
    scale = complex(scale)
    if not tau.imag > 0:
        raise DomainError(f"Im(tau) must be positive, got tau={tau}")
    if scale == 0:
        raise DomainError("scale must be non-zero")
    w1, w3 = scale / 2, scale * tau / 2
    r1, r3, M = _reduce_basis(w1, w3)
    q = cmath.exp(1j * math.pi * r3 / r1)
    _, d1, _, d3 = _theta1_derivs(np.array([0.0]), q)
    n1 = -(math.pi**2) * d3[0] / (12 * r1 * d1[0])
    n3 = (n1 * r3 - 0.5j * math.pi) / r1
    # eta is Z-linear in the half-period; undo the reduction
    Minv = np.round(np.linalg.inv(M)).astype(np.int64)
    eta3 = Minv[0, 0] * n3 + Minv[0, 1] * n1
    eta1 = Minv[1, 0] * n3 + Minv[1, 1] * n1
    red = (r1, r3, n1, n3, q)
    # e_i from wp at the half-periods
    base = PeriodLattice(w1, w3, 0j, 0j, 0j, complex(eta1), complex(eta3), red)
    e = [complex(_wp_impl(np.array([w]), base)[0]) for w in (w1, -w1 - w3, w3)]
    return PeriodLattice(w1, w3, e[0], e[1], e[2], complex(eta1), complex(eta3), red)


def _reduce_arg(x: np.ndarray, L: PeriodLattice):
    r1, r3 = L._red[0], L._red[1]
    # coordinates of x in the real basis (2 r1, 2 r3)
    det = (np.conj(r1) * r3).imag
    a = ((np.conj(x) * r3).imag) / (2 * det)
    b = -((np.conj(x) * r1).imag) / (2 * det)
    m = np.round(a)
    n = np.round(b)
    xr = x - 2 * m * r1 - 2 * n * r3
    return xr, m, n


def _log_derivs(xr: np.ndarray, L: PeriodLattice):
    r1, _, n1, _, q = L._red
    c = math.pi / (2 * r1)
    th, d1, d2, d3 = _theta1_derivs(c * xr, q)
    return th, d1 / th, d2 / th, d3 / th, c


def _check_pole(xr: np.ndarray, what: str) -> None:
    if np.any(np.abs(xr) < POLE_TOL):
        raise PoleError(f"{what} evaluated on a lattice point")


def _as_array(x):
    arr = np.asarray(x, dtype=complex)
    return arr, arr.ndim == 0


def _wp_impl(x: np.ndarray, L: PeriodLattice) -> np.ndarray:
    xr, _, _ = _reduce_arg(np.atleast_1d(x), L)
    _check_pole(xr, "wp")
    _, l1, l2, _, c = _log_derivs(xr, L)
    r1, n1 = L._red[0], L._red[2]
    return -n1 / r1 - c * c * (l2 - l1 * l1)


def _out(val, scalar):
    return complex(val[0]) if scalar else val


def wp(x, L: PeriodLattice):
    """Weierstrass wp."""
    arr, scalar = _as_array(x)
    return _out(_wp_impl(arr.reshape(-1), L).reshape(arr.shape or (1,)), scalar)


def wp_prime(x, L: PeriodLattice):
    arr, scalar = _as_array(x)
    xr, _, _ = _reduce_arg(arr.reshape(-1), L)
    _check_pole(xr, "wp_prime")
    _, l1, l2, l3, c = _log_derivs(xr, L)
    val = -(c**3) * (l3 - 3 * l1 * l2 + 2 * l1**3)
    return _out(val.reshape(arr.shape or (1,)), scalar)


def zeta_w(x, L: PeriodLattice):
    """Weierstrass zeta (quasi-periodic, zeta' = -wp)."""
    arr, scalar = _as_array(x)
    xr, m, n = _reduce_arg(arr.reshape(-1), L)
    _check_pole(xr, "zeta_w")
    r1, r3, n1, n3, _ = L._red
    _, l1, _, _, c = _log_derivs(xr, L)
    val = n1 * xr / r1 + c * l1 + 2 * m * n1 + 2 * n * n3
    return _out(val.reshape(arr.shape or (1,)), scalar)


def sigma(x, L: PeriodLattice):
    """Weierstrass sigma; entire and odd."""
    arr, scalar = _as_array(x)
    xr, m, n = _reduce_arg(arr.reshape(-1), L)
    r1, r3, n1, n3, q = L._red
    c = math.pi / (2 * r1)
    th, _, _, _ = _theta1_derivs(c * xr, q)
    _, d1, _, _ = _theta1_derivs(np.array([0.0]), q)
    base = np.exp(n1 * xr * xr / (2 * r1)) * th / (c * d1[0])
    w = m * r1 + n * r3
    ew = m * n1 + n * n3
    sign = np.where(((m + n + m * n) % 2) == 0, 1.0, -1.0)
    val = sign * np.exp(2 * ew * (xr + w)) * base
    return _out(val.reshape(arr.shape or (1,)), scalar)


def log_sigma(x, L: PeriodLattice):
    """A branch of log(sigma(x)) that stays finite for large quasi-period shifts."""
    arr, scalar = _as_array(x)
    xr, m, n = _reduce_arg(arr.reshape(-1), L)
    r1, r3, n1, n3, q = L._red
    c = math.pi / (2 * r1)
    th, _, _, _ = _theta1_derivs(c * xr, q)
    _, d1, _, _ = _theta1_derivs(np.array([0.0]), q)
    w = m * r1 + n * r3
    ew = m * n1 + n * n3
    val = (n1 * xr * xr / (2 * r1) + np.log(th / (c * d1[0]))
           + 2 * ew * (xr + w) + 1j * math.pi * ((m + n + m * n) % 2))
    return _out(val.reshape(arr.shape or (1,)), scalar)


def tilde_wp(x, L: PeriodLattice):
    """(wp(x) - e1)/(e2 - e1): sends omega1, omega2, omega3 to 0, 1, t."""
    return (wp(x, L) - L.e1) / (L.e2 - L.e1)


def tilde_wp_prime(x, L: PeriodLattice):
    return wp_prime(x, L) / (L.e2 - L.e1)


def _sqrt_cubic(w: complex, L: PeriodLattice) -> complex:
    return cmath.sqrt(4 * (w - L.e1) * (w - L.e2) * (w - L.e3))


def wp_inverse(w: complex, L: PeriodLattice, branch: int = 1,
               tol: float = 1e-14, maxiter: int = 60) -> complex:
    """Solve wp(x) = w.

    branch=+1 picks the root with wp'(x) equal to the principal square root
    of 4(w-e1)(w-e2)(w-e3); branch=-1 the negated one (i.e. -x).
    """
    if branch not in (1, -1):
        raise DomainError("branch must be +1 or -1")
    w = complex(w)
    # Carlson's R_F gives an inverse of wp on its principal sheet
    x = complex(elliprf(w - L.e1, w - L.e2, w - L.e3))
    if not np.isfinite(x):
        raise NumericError(f"elliptic-integral seed failed for w={w}")
    for _ in range(maxiter):
        f = wp(x, L) - w
        d = wp_prime(x, L)
        if d == 0:
            break
        step = f / d
        x -= step
        if abs(step) <= tol * max(1.0, abs(x)):
            break
    scale_w = max(1.0, abs(w))
    if abs(wp(x, L) - w) > 1e-8 * scale_w:
        raise NumericError(f"wp inversion did not converge for w={w}")
    target = branch * _sqrt_cubic(w, L)
    if abs(wp_prime(x, L) - target) > abs(wp_prime(x, L) + target):
        x = -x
    xr, _, _ = _reduce_arg(np.array([x]), L)
    return complex(xr[0])


def tilde_wp_inverse(z: complex, L: PeriodLattice, branch: int = 1) -> complex:
    """Inverse of tilde_wp; see wp_inverse for the branch convention."""
    return wp_inverse(L.e1 + (L.e2 - L.e1) * complex(z), L, branch)


def _agm(a: complex, b: complex) -> complex:
    for _ in range(100):
        a, b = (a + b) / 2, cmath.sqrt(a * b)
        # keep the "right" choice of square root
        if abs(a - b) > abs(a + b):
            b = -b
        if abs(a - b) <= 1e-16 * abs(a):
            break
    return a


def _tau_seed(t: complex) -> complex:
    # t = theta3^4/theta4^4 corresponds to modular lambda m = (t-1)/t;
    # tau = i K(1-m)/K(m) with K(m) = pi/(2 agm(1, sqrt(1-m)))
    m = (t - 1) / t
    k = _agm(1, cmath.sqrt(1 - m))
    kp = _agm(1, cmath.sqrt(m))
    return 1j * k / kp


def _in_gamma2_domain(tau: complex) -> bool:
    return (abs(tau.real) <= 1 + 1e-12 and abs(tau - 0.5) >= 0.5 - 1e-12
            and abs(tau + 0.5) >= 0.5 - 1e-12)


def _to_gamma2_domain(tau: complex) -> complex:
    """Move tau into {|Re tau|<=1, |tau -+ 1/2|>=1/2} by Gamma(2) generators."""
    for _ in range(500):
        if tau.real > 1:
            tau -= 2 * math.ceil((tau.real - 1) / 2)
        elif tau.real < -1:
            tau += 2 * math.ceil((-1 - tau.real) / 2)
        elif abs(tau - 0.5) < 0.5 - 1e-15:
            tau = tau / (1 - 2 * tau)
        elif abs(tau + 0.5) < 0.5 - 1e-15:
            tau = tau / (1 + 2 * tau)
        else:
            return tau
    raise NumericError("Gamma(2) reduction did not terminate")


def lattice_from_t(t: complex, tol: float = 1e-13, maxiter: int = 50) -> PeriodLattice:
    """Lattice (omega1 = 1/2) with (e3-e1)/(e2-e1) = t.

    The tau returned lies in the fundamental domain of Gamma(2), the group
    that preserves t.
    """
    t = complex(t)
    if abs(t) < 1e-14 or abs(t - 1) < 1e-14:
        raise DegenerateError(f"t={t} collides with a singular point")

    def resid(tau):
        return lattice_from_tau(tau).t - t

    seeds = [_tau_seed(t)]
    # coarse grid fallback
    seeds += [complex(x, y) for y in (0.6, 1.0, 1.6, 2.5) for x in (-0.75, -0.25, 0.25, 0.75)]
    for tau in seeds:
        if not tau.imag > 0:
            continue
        try:
            for _ in range(maxiter):
                f = resid(tau)
                h = 1e-6 * max(1.0, abs(tau))
                df = (resid(tau + h) - resid(tau - h)) / (2 * h)
                step = f / df
                # damp steps leaving the upper half plane
                while (tau - step).imag <= 0:
                    step /= 2
                tau -= step
                if abs(step) < tol * max(1.0, abs(tau)):
                    break
            if abs(resid(tau)) < 1e-10 * max(1.0, abs(t)):
                tau = _to_gamma2_domain(tau)
                return lattice_from_tau(tau)
        except (DomainError, ZeroDivisionError, OverflowError):
            continue
    raise NumericError(f"could not find a lattice with cross-ratio t={t}")
