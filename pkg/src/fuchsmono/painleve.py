"""Painleve VI: Hamiltonian, residuals, and Picard's solution checked through
the monodromy of the linear problem."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .elliptic import PeriodLattice, lattice_from_tau, wp, wp_prime, zeta_w
from .errors import DegenerateError, DomainError, NumericError
from .fuchsian import ThetaParams, hamiltonian
from .heun import e_factors, monodromy_mismatch, numeric_monodromy_0001

PICARD_PARAMS = ThetaParams(0, 0, 0, 1)
TAU0 = 0.2 + 1.1j


class BranchError(DomainError):
    """alpha sits on a half-period, where wp'(alpha) = 0."""


def p6_hamiltonian(params: ThetaParams, lam, mu, t):
    return hamiltonian(params, lam, mu, t)


def hamilton_rhs(params: ThetaParams, lam, mu, t, h: float = 1e-6) -> tuple[complex, complex]:
    """(dH/dmu, -dH/dlambda) by central differences."""
    H = lambda a, b: complex(p6_hamiltonian(params, a, b, t))  # noqa: E731
    return ((H(lam, mu + h) - H(lam, mu - h)) / (2 * h),
            -(H(lam + h, mu) - H(lam - h, mu)) / (2 * h))


def p6_rhs(params: ThetaParams, lam, dlam, t) -> complex:
    """lambda'' as given by P6 in terms of (lambda, lambda', t)."""
    p = params.to_complex()
    th0, th1, tht, thi = p.as_tuple()
    lam, dlam, t = complex(lam), complex(dlam), complex(t)
    for v, what in ((lam, "lambda = 0"), (lam - 1, "lambda = 1"), (lam - t, "lambda = t")):
        if v == 0:
            raise DomainError(what)
    quad = 0.5 * (1 / lam + 1 / (lam - 1) + 1 / (lam - t)) * dlam**2
    lin = (1 / t + 1 / (t - 1) + 1 / (lam - t)) * dlam
    pot = lam * (lam - 1) * (lam - t) / (t * t * (t - 1) ** 2) * (
        (1 - thi) ** 2 / 2 - th0**2 / 2 * t / lam**2
        + th1**2 / 2 * (t - 1) / (lam - 1) ** 2
        + (1 - tht**2) / 2 * t * (t - 1) / (lam - t) ** 2)
    return quad - lin + pot


def _second_diff(fun, t, h):
    lm, l0, lp = (complex(fun(s)) for s in (t - h, t, t + h))
    return l0, (lp - lm) / (2 * h), (lp - 2 * l0 + lm) / (h * h)


def p6_residual(lambda_of_t: Callable[[complex], complex], params: ThetaParams, t, h: float = 1e-3,
                richardson: bool = False) -> float:
    """|lambda'' - RHS| with second-order central differences at step h.

    ``richardson`` combines steps h and h/2 to cancel the h^2 term.
    """
    t = complex(t)
    l0, d1, d2 = _second_diff(lambda_of_t, t, h)
    if richardson:
        _, e1, e2 = _second_diff(lambda_of_t, t, h / 2)
        d1, d2 = (4 * e1 - d1) / 3, (4 * e2 - d2) / 3
    return abs(d2 - p6_rhs(params, l0, d1, t))


def p6_elliptic_rhs(params: ThetaParams, delta, tau) -> complex:
    """Right side of the elliptic form of P6, with omega1 = 1/2, omega3 = tau/2."""
    th0, th1, tht, thi = params.to_complex().as_tuple()
    c = ((1 - thi) ** 2, th0**2, th1**2, tht**2)
    if all(abs(v) == 0 for v in c):
        return 0j
    L = lattice_from_tau(tau)
    shifts = (0, 0.5, (tau + 1) / 2, tau / 2)
    s = sum(ci / 2 * complex(wp_prime(delta + sh, L)) for ci, sh in zip(c, shifts) if ci != 0)
    return -s / (4 * math.pi**2)


def p6_elliptic_residual(delta_of_tau: Callable[[complex], complex], params: ThetaParams, tau,
                         h: float = 1e-3) -> float:
    tau = complex(tau)
    dm, d0, dp = (complex(delta_of_tau(s)) for s in (tau - h, tau, tau + h))
    return abs((dp - 2 * d0 + dm) / (h * h) - p6_elliptic_rhs(params, d0, tau))


# --- Picard's solution ------------------------------------------------------


@dataclass(frozen=True)
class PicardData:
    C1: complex
    C3: complex

    def alpha(self, L: PeriodLattice) -> complex:
        return self.C3 * L.omega1 - self.C1 * L.omega3

    def kappa(self, L: PeriodLattice) -> complex:
        return (complex(zeta_w(self.C1 * L.omega3 - self.C3 * L.omega1, L))
                + self.C3 * L.eta1 - self.C1 * L.eta3)

    def exponents(self, L: PeriodLattice) -> tuple[complex, complex]:
        """-2 eta_j alpha + 2 w_j (zeta(alpha) + kappa), j = 1, 3; equal pi i C_j."""
        a, k = self.alpha(L), self.kappa(L)
        z = complex(zeta_w(a, L))
        return tuple(-2 * L.eta(j) * a + 2 * L.half_period(j) * (z + k) for j in (1, 3))


def _check_offlattice(a: complex, L: PeriodLattice) -> None:
    # a = m w1 + n w3 with real m, n; integer pairs are lattice or half-period points
    M = np.array([[L.omega1.real, L.omega3.real], [L.omega1.imag, L.omega3.imag]])
    m, n = np.linalg.solve(M, [a.real, a.imag])
    if abs(m - round(m)) < 1e-12 and abs(n - round(n)) < 1e-12:
        if round(m) % 2 == 0 and round(n) % 2 == 0:
            raise DegenerateError("alpha on the period lattice")
        raise BranchError("alpha is a half-period: wp'(alpha) = 0")


def picard_solution(pd: PicardData, tau) -> tuple[complex, complex, complex, complex, complex]:
    """(alpha, kappa, lambda, mu, t) on the lattice omega1 = 1/2, omega3 = tau/2."""
    L = lattice_from_tau(complex(tau))
    a = pd.alpha(L)
    _check_offlattice(a, L)
    k = pd.kappa(L)
    d = L.e2 - L.e1
    lam = (complex(wp(a, L)) - L.e1) / d
    mu = -d * k / complex(wp_prime(a, L))
    return a, k, lam, mu, L.t


def _t_of_tau(tau: complex) -> complex:
    return lattice_from_tau(tau).t


def tau_near(t, tau0: complex, tol: float = 1e-14, maxiter: int = 40) -> complex:
    """Solve t(tau) = t by Newton, on the branch through tau0."""
    tau, t = complex(tau0), complex(t)
    for _ in range(maxiter):
        h = 1e-5
        f = _t_of_tau(tau) - t
        df = (_t_of_tau(tau + h) - _t_of_tau(tau - h)) / (2 * h)
        step = f / df
        tau -= step
        if tau.imag <= 0:
            raise NumericError("Newton for tau left the upper half plane")
        if abs(step) < tol * max(1.0, abs(tau)):
            return tau
    raise NumericError("tau(t) Newton did not converge")


def picard_lambda_of_t(pd: PicardData, tau0: complex) -> Callable[[complex], complex]:
    """lambda as a function of t, continued from the branch through tau0."""
    def lam(t):
        return picard_solution(pd, tau_near(t, tau0))[2]
    return lam


def tau_grid(n: int = 5, tau0: complex = TAU0, span: float = 0.5) -> list[complex]:
    return [tau0 + 1j * s for s in np.linspace(0.0, span, n)]


@dataclass
class PicardRow:
    tau: complex
    t: complex
    lam: complex
    mu: complex
    residual: float
    e1: complex
    e3: complex


def picard_rows(pd: PicardData, taus: Sequence[complex], h: float = 1e-3,
                richardson: bool = True) -> list[PicardRow]:
    rows = []
    for tau in taus:
        a, k, lam, mu, t = picard_solution(pd, tau)
        res = p6_residual(picard_lambda_of_t(pd, tau), PICARD_PARAMS, t, h, richardson)
        e = e_factors(a, k, lattice_from_tau(tau))
        rows.append(PicardRow(complex(tau), t, lam, mu, res, e[0], e[2]))
    return rows


def rows_to_csv(rows: Sequence[PicardRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = []
    for c in ("tau", "t", "lambda", "mu"):
        head += [c + "_re", c + "_im"]
    head.append("residual")
    for c in ("e1", "e3"):
        head += [c + "_re", c + "_im"]
    w.writerow(head)
    for r in rows:
        vals = []
        for v in (r.tau, r.t, r.lam, r.mu):
            vals += [repr(v.real), repr(v.imag)]
        vals.append(repr(r.residual))
        for v in (r.e1, r.e3):
            vals += [repr(v.real), repr(v.imag)]
        w.writerow(vals)
    return buf.getvalue()


def monodromy_drift(pd: PicardData, taus: Sequence[complex], **kw) -> tuple[float, list[dict]]:
    """Largest entrywise deviation of the (f0, f1)-frame monodromy from its
    value at the first tau."""
    mats = []
    for tau in taus:
        L = lattice_from_tau(tau)
        mats.append(numeric_monodromy_0001(pd.alpha(L), pd.kappa(L), L, **kw))
    drift = max(monodromy_mismatch(mats[0], m) for m in mats[1:]) if len(mats) > 1 else 0.0
    return drift, mats


def exponent_mismatch(pd: PicardData, L: PeriodLattice) -> float:
    x1, x3 = pd.exponents(L)
    return max(abs(x1 - 1j * math.pi * pd.C1), abs(x3 - 1j * math.pi * pd.C3))


def picard_delta(pd: PicardData) -> Callable[[complex], complex]:
    """delta(tau) = alpha on omega1 = 1/2: linear in tau."""
    return lambda tau: pd.C3 / 2 - pd.C1 * complex(tau) / 2
