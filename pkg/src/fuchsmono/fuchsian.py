"""Four-point 2x2 Fuchsian systems and their scalar reductions.

The matrix constructors only use +, -, *, / so they run unchanged on
``fractions.Fraction`` (exact real rationals), sympy numbers (exact
Gaussian rationals) or Python complex floats.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .errors import DomainError, ParameterError, ReducibleError

Number = Any  # int | Fraction | complex | sympy.Expr

INF = "inf"


def _is_zero(x: Number) -> bool:
    try:
        return x == 0
    except TypeError:  # pragma: no cover
        return False


def _div(num: Number, den: Number, name: str) -> Number:
    if _is_zero(den):
        raise ParameterError(name)
    return num / den


def _exactify(x: Number) -> Number:
    # ints would turn into floats under "/"
    return Fraction(x) if isinstance(x, int) and not isinstance(x, bool) else x


def _half(x: Number) -> Number:
    if isinstance(x, (int, Fraction)):
        return Fraction(x) / 2
    return x / 2


@dataclass(frozen=True)
class ThetaParams:
    theta0: Number
    theta1: Number
    thetat: Number
    thetainf: Number

    @property
    def kappa1(self) -> Number:
        return _half(self.thetainf - self.theta0 - self.theta1 - self.thetat)

    @property
    def kappa2(self) -> Number:
        return -_half(self.thetainf + self.theta0 + self.theta1 + self.thetat)

    def as_tuple(self) -> tuple:
        return (self.theta0, self.theta1, self.thetat, self.thetainf)

    def to_complex(self) -> "ThetaParams":
        return ThetaParams(*(complex(v) for v in self.as_tuple()))


Matrix2 = list  # [[a, b], [c, d]] with generic number entries


@dataclass(frozen=True)
class FuchsianSystem:
    """dY/dz = (A0/z + A1/(z-1) + At/(z-t)) Y with the accessory data that built it."""

    A0: Matrix2
    A1: Matrix2
    At: Matrix2
    t: Number
    params: ThetaParams
    lam: Number
    mu: Number
    k: Number
    u: tuple = field(default=())
    w: tuple = field(default=())

    @property
    def residues(self) -> tuple[Matrix2, Matrix2, Matrix2]:
        return (self.A0, self.A1, self.At)

    @property
    def poles(self) -> tuple:
        return (0, 1, self.t)

    @property
    def Ainf(self) -> Matrix2:
        return [[-(self.A0[i][j] + self.A1[i][j] + self.At[i][j]) for j in range(2)]
                for i in range(2)]

    def numeric(self) -> "FuchsianSystem":
        """Same system with every entry converted to complex floats."""
        c = lambda M: [[complex(v) for v in row] for row in M]  # noqa: E731
        return FuchsianSystem(c(self.A0), c(self.A1), c(self.At), complex(self.t),
                              self.params.to_complex(), complex(self.lam), complex(self.mu),
                              complex(self.k), tuple(complex(v) for v in self.u),
                              tuple(complex(v) for v in self.w))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(np.array(M, dtype=complex) for M in self.residues)

    def coefficient(self, z: complex) -> np.ndarray:
        """A(z) = A0/z + A1/(z-1) + At/(z-t) as a 2x2 complex array."""
        A0, A1, At = self.arrays()
        t = complex(self.t)
        return A0 / z + A1 / (z - 1) + At / (z - t)

    def residual(self, z: complex, Y: np.ndarray, dY: np.ndarray) -> float:
        return float(np.max(np.abs(np.asarray(dY) - self.coefficient(z) @ np.asarray(Y))))


def _residue(u: Number, w: Number, theta: Number) -> Matrix2:
    return [[u + theta, -w], [u * (u + theta) / w, -u]]


def build_system(params: ThetaParams, lam: Number, mu: Number, k: Number, t: Number) -> FuchsianSystem:
    """Residue matrices of the system with local exponents {0, theta_i} and
    diagonal residue at infinity diag(kappa1, kappa2)."""
    params = ThetaParams(*(_exactify(v) for v in params.as_tuple()))
    lam, mu, k, t = (_exactify(v) for v in (lam, mu, k, t))
    th0, th1, tht, thi = params.as_tuple()
    k1, k2 = params.kappa1, params.kappa2
    if _is_zero(t) or _is_zero(t - 1):
        raise ParameterError("t(t-1)", f"t={t} collides with 0 or 1")
    if _is_zero(k):
        raise ParameterError("k")
    if _is_zero(thi):
        raise ParameterError("theta_inf")
    for name, val in (("lambda", lam), ("lambda-1", lam - 1), ("lambda-t", lam - t)):
        if _is_zero(val):
            raise ParameterError(name, f"{name} = 0 makes a residue degenerate")

    w0 = k * lam / t
    w1 = -k * (lam - 1) / (t - 1)
    wt = k * (lam - t) / (t * (t - 1))
    cub = lam * (lam - 1) * (lam - t) * mu * mu
    l1, lt = lam - 1, lam - t
    u0 = -th0 + lam / (t * thi) * (
        cub + (2 * k1 * l1 * lt - th1 * lt - t * tht * l1) * mu
        + k1 * (k1 * (lam - t - 1) - th1 - t * tht))
    u1 = -th1 - l1 / ((t - 1) * thi) * (
        cub + (2 * k1 * l1 * lt + (thi - th1) * lt - t * tht * l1) * mu
        + k1 * (k1 * (lam - t + 1) + th0 - (t - 1) * tht))
    ut = -tht + lt / (t * (t - 1) * thi) * (
        cub + (2 * k1 * l1 * lt - th1 * lt + t * (thi - tht) * l1) * mu
        + k1 * (k1 * (lam - t + 1) + th0 + (t - 1) * (thi - tht)))
    return FuchsianSystem(
        _residue(u0, w0, th0), _residue(u1, w1, th1), _residue(ut, wt, tht),
        t, params, lam, mu, k, (u0, u1, ut), (w0, w1, wt))


def hamiltonian(params: ThetaParams, lam: Number, mu: Number, t: Number) -> Number:
    """Accessory parameter H of the scalar equation; also the Painleve VI Hamiltonian."""
    th0, th1, tht, _ = params.as_tuple()
    k1, k2 = params.kappa1, params.kappa2
    num = (lam * (lam - 1) * (lam - t) * mu * mu
           - (th0 * (lam - 1) * (lam - t) + th1 * lam * (lam - t) + (tht - 1) * lam * (lam - 1)) * mu
           + k1 * (k2 + 1) * (lam - t))
    return _div(num, t * (t - 1), "t(t-1)")


# --------------------------------------------------------------------------
# scalar second-order equations


def _taylor_inv_pow(a: complex, s: complex, j: int, nmax: int) -> np.ndarray:
    """Taylor coefficients at z=s of (z-a)^(-j), a != s."""
    d = s - a
    out = np.empty(nmax + 1, dtype=complex)
    c = d ** (-j)
    # (d + h)^-j = d^-j * sum binom(-j, n) (h/d)^n
    for n in range(nmax + 1):
        out[n] = c
        c = c * (-(j + n)) / ((n + 1) * d)
    return out


@dataclass(frozen=True)
class SecondOrderODE:
    """y'' + p(z) y' + q(z) y = 0 with p, q in partial-fraction form.

    ``p_poles[s]`` / ``q_poles[s]`` map a pole s to its principal part
    coefficients (c1, c2, ...) of 1/(z-s), 1/(z-s)^2, ...; ``p_poly`` and
    ``q_poly`` are polynomial parts (ascending coefficients).
    """

    p_poles: dict
    q_poles: dict
    p_poly: tuple = ()
    q_poly: tuple = ()
    name: str = ""

    @property
    def singular_points(self) -> list:
        pts = []
        for s in list(self.p_poles) + list(self.q_poles):
            if s not in pts and (any(c != 0 for c in self.p_poles.get(s, ()))
                                 or any(c != 0 for c in self.q_poles.get(s, ()))):
                pts.append(s)
        return pts

    def p(self, z: complex) -> complex:
        val = sum(complex(c) * z**i for i, c in enumerate(self.p_poly))
        for s, cs in self.p_poles.items():
            val += sum(complex(c) / (z - s) ** (j + 1) for j, c in enumerate(cs))
        return val

    def q(self, z: complex) -> complex:
        val = sum(complex(c) * z**i for i, c in enumerate(self.q_poly))
        for s, cs in self.q_poles.items():
            val += sum(complex(c) / (z - s) ** (j + 1) for j, c in enumerate(cs))
        return val

    def residual(self, z: complex, y: complex, dy: complex, d2y: complex) -> complex:
        return d2y + self.p(z) * dy + self.q(z) * y

    def companion(self, z: complex) -> np.ndarray:
        """Matrix M(z) with (y, y')' = M(z) (y, y')."""
        return np.array([[0, 1], [-self.q(z), -self.p(z)]], dtype=complex)

    def _local_data(self, point):
        if point == INF or point is None:
            if any(c != 0 for c in self.p_poly) or any(c != 0 for c in self.q_poly):
                raise DomainError("polynomial coefficient part: infinity is irregular")
            pinf = sum(complex(cs[0]) for cs in self.p_poles.values() if cs)
            qsum = sum(complex(cs[0]) for cs in self.q_poles.values() if cs)
            if abs(qsum) > 1e-12 * max(1.0, sum(abs(complex(cs[0])) for cs in self.q_poles.values() if cs)):
                raise DomainError("q decays only like 1/z: infinity is irregular")
            qinf = 0j
            for s, cs in self.q_poles.items():
                cs = list(cs) + [0, 0]
                qinf += complex(cs[0]) * s + complex(cs[1])
            return None, pinf, qinf
        for s in self.singular_points:
            if s != INF and abs(complex(s) - complex(point)) < 1e-14:
                pc = list(self.p_poles.get(s, ())) + [0, 0]
                qc = list(self.q_poles.get(s, ())) + [0, 0, 0]
                if any(c != 0 for c in pc[1:]) or any(c != 0 for c in qc[2:]):
                    raise DomainError(f"z={point} is an irregular singular point")
                return s, complex(pc[0]), complex(qc[1])
        raise DomainError(f"z={point} is not a singular point of the equation")


def _ordered(r1: complex, r2: complex) -> tuple[complex, complex]:
    return tuple(sorted((r1, r2), key=lambda r: (round(r.real, 12), round(r.imag, 12))))


def local_exponents(ode: SecondOrderODE, point) -> tuple[complex, complex]:
    """Indicial roots at a singular point, sorted by real then imaginary part.

    At infinity the roots rho refer to solutions behaving like z**(-rho).
    """
    s, p0, q0 = ode._local_data(point)
    if s is None:
        b, c = 1 - p0, q0  # rho^2 + (1 - p_inf) rho + q_inf
    else:
        b, c = p0 - 1, q0  # rho^2 + (p0 - 1) rho + q0
    disc = cmath.sqrt(b * b - 4 * c)
    return _ordered((-b + disc) / 2, (-b - disc) / 2)


def _taylor_at(ode: SecondOrderODE, s: complex, nmax: int):
    """Taylor coefficients of (z-s) p(z) and (z-s)^2 q(z) at z=s."""
    P = np.zeros(nmax + 1, dtype=complex)
    Q = np.zeros(nmax + 1, dtype=complex)

    def add(target, shift, poly, poles):
        # polynomial part times (z-s)^shift, re-expanded at s
        if len(poly):
            coeffs = np.polynomial.polynomial.Polynomial(np.array(poly, dtype=complex))
            # expand in h = z - s
            taylor = np.zeros(len(poly), dtype=complex)
            c = coeffs
            fact = 1.0
            for n in range(len(poly)):
                taylor[n] = c(s) / fact
                c = c.deriv()
                fact *= n + 1
            for n, v in enumerate(taylor):
                if n + shift <= nmax:
                    target[n + shift] += v
        for a, cs in poles.items():
            for j, c in enumerate(cs, start=1):
                if c == 0:
                    continue
                if abs(complex(a) - s) < 1e-14:
                    if shift - j >= 0:
                        target[shift - j] += complex(c)
                else:
                    tc = _taylor_inv_pow(complex(a), s, j, nmax)
                    target[shift:] += complex(c) * tc[: nmax + 1 - shift]

    add(P, 1, ode.p_poly, ode.p_poles)
    add(Q, 2, ode.q_poly, ode.q_poles)
    return P, Q


def frobenius_obstruction(ode: SecondOrderODE, point) -> complex:
    """Coefficient that must vanish for the smaller exponent's Frobenius series
    to exist without a logarithm (scaled by the size of the recursion terms)."""
    s, p0, q0 = ode._local_data(point)
    if s is None:
        raise DomainError("apparent check at infinity is not supported; move the point first")
    r_lo, r_hi = local_exponents(ode, point)
    diff = r_hi - r_lo
    N = round(diff.real)
    if abs(diff - N) > 1e-9 or N < 0:
        raise DomainError(f"exponent difference {diff} is not a non-negative integer")
    if N == 0:
        return complex("inf")
    P, Q = _taylor_at(ode, complex(s), N)
    c = [1.0 + 0j]
    for n in range(1, N + 1):
        rhs = -sum(((n - kk + r_lo) * P[kk] + Q[kk]) * c[n - kk] for kk in range(1, n + 1))
        F = (n + r_lo) * (n + r_lo - 1) + P[0] * (n + r_lo) + Q[0]
        if n == N:
            scale = 1.0 + sum(abs(((n - kk + r_lo) * P[kk] + Q[kk]) * c[n - kk])
                              for kk in range(1, n + 1))
            return rhs / scale
        c.append(rhs / F)
    raise AssertionError("unreachable")  # pragma: no cover


def apparent_check(ode: SecondOrderODE, point, tol: float = 1e-8) -> bool:
    """True iff the singular point carries no logarithm (integer exponent gap)."""
    return abs(frobenius_obstruction(ode, point)) < tol


def scalar_reduction(sys: FuchsianSystem) -> SecondOrderODE:
    """Equation for y1 obtained by eliminating y2 (apparent singularity at lambda)."""
    th0, th1, tht, thi = sys.params.as_tuple()
    k1, k2 = sys.params.kappa1, sys.params.kappa2
    if all(_is_zero(M[0][1]) for M in sys.residues):
        raise ReducibleError("a12 vanishes identically; y1 decouples")
    t, lam, mu = sys.t, sys.lam, sys.mu
    H = hamiltonian(sys.params, lam, mu, t)
    return _dy1_ode(th0, th1, tht, k1, k2, lam, mu, t, H)


def _dy1_ode(th0, th1, tht, k1, k2, lam, mu, t, H) -> SecondOrderODE:
    t, lam = complex(t), complex(lam)
    c = complex(k1 * (k2 + 1))
    g = complex(lam * (lam - 1) * mu)
    h = complex(t * (t - 1) * H)
    # partial fractions of c/(z(z-1)) + g/(z(z-1)(z-lam)) - h/(z(z-1)(z-t))
    q = {0: [-c + g / lam - h / t], 1: [c + g / (1 - lam) - h / (1 - t)],
         t: [-h / (t * (t - 1))], lam: [g / (lam * (lam - 1))]}
    p = {0: [1 - complex(th0)], 1: [1 - complex(th1)], t: [1 - complex(tht)], lam: [-1.0]}
    return SecondOrderODE({k_: tuple(v) for k_, v in p.items()},
                          {k_: tuple(v) for k_, v in q.items()}, name="D_y1")


def _a(sys: FuchsianSystem, z: complex) -> np.ndarray:
    return sys.coefficient(z)


def y2_from_y1(sys: FuchsianSystem, y1: complex, dy1: complex, z: complex) -> complex:
    A = _a(sys, z)
    if abs(A[0, 1]) < 1e-300:
        raise DomainError(f"a12 vanishes at z={z}")
    return (dy1 - A[0, 0] * y1) / A[0, 1]


def y1_from_y2(sys: FuchsianSystem, y2: complex, dy2: complex, z: complex) -> complex:
    A = _a(sys, z)
    if abs(A[1, 0]) < 1e-300:
        raise DomainError(f"a21 vanishes at z={z}")
    return (dy2 - A[1, 1] * y2) / A[1, 0]


def fuchs_residue_sum(sys: FuchsianSystem) -> Number:
    """tr A0 + tr A1 + tr At + kappa1 + kappa2 (zero for a consistent system)."""
    tr = sum(M[0][0] + M[1][1] for M in sys.residues)
    return tr + sys.params.kappa1 + sys.params.kappa2


def exponent_table(ode: SecondOrderODE, points: Sequence) -> dict:
    return {str(p): local_exponents(ode, p) for p in points}
