"""Heun's equation: rational and elliptic forms, the special parameter
families with sigma-integral solutions, confluent limits of the scalar
equation, and closed-form monodromy on the (f_0, f_1) basis."""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .elliptic import PeriodLattice, lattice_from_t, wp, wp_prime, zeta_w
from .errors import DegenerateError, DomainError, FuchsRelationError, ParameterError
from .fuchsian import SecondOrderODE, ThetaParams, _dy1_ode, _is_zero, build_system, scalar_reduction
from .integral import (DEFAULT_ORDER, f_alpha, f_kappa_tilde, g_alpha, f_omega_shift, segment_half_period,
                       singular_distance, x_derivatives)
from .transport import MonodromyResult, PulledBackODE, monodromy_group

FUCHS_TOL = 1e-10


def _exact(*vals) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in vals)


@dataclass(frozen=True)
class HeunParams:
    gamma: complex
    delta: complex
    epsilon: complex
    alpha: complex
    beta: complex
    q: complex
    t: complex

    def __post_init__(self):
        g, d, e, a, b = self.gamma, self.delta, self.epsilon, self.alpha, self.beta
        gap = g + d + e - a - b - 1
        if _exact(g, d, e, a, b):
            bad = gap != 0
        else:
            bad = abs(complex(gap)) > FUCHS_TOL * max(1.0, abs(complex(a)), abs(complex(b)))
        if bad:
            raise FuchsRelationError("fuchs", f"gamma + delta + epsilon - alpha - beta - 1 = {gap}")
        if _is_zero(self.t) or _is_zero(self.t - 1):
            raise ParameterError("t", "t must avoid 0 and 1")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("gamma", "delta", "epsilon", "alpha", "beta", "q", "t")}


@dataclass(frozen=True)
class EllipticHeunParams:
    l0: complex
    l1: complex
    l2: complex
    l3: complex
    E: complex
    lattice: PeriodLattice

    @property
    def l(self) -> tuple:
        return (self.l0, self.l1, self.l2, self.l3)


def heun_ode(p: HeunParams) -> SecondOrderODE:
    t = complex(p.t)
    ab, q = complex(p.alpha * p.beta), complex(p.q)
    qp = {0: (-q / t,), 1: ((ab - q) / (1 - t),), t: ((ab * t - q) / (t * (t - 1)),)}
    pp = {0: (complex(p.gamma),), 1: (complex(p.delta),), t: (complex(p.epsilon),)}
    return SecondOrderODE(pp, qp, name="Heun")


# --- elliptic form ----------------------------------------------------------------


def _E_poly(p: HeunParams) -> tuple[complex, complex]:
    g, d, e = p.gamma, p.delta, p.epsilon
    ab2 = (p.alpha - p.beta) ** 2
    A = (-ab2 + 2 * g * g + 6 * g * e + 2 * e * e - 4 * g - 4 * e - d * d + 2 * d + 1) / 3
    B = (-ab2 + 2 * g * g + 6 * g * d + 2 * d * d - 4 * g - 4 * d - e * e + 2 * e + 1) / 3
    return A, B


def heun_to_elliptic(p: HeunParams, L: PeriodLattice | None = None) -> EllipticHeunParams:
    L = lattice_from_t(p.t) if L is None else L
    if abs(complex(L.t) - complex(p.t)) > 1e-9 * max(1.0, abs(complex(p.t))):
        raise DomainError("lattice does not realise the singular point t")
    A, B = _E_poly(p)
    E = (L.e2 - L.e1) * (-4 * complex(p.q) + A + B * complex(p.t))
    return EllipticHeunParams(p.alpha - p.beta - 0.5, -p.gamma + 0.5, -p.delta + 0.5,
                              -p.epsilon + 0.5, E, L)


def elliptic_to_heun(ep: EllipticHeunParams) -> HeunParams:
    g, d, e = 0.5 - ep.l1, 0.5 - ep.l2, 0.5 - ep.l3
    s = g + d + e - 1
    a, b = (s + ep.l0 + 0.5) / 2, (s - ep.l0 - 0.5) / 2
    t = ep.lattice.t
    partial = HeunParams(g, d, e, a, b, 0.0, t)
    A, B = _E_poly(partial)
    q = (A + B * t - ep.E / (ep.lattice.e2 - ep.lattice.e1)) / 4
    return HeunParams(g, d, e, a, b, q, t)


def elliptic_residual(ep: EllipticHeunParams, x, f, d2f) -> complex:
    """(-d^2/dx^2 + sum l_i (l_i + 1) wp(x + w_i) - E) f."""
    L = ep.lattice
    w = complex(wp(x, L))
    pot = ep.l0 * (ep.l0 + 1) * w
    for j, lj in zip((1, 2, 3), ep.l[1:]):
        ej = L.e(j)
        others = [L.e(k) for k in (1, 2, 3) if k != j]
        pot += lj * (lj + 1) * (ej + (ej - others[0]) * (ej - others[1]) / (w - ej))
    return -d2f + (pot - ep.E) * f


# --- the special families -----------------------------------------------------


def special_heun_kappa_tilde(kappa_tilde, L: PeriodLattice) -> HeunParams:
    kt = complex(kappa_tilde)
    q = -(3 * L.e1 - kt * kt) / (4 * (L.e2 - L.e1))
    return HeunParams(1, 1, 1, 1.5, 0.5, q, L.t)


def special_heun_omega_shift(i: int, kappa, L: PeriodLattice) -> HeunParams:
    """Heun equation solved by the sigma(xi - w_i) kernel: the singular point
    z_i (0, 1, t for i = 1, 2, 3) loses its exponent 1 - gamma."""
    if i not in (1, 2, 3):
        raise DomainError("i must be 1, 2 or 3")
    k2 = complex(kappa) ** 2 / (L.e2 - L.e1)
    zi = (0.0, 1.0, complex(L.t))[i - 1]
    gde = [1, 1, 1]
    gde[i - 1] = 0
    return HeunParams(*gde, 0.5, 0.5, (zi + k2) / 4, L.t)


# --- e-factors and closed-form monodromy -------------------------------------------


def e_factors(alpha, kappa, L: PeriodLattice, limit: bool = False) -> tuple[complex, complex, complex]:
    """exp(2 w_i (kappa + zeta(alpha)) - 2 eta_i alpha), i = 1, 2, 3, with w_2 = -w_1 - w_3.

    ``limit`` gives the alpha -> 0 form exp(2 w_i kappa), kappa being the
    compensated rate."""
    alpha, kappa = complex(alpha), complex(kappa)
    if limit:
        return tuple(cmath.exp(2 * L.half_period(i) * kappa) for i in (1, 2, 3))
    if singular_distance(alpha, L) < 1e-12 and abs(alpha) < 1e-12:
        raise DomainError("alpha on the lattice: use limit=True")
    c = kappa + complex(zeta_w(alpha, L))
    return tuple(cmath.exp(2 * L.half_period(i) * c - 2 * L.eta(i) * alpha) for i in (1, 2, 3))


def segment_e_factors(e: Sequence[complex]) -> tuple[complex, complex, complex]:
    """e-factors of the half-period representatives used by the segments
    (w_1, w_1 + w_3, w_3): the middle one is 1/e[2]."""
    return (e[0], 1 / e[1], e[2])


def _fframe_matrices(e1: complex, es: Sequence[complex], printed: bool = False) -> dict:
    if abs(e1 - 1) < 1e-10:
        raise DegenerateError("e[1] = 1: f_0 and f_1 are linearly dependent")
    out = {"g0": np.array([[1, 2 * (1 - e1)], [0, 1]], dtype=complex),
           "g1": np.array([[1, 0], [-2 * (1 - 1 / e1), 1]], dtype=complex)}
    for j, ej in zip((2, 3), es):
        a = (e1 - ej) if printed else (e1 + ej)
        den = (e1 - 1) * ej
        out[f"g{j}"] = np.array([[1 + 2 * a * (ej - 1) / den, 2 * a * a / den],
                                 [-2 * (ej - 1) ** 2 / den, 1 - 2 * a * (ej - 1) / den]], dtype=complex)
    return out


def closed_form_monodromy_0001(alpha, kappa, L: PeriodLattice, printed: bool = False,
                               base: complex | None = None) -> dict[str, MonodromyResult]:
    """Loops g0..g3 around 0, w_1, w_1 + w_3, w_3 in the x-plane on the basis (f_0, f_1).

    The default form carries the sign from Legendre's relation in the
    (1, 1), (1, 2), (2, 2) entries of g2, g3; ``printed`` gives the variant
    with e[1] - e[j] there instead of e[1] + e[j].
    """
    e = segment_e_factors(e_factors(alpha, kappa, L))
    mats = _fframe_matrices(e[0], e[1:], printed)
    base = default_base(L) if base is None else base
    return {k: MonodromyResult(k, m, base, "(f0, f1)", 0.0) for k, m in mats.items()}


def closed_form_monodromy_heun(kappa_tilde, L: PeriodLattice, printed: bool = False,
                               base: complex | None = None) -> dict[str, MonodromyResult]:
    e = segment_e_factors(e_factors(0, kappa_tilde, L, limit=True))
    if abs(e[0] - 1) < 1e-10:
        raise DegenerateError("exp(2 w_1 kappa~) = 1")
    mats = _fframe_matrices(e[0], e[1:], printed)
    if printed:
        # the displayed limit forms also carry (e_1 - 1)^2 in the (2,1) entries
        for j, ej in zip((2, 3), e[1:]):
            mats[f"g{j}"][1, 0] = -2 * (e[0] - 1) ** 2 / ((e[0] - 1) * ej)
    base = default_base(L) if base is None else base
    return {k: MonodromyResult(k, m, base, "(f0, f1)", 0.0) for k, m in mats.items()}


# --- numeric monodromy on the quadrature frame ------------------------------------------


def default_base(L: PeriodLattice) -> complex:
    return complex(0.37 * L.omega1 + 0.29 * L.omega3)


def loop_points(L: PeriodLattice) -> list[complex]:
    return [segment_half_period(i, L) for i in range(4)]


def quadrature_frame(fun: Callable[[int, complex], complex], x0: complex, L: PeriodLattice,
                     extra: Sequence[complex] = ()) -> np.ndarray:
    """[[f0, f1], [f0', f1']] at x0; derivatives from Cauchy integrals."""
    r = 0.25 * singular_distance(x0, L, extra)
    cols = []
    for i in (0, 1):
        v = x_derivatives(lambda x, i=i: fun(i, x), x0, r, nd=1)
        cols.append(v)
    return np.array([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]], dtype=complex)


def numeric_monodromy(ode: SecondOrderODE, fun: Callable[[int, complex], complex], L: PeriodLattice,
                      base: complex | None = None, tol: float = 1e-11, extra: Sequence[complex] = (),
                      estimate_error: bool = True) -> dict[str, MonodromyResult]:
    """Monodromy of a z-plane equation around x-loops g0..g3, acting on the
    frame of the two quadrature solutions fun(0, .), fun(1, .)."""
    base = default_base(L) if base is None else complex(base)
    X = PulledBackODE(ode, L)
    Y0 = quadrature_frame(fun, base, L, extra)
    pts = loop_points(L)
    clear = 0.05 * min(abs(p - q) for k, p in enumerate(pts) for q in pts[k + 1:])
    res = monodromy_group(X, base, tol=tol, labels=["g0", "g1", "g2", "g3"], points=pts, Y0=Y0,
                          clearance=min(clear, 0.5 * singular_distance(base, L, extra)),
                          estimate_error=estimate_error)
    for r in res.values():
        r.frame = "(f0, f1)"
    return res


def pf_system_ode(alpha, kappa, L: PeriodLattice) -> tuple[SecondOrderODE, complex, complex]:
    """Scalar equation solved by the (alpha, kappa) integrals, with its (lambda, mu)."""
    d = L.e2 - L.e1
    wpa = complex(wp_prime(alpha, L))
    if abs(wpa) < 1e-12:
        raise DomainError("alpha on a half-period")
    lam = (complex(wp(alpha, L)) - L.e1) / d
    mu = -d * complex(kappa) / wpa
    sys_ = build_system(ThetaParams(0, 0, 0, 1), lam, mu, 1, L.t)
    return scalar_reduction(sys_), lam, mu


def numeric_monodromy_0001(alpha, kappa, L: PeriodLattice, order: int = DEFAULT_ORDER,
                           **kw) -> dict[str, MonodromyResult]:
    ode, _, _ = pf_system_ode(alpha, kappa, L)
    fun = lambda i, x: f_alpha(i, x, alpha, kappa, L, order)  # noqa: E731
    return numeric_monodromy(ode, fun, L, extra=[alpha, -alpha], **kw)


def numeric_monodromy_heun(kappa_tilde, L: PeriodLattice, order: int = DEFAULT_ORDER,
                           **kw) -> dict[str, MonodromyResult]:
    ode = heun_ode(special_heun_kappa_tilde(kappa_tilde, L))
    fun = lambda i, x: f_kappa_tilde(i, x, kappa_tilde, L, order)  # noqa: E731
    return numeric_monodromy(ode, fun, L, **kw)


def monodromy_mismatch(a: dict, b: dict, keys=("g0", "g1", "g2", "g3")) -> float:
    return max(float(np.max(np.abs(a[k].matrix - b[k].matrix))) for k in keys)


# --- residual oracles: x-derivatives pushed to z = tilde_wp(x) -------------------


def z_derivatives(vals: Sequence[complex], x: complex, L: PeriodLattice) -> tuple[complex, ...]:
    """(y, y_z, y_zz) from (y, y_x, y_xx) at x."""
    d = L.e2 - L.e1
    w = complex(wp(x, L))
    g2 = -4 * (L.e1 * L.e2 + L.e2 * L.e3 + L.e3 * L.e1)
    z1 = complex(wp_prime(x, L)) / d
    z2 = (6 * w * w - g2 / 2) / d
    y, yx = vals[0], vals[1]
    yz = yx / z1
    if len(vals) < 3:
        return y, yz
    return y, yz, (vals[2] - yz * z2) / z1**2


def kernel_residual(fun: Callable[[complex], complex], ode: SecondOrderODE, x: complex,
                    L: PeriodLattice, extra: Sequence[complex] = ()) -> float:
    """|y'' + p y' + q y| / max(|y''|, |y|) for y(z) = fun(x), z = tilde_wp(x)."""
    r = 0.25 * singular_distance(x, L, extra)
    y, yz, yzz = z_derivatives(x_derivatives(fun, x, r, nd=2), x, L)
    z = (complex(wp(x, L)) - L.e1) / (L.e2 - L.e1)
    return abs(ode.residual(z, y, yz, yzz)) / max(abs(yzz), abs(y), 1e-300)


def system_residual(i: int, x: complex, alpha, kappa, k, L: PeriodLattice,
                    order: int = DEFAULT_ORDER) -> float:
    """Row residual of (f_i, g_i) in D_Y(0,0,0,1; lambda, mu; k), relative to |Y_z|."""
    _, lam, mu = pf_system_ode(alpha, kappa, L)
    S = build_system(ThetaParams(0, 0, 0, 1), lam, mu, k, L.t)
    r = 0.25 * singular_distance(x, L, [alpha, -alpha])
    F = x_derivatives(lambda s: f_alpha(i, s, alpha, kappa, L, order), x, r, nd=1)
    G = x_derivatives(lambda s: g_alpha(i, s, alpha, kappa, k, L, order), x, r, nd=1)
    zx = complex(wp_prime(x, L)) / (L.e2 - L.e1)
    z = (complex(wp(x, L)) - L.e1) / (L.e2 - L.e1)
    Y = np.array([F[0], G[0]])
    Yz = np.array([F[1], G[1]]) / zx
    return float(np.max(np.abs(Yz - S.coefficient(z) @ Y)) / max(1.0, np.max(np.abs(Yz))))


# --- confluent forms of the scalar equation ------------------------------------------


def _tilde_kappas(p: ThetaParams):
    s = p.theta0 + p.theta1 + p.thetat
    return (p.thetainf - s) / 2, -(p.thetainf + s) / 2


def _heun_like(th: ThetaParams, t, qz1: complex, q0: complex, drop: int | None = None,
               shift_pole: int | None = None, name: str = "") -> SecondOrderODE:
    """p = sum (1 - theta_i)/(z - z_i) (theta_i -> theta_i + 1 at ``shift_pole``,
    term removed at ``drop``); q = (qz1 z + q0)/(z(z-1)(z-t))."""
    t = complex(t)
    pts = (0.0, 1.0, t)
    ths = (th.theta0, th.theta1, th.thetat)
    pp = {}
    for k, (z, v) in enumerate(zip(pts, ths)):
        if k == drop:
            continue
        pp[z] = (complex(1 - v - (1 if k == shift_pole else 0)),)
    num = lambda z: qz1 * z + q0  # noqa: E731
    qp = {0.0: (num(0.0) / t,), 1.0: (num(1.0) / (1 - t),), t: (num(t) / (t * (t - 1)),)}
    return SecondOrderODE(pp, qp, name=name)


def mu_zero_limit(th: ThetaParams, lam, t) -> SecondOrderODE:
    """Heun equation left when the apparent point lambda - kappa~1/mu runs to infinity (mu -> 0)."""
    k1, k2 = _tilde_kappas(th)
    qz1 = k1 * (k2 + 2)
    q0 = k1 * (1 - th.thetainf) * lam - k1 * ((k2 + th.thetat + 1) * t + (k2 + th.theta1 + 1))
    return _heun_like(th, t, complex(qz1), complex(q0), name="mu->0")


def theta_inf_one_limit(th: ThetaParams, b, c, t) -> SecondOrderODE:
    """theta~_inf = 1 with mu = b s^2, lambda = c/s, s -> 0."""
    if not _is_zero(th.thetainf - 1):
        raise ParameterError("theta_inf - 1", "this limit needs theta~_inf = 1")
    k1, k2 = _tilde_kappas(th)
    q0 = k1 * b * c * c - k1 * ((k2 + th.thetat + 1) * t + (k2 + th.theta1 + 1))
    return _heun_like(th, t, complex(k1 * (k2 + 2)), complex(q0), name="theta_inf=1")


def lambda_to_singularity(i, th: ThetaParams, mu, t) -> SecondOrderODE:
    """Scalar equation with the apparent point placed on the singular point i (0, 1 or 't')."""
    k = {0: 0, 1: 1, "t": 2}[i]
    k1, k2 = _tilde_kappas(th)
    zi = (0.0, 1.0, complex(t))[k]
    th_i = (th.theta0, th.theta1, th.thetat)[k]
    extra = (t * th_i * mu, (1 - t) * th_i * mu, t * (t - 1) * th_i * mu)[k]
    c = k1 * (k2 + 1)
    return _heun_like(th, t, complex(c), complex(-c * zi + extra), shift_pole=k, name=f"lambda->{i}")


def s_zero_limit(i, th: ThetaParams, b, c, t) -> SecondOrderODE:
    """theta~_i = 0, mu = c/s, lambda = i - kappa1/mu + b s^2, s -> 0."""
    k = {0: 0, 1: 1, "t": 2}[i]
    if not _is_zero((th.theta0, th.theta1, th.thetat)[k]):
        raise ParameterError(f"theta_{i}", "this limit needs theta~_i = 0")
    k1, k2 = _tilde_kappas(th)
    zi = (0.0, 1.0, complex(t))[k]
    extra = (-t * b * c * c, (t - 1) * b * c * c, t * (1 - t) * b * c * c)[k]
    cc = k1 * (k2 + 1)
    return _heun_like(th, t, complex(cc), complex(-cc * zi + extra), drop=k, name=f"s->0 at {i}")


def interep_lambda(p: HeunParams) -> complex:
    """lambda for which the mu -> 0 equation is the given Heun equation (alpha - beta != 1)."""
    a, b = p.alpha, p.beta
    if _is_zero(a - b - 1):
        raise ParameterError("alpha - beta - 1")
    if _is_zero(b):
        raise ParameterError("beta")
    return (p.t * (a - p.epsilon) + (a - p.delta) - p.q / b) / (a - b - 1)


def theta_tilde_of(p: HeunParams) -> ThetaParams:
    """theta~ with 1 - theta~_i = (gamma, delta, epsilon) and infinity exponents
    kappa~1 = beta, kappa~2 + 2 = alpha."""
    return ThetaParams(1 - p.gamma, 1 - p.delta, 1 - p.epsilon, p.beta - p.alpha + 2)


def dy1_from_theta(th: ThetaParams, lam, mu, t, H) -> SecondOrderODE:
    """The scalar equation for generic data; used to check confluent forms."""
    return _dy1_ode(th.theta0, th.theta1, th.thetat, th.kappa1, th.kappa2, lam, mu, t, H)
