"""Additive middle convolution of a residue triple and the s2 parameter map."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateError, ParameterError
from .fuchsian import FuchsianSystem, ThetaParams, _is_zero, build_system

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ConvolutionTuple:
    B0: np.ndarray
    B1: np.ndarray
    Bt: np.ndarray
    nu: complex

    @property
    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.B0, self.B1, self.Bt)


@dataclass(frozen=True)
class SubspaceBasis:
    L: list           # [L0 gens, L1 gens, Lt gens], each a list of 6-vectors
    K: list           # generators of the common kernel

    @property
    def all_vectors(self) -> list:
        return [v for block in self.L for v in block] + list(self.K)


@dataclass(frozen=True)
class ConvolutionRecord:
    """How the reduced triple was obtained."""

    quotient_rows: np.ndarray   # 2x6 linear map C^6 -> C^2 killing K + L
    pivots: tuple               # standard basis indices completing K + L
    gauge: np.ndarray           # 2x2 conjugation applied after the pivot basis
    dim_KL: int


def convolution_matrices(A0, A1, At, nu) -> ConvolutionTuple:
    A = [np.asarray(M, dtype=complex) for M in (A0, A1, At)]
    Bs = []
    for i in range(3):
        B = np.zeros((6, 6), dtype=complex)
        for j in range(3):
            B[2 * i:2 * i + 2, 2 * j:2 * j + 2] = A[j]
        B[2 * i:2 * i + 2, 2 * i:2 * i + 2] += nu * np.eye(2)
        Bs.append(B)
    return ConvolutionTuple(*Bs, complex(nu))


def _null_space(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    return sla.null_space(M, rcond=rtol)


def kernel_spaces(sys: FuchsianSystem, nu) -> SubspaceBasis:
    """Generators of L0, L1, Lt (block kernels) and K (common kernel of the B's).

    For nu = kappa1 the closed-form generators are returned; otherwise the
    kernels are computed numerically.
    """
    s = sys.numeric()
    A = s.arrays()
    L = []
    use_closed = abs(complex(nu) - complex(s.params.kappa1)) < 1e-14 and len(s.u) == 3
    th = (s.params.theta0, s.params.theta1, s.params.thetat)
    for i in range(3):
        if use_closed:
            v = np.zeros(6, dtype=complex)
            v[2 * i] = s.w[i]
            v[2 * i + 1] = s.u[i] + th[i]
            L.append([v])
        else:
            ker = _null_space(A[i])
            gens = []
            for col in ker.T:
                v = np.zeros(6, dtype=complex)
                v[2 * i:2 * i + 2] = col
                gens.append(v)
            L.append(gens)
    if use_closed:
        K = [np.array([1, 0, 1, 0, 1, 0], dtype=complex)]
    else:
        ct = convolution_matrices(*A, nu)
        K = list(_null_space(np.vstack(ct.matrices)).T)
    return SubspaceBasis(L, K)


def _complete_basis(vectors: list, rtol: float = RANK_RTOL) -> tuple[np.ndarray, tuple]:
    """Append standard basis vectors (fixed order) to span C^6; returns the
    accepted pivots."""
    basis = [np.asarray(v, dtype=complex) for v in vectors]
    M = np.array(basis).T if basis else np.zeros((6, 0), dtype=complex)
    rank = np.linalg.matrix_rank(M, tol=rtol * max(1.0, np.abs(M).max(initial=0))) if basis else 0
    pivots = []
    for j in range(6):
        e = np.zeros(6, dtype=complex)
        e[j] = 1
        trial = np.column_stack([M, e])
        r = np.linalg.matrix_rank(trial, tol=rtol * max(1.0, np.abs(trial).max()))
        if r > rank:
            M, rank = trial, r
            pivots.append(j)
        if rank == 6:
            break
    return M, tuple(pivots)


def _diag_gauge(Binf: np.ndarray, target: tuple[complex, complex]) -> np.ndarray:
    """Matrix P with P^-1 Binf P = diag(target)."""
    cols = []
    for lam in target:
        v = _null_space(Binf - lam * np.eye(2), rtol=1e-8)
        if v.shape[1] != 1:
            raise DegenerateError("residue at infinity of the reduced triple is not diagonalisable as expected")
        cols.append(v[:, 0])
    return np.column_stack(cols)


def middle_convolution(sys: FuchsianSystem, nu, normalize: bool = True):
    """Induced action of B0, B1, Bt on C^6/(K+L).

    With ``normalize`` the quotient basis is conjugated so that the residue
    at infinity is diag(kappa1~, kappa2~) and the (1,2) entry of the first
    residue equals that of the s2-transformed system with the same k.
    Returns ([B0~, B1~, Bt~], ConvolutionRecord).
    """
    ct = convolution_matrices(*sys.arrays(), nu)
    sp = kernel_spaces(sys, nu)
    vecs = sp.all_vectors
    KL = np.array(vecs).T
    dim = int(np.linalg.matrix_rank(KL, tol=RANK_RTOL * max(1.0, np.abs(KL).max())))
    if dim != 4:
        raise DegenerateError(f"dim(K+L) = {dim}, expected 4 for a 2-dimensional quotient")
    # keep an independent subset of the generators
    indep = []
    for v in vecs:
        trial = np.array(indep + [v]).T
        if np.linalg.matrix_rank(trial, tol=RANK_RTOL * max(1.0, np.abs(trial).max())) > len(indep):
            indep.append(v)
    full, pivots = _complete_basis(indep)
    if len(pivots) != 2:
        raise DegenerateError(f"quotient dimension {len(pivots)} != 2")
    Finv = np.linalg.inv(full)
    proj = Finv[4:6]            # coordinates along the two completing pivots
    lift = full[:, 4:6]
    red = [proj @ B @ lift for B in ct.matrices]
    gauge = np.eye(2, dtype=complex)
    if normalize:
        p2, lam2, mu2 = okamoto_s2(sys.params, sys.lam, sys.mu)
        target = (complex(p2.kappa1), complex(p2.kappa2))
        Binf = -(red[0] + red[1] + red[2])
        P = _diag_gauge(Binf, target)
        red = [np.linalg.solve(P, B) @ P for B in red]
        want = -complex(sys.k) * complex(lam2) / complex(sys.t)  # -w0 of the s2 image
        if abs(red[0][0, 1]) < 1e-300:
            raise DegenerateError("cannot fix the diagonal gauge: (1,2) entry vanishes")
        D = np.diag([1.0, want / red[0][0, 1]])
        red = [np.linalg.solve(D, B) @ D for B in red]
        gauge = P @ D
        proj = np.linalg.solve(gauge, proj)
    return red, ConvolutionRecord(proj, pivots, gauge, dim)


def s_matrix(sys: FuchsianSystem) -> np.ndarray:
    """Change of basis putting the convolved system (nu = kappa1) in block
    triangular form; its first two coordinates carry the s2-image system."""
    s = sys.numeric()
    t, mu, k = s.t, s.mu, s.k
    k2, thi = s.params.kappa2, s.params.thetainf
    (u0, u1, ut), (w0, w1, wt) = s.u, s.w
    v0 = u0 + s.params.theta0
    v1 = u1 + s.params.theta1
    vt = ut + s.params.thetat
    for name, val in (("kappa2", k2), ("theta_inf", thi), ("u0+theta0", v0),
                      ("u1+theta1", v1), ("ut+thetat", vt)):
        if abs(val) < 1e-300:
            raise ParameterError(name)
    # no w_t in these denominators: with it the reduced block lands in the
    # gauge k -> k*w_t and det S misses the closed form by the same factor
    s31 = t * (t - 1) * mu * w0 * w1 * ut / (k * k * k2 * v0 * v1)
    s51 = t * (1 - t) * mu * w0 * wt * u1 / (k * k * k2 * v0 * vt)
    s32 = (w0 / v0 - w1 / v1) / thi
    s52 = (w0 / v0 - wt / vt) / thi
    S = np.array([
        [0, 0, 1, w0, 0, 0],
        [0, 0, 0, v0, 0, 0],
        [s31, s32, 1, 0, w1, 0],
        [0, 0, 0, 0, v1, 0],
        [s51, s52, 1, 0, 0, wt],
        [0, 0, 0, 0, 0, vt],
    ], dtype=complex)
    if abs(np.linalg.det(S)) < 1e-300:
        raise DegenerateError("S is singular")
    return S


def s_matrix_reduction(sys: FuchsianSystem) -> tuple[list, list]:
    """Conjugate each B_i (nu = kappa1) by S; returns (top-left 2x2 blocks, full conjugates)."""
    S = s_matrix(sys)
    ct = convolution_matrices(*sys.arrays(), sys.numeric().params.kappa1)
    conj = [np.linalg.solve(S, B @ S) for B in ct.matrices]
    return [C[:2, :2] for C in conj], conj


def u_frame_det(sys: FuchsianSystem) -> complex:
    """Closed form of det S for the convolved system."""
    s = sys.numeric()
    lam, t = s.lam, s.t
    return s.k * lam * (lam - 1) * (lam - t) * s.mu / (t * (1 - t) * s.params.thetainf)


def okamoto_s2(params: ThetaParams, lam, mu) -> tuple[ThetaParams, Any, Any]:
    """theta_i -> kappa1 + theta_i (i = 0, 1, t), theta_inf -> -kappa2,
    lambda -> lambda + kappa1/mu, mu fixed."""
    if _is_zero(mu):
        raise ParameterError("mu", "mu = 0 is a pole of s2")
    k1, k2 = params.kappa1, params.kappa2
    p2 = ThetaParams(k1 + params.theta0, k1 + params.theta1, k1 + params.thetat, -k2)
    if isinstance(mu, int):
        mu = Fraction(mu)
    return p2, lam + k1 / mu, mu


def s2_system(sys: FuchsianSystem) -> FuchsianSystem:
    """build_system at the s2-transformed parameters with the same k and t."""
    p2, lam2, mu2 = okamoto_s2(sys.params, sys.lam, sys.mu)
    return build_system(p2, lam2, mu2, sys.k, sys.t)
