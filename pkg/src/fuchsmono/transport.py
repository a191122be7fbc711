"""Analytic continuation of linear ODEs along polylines; monodromy matrices.

Frames are fundamental matrices whose *columns* are solutions. Continuing a
frame Y around a loop gives Y @ M, so the loop's matrix is inv(Y0) @ Y1 and
running loop a and then loop b gives M_b @ M_a.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, NumericError
from .fuchsian import INF, FuchsianSystem, SecondOrderODE

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class GeometryError(DomainError):
    code = "GEOMETRY"


class ContinuationError(NumericError):
    code = "CONTINUATION"


@dataclass(frozen=True)
class PathPolyline:
    points: tuple
    clearance: float = 0.0

    def __post_init__(self):
        if len(self.points) < 2:
            raise GeometryError("a path needs at least two points")

    @property
    def segments(self):
        return list(zip(self.points[:-1], self.points[1:]))

    def reversed(self) -> "PathPolyline":
        return PathPolyline(tuple(reversed(self.points)), self.clearance)

    def __add__(self, other: "PathPolyline") -> "PathPolyline":
        if abs(self.points[-1] - other.points[0]) > 1e-12:
            raise GeometryError("paths do not join")
        return PathPolyline(self.points + other.points[1:], min(self.clearance, other.clearance))

    def min_distance(self, pts: Iterable[complex]) -> float:
        return min((_seg_dist(a, b, p) for a, b in self.segments for p in pts), default=math.inf)

    def winding_number(self, p: complex) -> float:
        """Argument accumulation; closed paths give an integer."""
        total = 0.0
        for a, b in self.segments:
            total += cmath.phase((b - p) / (a - p))
        return total / (2 * math.pi)


def _seg_dist(a: complex, b: complex, p: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    s = ((p - a) * d.conjugate()).real / abs(d) ** 2
    s = min(1.0, max(0.0, s))
    return abs(a + s * d - p)


def _coefficient_fn(obj) -> Callable[[complex], np.ndarray]:
    if isinstance(obj, FuchsianSystem):
        A0, A1, At = obj.arrays()
        t = complex(obj.t)
        return lambda z: A0 / z + A1 / (z - 1) + At / (z - t)
    if isinstance(obj, SecondOrderODE):
        return obj.companion
    if callable(obj):
        return obj
    raise TypeError(f"cannot continue an object of type {type(obj).__name__}")


def singularities_of(obj) -> list:
    if isinstance(obj, FuchsianSystem):
        return [0j, 1 + 0j, complex(obj.t)]
    if isinstance(obj, SecondOrderODE):
        return [complex(s) for s in obj.singular_points if s != INF]
    return list(getattr(obj, "singularities", []))


@dataclass
class ContinuationStats:
    steps: int = 0
    rejected: int = 0
    err_sum: float = 0.0


def _integrate_segment(M, a, b, Y, tol, stats, hmin=1e-13, max_steps=200000):
    d = b - a
    s, h = 0.0, 0.05
    f = lambda s_, Y_: d * (M(a + s_ * d) @ Y_)  # noqa: E731
    k1 = f(0.0, Y)
    while s < 1.0:
        h = min(h, 1.0 - s)
        ks = [k1]
        for i in range(1, 7):
            Yi = Y + h * sum(c * kk for c, kk in zip(_A[i], ks))
            ks.append(f(s + _C[i] * h, Yi))
        Y5 = Y + h * sum(c * kk for c, kk in zip(_B5, ks) if c)
        err = h * sum(c * kk for c, kk in zip(_E, ks))
        scale = tol * (1.0 + np.maximum(np.abs(Y), np.abs(Y5)))
        en = float(np.max(np.abs(err) / scale))
        if en <= 1.0:
            s += h
            Y = Y5
            k1 = ks[6]  # FSAL
            stats.steps += 1
            stats.err_sum += en * tol
            fac = 5.0 if en == 0 else min(5.0, 0.9 * en ** -0.2)
        else:
            stats.rejected += 1
            fac = max(0.2, 0.9 * en ** -0.2)
        h *= fac
        if h < hmin:
            raise ContinuationError(f"step size underflow near z={a + s * d}")
        if stats.steps + stats.rejected > max_steps:
            raise ContinuationError(f"too many steps near z={a + s * d}")
    return Y


def continue_frame(obj, path: PathPolyline, Y0, tol: float = 1e-10,
                   stats: ContinuationStats | None = None) -> np.ndarray:
    """Continue the frame Y0 (columns are solutions) along ``path``."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    M = _coefficient_fn(obj)
    sing = singularities_of(obj)
    if sing and path.min_distance(sing) < max(path.clearance, 1e-12) * 0.999:
        raise GeometryError("path passes too close to a singular point")
    Y = np.array(Y0, dtype=complex)
    stats = stats if stats is not None else ContinuationStats()
    for a, b in path.segments:
        if a != b:
            Y = _integrate_segment(M, complex(a), complex(b), Y, tol, stats)
    return Y


def default_clearance(sing: Sequence[complex]) -> float:
    sing = list(sing)
    dmin = min((abs(p - q) for i, p in enumerate(sing) for q in sing[i + 1:]), default=1.0)
    return 0.05 * dmin


def loop_polyline(base: complex, singularity: complex, others: Sequence[complex] = (),
                  clearance: float | None = None, radius: float | None = None,
                  via: Sequence[complex] = (), nvert: int = 48) -> PathPolyline:
    """Anticlockwise loop from ``base`` around ``singularity`` only.

    The path runs base -> via... -> circle around the point -> back the same
    way. Raises GeometryError when the requested clearance cannot be met.
    """
    base, s0 = complex(base), complex(singularity)
    others = [complex(o) for o in others if abs(complex(o) - s0) > 1e-14]
    allsing = [s0] + others
    if clearance is None:
        clearance = default_clearance(allsing)
    if min(abs(base - p) for p in allsing) <= clearance:
        raise GeometryError("base point is within the clearance of a singular point")
    dnear = min((abs(o - s0) for o in others), default=abs(base - s0))
    if radius is None:
        radius = min(0.4 * dnear, 0.5 * abs(base - s0))
    if radius < clearance or dnear - radius < clearance:
        raise GeometryError("singularities too close for the requested clearance")
    lead = [base] + [complex(v) for v in via]
    last = lead[-1]
    start_ang = cmath.phase(last - s0)
    entry = s0 + radius * cmath.exp(1j * start_ang)
    circle = [s0 + radius * cmath.exp(1j * (start_ang + 2 * math.pi * j / nvert))
              for j in range(nvert + 1)]
    pts = lead + circle + lead[::-1]
    pts[len(lead) + nvert] = entry  # close exactly
    path = PathPolyline(tuple(pts), clearance)
    if others and path.min_distance(others) < clearance:
        raise GeometryError("loop passes within the clearance of another singular point")
    return path


def circle_path(center: complex, radius: float, nvert: int = 64, start: complex | None = None,
                turns: int = 1) -> PathPolyline:
    start_ang = 0.0 if start is None else cmath.phase(start - center)
    pts = [center + radius * cmath.exp(1j * (start_ang + 2 * math.pi * turns * j / nvert))
           for j in range(nvert + 1)]
    pts[-1] = pts[0]
    return PathPolyline(tuple(pts))


@dataclass
class MonodromyResult:
    label: str
    matrix: np.ndarray
    base: complex
    frame: str
    error_estimate: float = float("nan")
    path: PathPolyline | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"label": self.label, "matrix": self.matrix, "base": self.base,
                "frame": self.frame, "error_estimate": self.error_estimate}


def loop_matrix(obj, path: PathPolyline, Y0=None, tol: float = 1e-10,
                estimate_error: bool = True) -> tuple[np.ndarray, float]:
    n = _coefficient_fn(obj)(complex(path.points[0])).shape[0] if Y0 is None else np.shape(Y0)[0]
    Y0 = np.eye(n, dtype=complex) if Y0 is None else np.asarray(Y0, dtype=complex)
    Y1 = continue_frame(obj, path, Y0, tol)
    Mat = np.linalg.solve(Y0, Y1)
    err = float("nan")
    if estimate_error:
        Y1b = continue_frame(obj, path, Y0, tol / 32)
        err = float(np.max(np.abs(np.linalg.solve(Y0, Y1b) - Mat)))
    return Mat, err


def _fan_order(base: complex, pts: Sequence[complex]) -> list[int]:
    """Indices of pts in the order an anticlockwise loop around all of them,
    started at base, crosses their spokes (increasing angle after the widest
    empty sector)."""
    angs = [cmath.phase(p - base) % (2 * math.pi) for p in pts]
    srt = sorted(range(len(pts)), key=lambda i: angs[i])
    gaps = [(angs[srt[(j + 1) % len(srt)]] - angs[srt[j]]) % (2 * math.pi) for j in range(len(srt))]
    if len(srt) == 1:
        return srt
    j = max(range(len(gaps)), key=lambda i: gaps[i])
    return srt[j + 1:] + srt[:j + 1]


def monodromy_group(obj, base: complex, tol: float = 1e-10, labels: Sequence[str] | None = None,
                    points: Sequence[complex] | None = None, Y0=None,
                    clearance: float | None = None, estimate_error: bool = True,
                    via: dict | None = None) -> dict[str, MonodromyResult]:
    """Monodromy of each finite singular point plus infinity on the frame Y0 at base.

    Loops are straight spokes from ``base`` with small circles. The matrix
    for infinity is the inverse of the product of the finite ones taken in
    the order in which the spokes compose to a loop around all finite points;
    ``direct_infinity`` checks it against a large circle.
    """
    pts = [complex(p) for p in (points if points is not None else singularities_of(obj))]
    labels = list(labels) if labels is not None else [str(p) for p in pts]
    base = complex(base)
    via = via or {}
    frame = "identity at base" if Y0 is None else "caller frame at base"
    out: dict[str, MonodromyResult] = {}
    for lab, p in zip(labels, pts):
        path = loop_polyline(base, p, pts, clearance=clearance, via=via.get(lab, ()))
        Mat, err = loop_matrix(obj, path, Y0, tol, estimate_error)
        out[lab] = MonodromyResult(lab, Mat, base, frame, err, path)
    prod = np.eye(out[labels[0]].matrix.shape[0], dtype=complex)
    for i in _fan_order(base, pts):
        prod = out[labels[i]].matrix @ prod
    errs = [r.error_estimate for r in out.values()]
    out["inf"] = MonodromyResult("inf", np.linalg.inv(prod), base, frame,
                                 float(np.nansum(errs)) if errs else float("nan"))
    return out


def direct_infinity(obj, base: complex, tol: float = 1e-10, Y0=None,
                    points: Sequence[complex] | None = None) -> np.ndarray:
    """Matrix of a clockwise loop around all finite singular points, i.e. an
    anticlockwise loop around infinity."""
    pts = [complex(p) for p in (points if points is not None else singularities_of(obj))]
    center = sum(pts) / len(pts)
    R = max(abs(p - center) for p in pts) + abs(base - center) + 1.0
    far = center + R * (base - center) / abs(base - center)
    circ = circle_path(center, R, nvert=96, start=far).reversed()
    path = PathPolyline((base, far)) + circ + PathPolyline((far, base))
    Mat, _ = loop_matrix(obj, path, Y0, tol, estimate_error=False)
    return Mat


def cyclic_relation_residual(res: dict[str, MonodromyResult], order: Sequence[str]) -> float:
    """|M_inf ... M_order[1] M_order[0] - I| for loops composed in ``order``."""
    prod = np.eye(res[order[0]].matrix.shape[0], dtype=complex)
    for lab in order:
        prod = res[lab].matrix @ prod
    prod = res["inf"].matrix @ prod
    return float(np.max(np.abs(prod - np.eye(prod.shape[0]))))


class PulledBackODE:
    """A z-plane second-order equation rewritten in x, z = (wp(x) - e1)/(e2 - e1).

    y_xx + (z' p(z) - z''/z') y_x + z'^2 q(z) y = 0.  Callable: returns the
    companion matrix at x.  ``singularities`` lists the x-preimages of the
    singular points within ``window`` periods of the origin.
    """

    def __init__(self, ode: SecondOrderODE, L, window: int = 2):
        from .elliptic import wp_inverse  # local: elliptic is heavier than the rest of this module
        self.ode, self.L = ode, L
        d = L.e2 - L.e1
        self._d = d
        self._g2 = -4 * (L.e1 * L.e2 + L.e2 * L.e3 + L.e3 * L.e1)
        base = [0j, complex(L.omega1), complex(L.omega1 + L.omega3), complex(L.omega3)]
        known = {0j: 1, 1 + 0j: 2, complex(L.t): 3}
        for s in ode.singular_points:
            if s == INF or any(abs(complex(s) - k) < 1e-12 for k in known):
                continue
            a = complex(wp_inverse(L.e1 + d * complex(s), L))
            base += [a, -a]
        pts = []
        for m in range(-window, window + 1):
            for n in range(-window, window + 1):
                for b in base:
                    pts.append(b + 2 * m * L.omega1 + 2 * n * L.omega3)
        self.singularities = pts

    def __call__(self, x: complex) -> np.ndarray:
        from .elliptic import wp, wp_prime
        L = self.L
        w = complex(wp(x, L))
        w1 = complex(wp_prime(x, L))
        w2 = 6 * w * w - self._g2 / 2
        z = (w - L.e1) / self._d
        z1, z2 = w1 / self._d, w2 / self._d
        p = z1 * self.ode.p(z) - z2 / z1
        q = z1 * z1 * self.ode.q(z)
        return np.array([[0, 1], [-q, -p]], dtype=complex)
