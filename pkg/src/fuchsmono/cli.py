"""Command-line front end.

Each subcommand prints one JSON document (or a CSV table) and exits with 0
only if every check it ran is within tolerance.  Configuration comes from
built-in defaults, then an optional JSON file (--config), then flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import __version__
from .elliptic import PeriodLattice, lattice_from_t, lattice_from_tau, wp, wp_prime
from .errors import DegenerateError, DomainError, FuchsMonoError, ParameterError
from .fuchsian import ThetaParams, build_system
from .heun import (HeunParams, closed_form_monodromy_0001, closed_form_monodromy_heun,
                   heun_ode, kernel_residual, monodromy_mismatch, numeric_monodromy_0001,
                   numeric_monodromy_heun, pf_system_ode, special_heun_kappa_tilde,
                   special_heun_omega_shift, system_residual)
from .integral import (algebraic_integral, f_alpha, f_kappa_tilde, f_omega_shift, g_alpha,
                       segment_half_period)
from .midconv import middle_convolution, s2_system, s_matrix_reduction
from .painleve import (PICARD_PARAMS, PicardData, exponent_mismatch, monodromy_drift,
                       picard_rows, rows_to_csv, tau_grid)
from .transport import monodromy_group

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

DEFAULTS: dict[str, Any] = {
    "format": "json",
    "order": 64,
    "seed": 0,
    "cont_tol": 1e-11,
    "rank_rtol": 1e-10,
}

# per-command default tolerance for the main check
DEFAULT_TOL = {
    "lattice": 1e-9, "build": 1e-12, "midconv": 1e-9, "monodromy": 1e-5,
    "integral": 1e-6, "picard": 1e-5, "density": 1e-8,
}


# --- values in and out -------------------------------------------------------


def parse_number(v):
    """'1/3' -> Fraction, '0.7+0.2j' or '0.7+0.2i' -> complex, [re, im] -> complex."""
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float, complex, Fraction)):
        return v
    s = str(v).strip().replace(" ", "")
    try:
        return Fraction(s)
    except ValueError:
        pass
    return complex(s.replace("i", "j"))


def parse_list(v) -> list:
    if isinstance(v, (list, tuple)):
        return [parse_number(x) for x in v]
    return [parse_number(x) for x in str(v).split(",") if x.strip()]


def jsonable(obj):
    if obj is None:
        return None
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj) if obj.denominator != 1 else obj.numerator
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_real(obj.real), _real(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _real(obj)
    if isinstance(obj, PeriodLattice):
        return jsonable(obj.to_dict())
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return str(obj)


def _real(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def check(name: str, value, tolerance: float, error_estimate=None, passed: bool | None = None) -> dict:
    """Result record; by default passes when |value| <= tolerance."""
    if passed is None:
        passed = bool(abs(value) <= tolerance)
    return {"name": name, "value": value, "error_estimate": error_estimate,
            "tolerance": tolerance, "pass": bool(passed)}


# --- shared argument handling ------------------------------------------------------


def _lattice(cfg: dict) -> PeriodLattice:
    if cfg.get("t") is not None:
        return lattice_from_t(complex(parse_number(cfg["t"])))
    return lattice_from_tau(complex(parse_number(cfg.get("tau") or "1.1j")))


def _random_fraction(rng, lo=-9, hi=10, den=7, nonzero: bool = False) -> Fraction:
    while True:
        v = Fraction(int(rng.integers(lo, hi)), int(rng.integers(1, den)))
        if v or not nonzero:
            return v


def _system(cfg: dict, rng):
    """System from --theta/--lam/--mu/--k/--t, drawing missing values from the seeded RNG."""
    for _ in range(100):
        theta = parse_list(cfg["theta"]) if cfg.get("theta") is not None else \
            [_random_fraction(rng, nonzero=True) for _ in range(4)]
        if len(theta) != 4:
            raise DomainError("--theta needs four values")
        vals = {}
        for key in ("lam", "mu", "k", "t"):
            vals[key] = parse_number(cfg[key]) if cfg.get(key) is not None else \
                _random_fraction(rng, nonzero=True)
        try:
            return build_system(ThetaParams(*theta), vals["lam"], vals["mu"], vals["k"], vals["t"])
        except ParameterError:
            if all(cfg.get(k) is not None for k in ("theta", "lam", "mu", "k", "t")):
                raise
    raise DegenerateError("no admissible random draw in 100 attempts")


def _system_dump(s) -> dict:
    return {"theta": list(s.params.as_tuple()), "lambda": s.lam, "mu": s.mu, "k": s.k, "t": s.t,
            "A0": s.A0, "A1": s.A1, "At": s.At, "Ainf": s.Ainf}


# --- subcommands --------------------------------------------------------------


def cmd_lattice(cfg: dict, rng) -> tuple[dict, list]:
    L = _lattice(cfg)
    tol = cfg["tol"]
    n = int(cfg.get("points") or 100)
    uv = rng.uniform(0.05, 0.95, size=(n, 2))
    xs = 2 * (uv[:, 0] * L.omega1 + uv[:, 1] * L.omega3)
    w, dw = wp(xs, L), wp_prime(xs, L)
    ode = np.abs(dw**2 - 4 * (w - L.e1) * (w - L.e2) * (w - L.e3)) / np.maximum(1.0, np.abs(dw) ** 2)
    checks = [check("legendre_relation", L.legendre_residual(), 1e-10),
              check("wp_ode_residual", float(np.max(ode)), tol)]
    return {"lattice": L.to_dict()}, checks


def cmd_build(cfg: dict, rng) -> tuple[dict, list]:
    s = _system(cfg, rng)
    dets = [M[0][0] * M[1][1] - M[0][1] * M[1][0] for M in s.residues]
    off = [s.Ainf[0][1], s.Ainf[1][0]]
    exact = all(isinstance(v, Fraction) for v in dets + off)
    eig = 0.0
    for M, th in zip(s.numeric().arrays(), s.params.to_complex().as_tuple()[:3]):
        ev = sorted(np.linalg.eigvals(M), key=abs)
        want = sorted([0j, th], key=abs)
        scale = max(1.0, float(np.max(np.abs(M))))
        eig = max(eig, max(abs(a - b) for a, b in zip(ev, want)) / scale)
    checks = [check("det_Ai", max(abs(complex(d)) for d in dets), 0.0 if exact else cfg["tol"]),
              check("Ainf_offdiagonal", max(abs(complex(v)) for v in off), 0.0 if exact else cfg["tol"]),
              check("eigenvalues_0_theta_relative", eig, cfg["tol"])]
    return {"system": _system_dump(s), "exact": exact}, checks


def cmd_midconv(cfg: dict, rng) -> tuple[dict, list]:
    s = _system(cfg, rng)
    nu = parse_number(cfg["nu"]) if cfg.get("nu") is not None else s.params.kappa1
    red, rec = middle_convolution(s, complex(nu))
    target = s2_system(s)
    data = {"system": _system_dump(s), "nu": nu, "reduced": red, "target": _system_dump(target),
            "dim_KL": rec.dim_KL}
    checks = []
    if abs(complex(nu) - complex(s.params.kappa1)) < 1e-14:
        want = target.numeric().arrays()
        scale = max(1.0, max(float(np.max(np.abs(a))) for a in want))
        dev = max(float(np.max(np.abs(a - b))) for a, b in zip(red, want)) / scale
        blocks, _ = s_matrix_reduction(s)
        dev_s = max(float(np.max(np.abs(a - b))) for a, b in zip(blocks, want)) / scale
        checks += [check("reduced_vs_s2_relative", dev, cfg["tol"]),
                   check("s_matrix_vs_s2_relative", dev_s, cfg["tol"])]
    return data, checks


def _family(cfg: dict):
    if cfg.get("heun") is not None:
        return "heun", None
    if cfg.get("kappa_tilde") is not None:
        return "kappa-tilde", complex(parse_number(cfg["kappa_tilde"]))
    if cfg.get("alpha") is not None and cfg.get("kappa") is not None:
        return "alpha", (complex(parse_number(cfg["alpha"])), complex(parse_number(cfg["kappa"])))
    raise DomainError("monodromy needs --heun, --kappa-tilde, or --alpha with --kappa")


def _matrices(res: dict) -> dict:
    return {k: {"matrix": r.matrix, "error_estimate": r.error_estimate} for k, r in res.items()}


def cmd_monodromy(cfg: dict, rng) -> tuple[dict, list]:
    mode = cfg.get("mode") or "compare"
    kind, par = _family(cfg)
    if kind == "heun":
        vals = parse_list(cfg["heun"])
        if len(vals) != 7:
            raise DomainError("--heun needs gamma,delta,epsilon,alpha,beta,q,t")
        p = HeunParams(*vals)
        if mode != "numeric":
            raise DomainError("closed forms exist only for the kappa-tilde and (alpha, kappa) families")
        ode = heun_ode(p)
        t = complex(p.t)
        base = complex(parse_number(cfg["base"])) if cfg.get("base") else (1 + t) / 3 + 0.61j
        res = monodromy_group(ode, base, tol=cfg["cont_tol"], labels=["0", "1", "t"],
                              points=[0j, 1 + 0j, t])
        err = max(r.error_estimate for k, r in res.items() if k != "inf")
        return ({"family": "heun", "params": p.to_dict(), "base": base, "numeric": _matrices(res)},
                [check("continuation_error", err, cfg["tol"])])
    L = _lattice(cfg)
    printed = bool(cfg.get("printed"))
    if kind == "kappa-tilde":
        closed = closed_form_monodromy_heun(par, L, printed=printed)
        numeric = (lambda: numeric_monodromy_heun(par, L, cfg["order"], tol=cfg["cont_tol"]))
    else:
        closed = closed_form_monodromy_0001(*par, L, printed=printed)
        numeric = (lambda: numeric_monodromy_0001(*par, L, cfg["order"], tol=cfg["cont_tol"]))
    data: dict = {"family": kind, "lattice": L.to_dict(), "printed_forms": printed}
    checks = []
    if mode in ("closed", "compare"):
        data["closed"] = _matrices(closed)
        det = max(abs(np.linalg.det(r.matrix) - 1) for r in closed.values())
        checks.append(check("closed_det_one", float(det), 1e-10))
    if mode in ("numeric", "compare"):
        num = numeric()
        data["numeric"] = _matrices(num)
        err = max(r.error_estimate for k, r in num.items() if k != "inf")
        checks.append(check("continuation_error", err, cfg["tol"]))
    if mode == "compare":
        checks.append(check("max_deviation", monodromy_mismatch(closed, num), cfg["tol"]))
    if mode not in ("numeric", "closed", "compare"):
        raise DomainError(f"unknown mode {mode!r}")
    return data, checks


def _kernel(cfg: dict, L: PeriodLattice) -> tuple[Callable, Callable[[complex], float], dict]:
    kernel = cfg.get("kernel") or "kappa-tilde"
    i = int(cfg.get("i") if cfg.get("i") is not None else 0)
    num = lambda key, dflt: complex(parse_number(cfg[key] if cfg.get(key) is not None else dflt))  # noqa: E731
    if kernel == "alpha":
        a, k = num("alpha", "0.31+0.17j"), num("kappa", "0.4-0.3j")
        ode = pf_system_ode(a, k, L)[0]
        return ((lambda x, n: f_alpha(i, x, a, k, L, n)),
                (lambda x: kernel_residual(lambda s: f_alpha(i, s, a, k, L, cfg["order"]), ode, x, L, [a, -a])),
                {"alpha": a, "kappa": k})
    if kernel == "g-alpha":
        a, k, kk = num("alpha", "0.31+0.17j"), num("kappa", "0.4-0.3j"), num("k", "1")
        return ((lambda x, n: g_alpha(i, x, a, k, kk, L, n)),
                (lambda x: system_residual(i, x, a, k, kk, L, cfg["order"])),
                {"alpha": a, "kappa": k, "k": kk})
    if kernel == "kappa-tilde":
        kt = num("kappa_tilde", "0.3")
        ode = heun_ode(special_heun_kappa_tilde(kt, L))
        return ((lambda x, n: f_kappa_tilde(i, x, kt, L, n)),
                (lambda x: kernel_residual(lambda s: f_kappa_tilde(i, s, kt, L, cfg["order"]), ode, x, L)),
                {"kappa_tilde": kt})
    if kernel == "omega-shift":
        j = int(cfg.get("shift") or 1)
        k = num("kappa", "0.4-0.3j")
        ode = heun_ode(special_heun_omega_shift(j, k, L))
        return ((lambda x, n: f_omega_shift(i, x, j, k, L, n)),
                (lambda x: kernel_residual(lambda s: f_omega_shift(i, s, j, k, L, cfg["order"]), ode, x, L)),
                {"kappa": k, "shift": j})
    raise DomainError(f"unknown kernel {kernel!r}")


def cmd_integral(cfg: dict, rng) -> tuple[dict, list]:
    L = _lattice(cfg)
    x = complex(parse_number(cfg["x"])) if cfg.get("x") is not None else \
        complex(0.37 * L.omega1 + 0.29 * L.omega3)
    fun, resid, params = _kernel(cfg, L)
    n = cfg["order"]
    v = fun(x, n)
    err = abs(fun(x, 2 * n) - v)
    r = resid(x)
    data = {"kernel": cfg.get("kernel") or "kappa-tilde", "i": int(cfg.get("i") or 0), "x": x,
            "params": params, "order": n, "lattice": L.to_dict()}
    return data, [check("value", v, cfg["tol"], err, passed=err <= cfg["tol"]),
                  check("ode_residual", r, cfg["tol"])]


def cmd_picard(cfg: dict, rng) -> tuple[dict, list]:
    pd = PicardData(complex(parse_number(cfg.get("C1") or "1/3")),
                    complex(parse_number(cfg.get("C3") or "1/5")))
    tau0 = complex(parse_number(cfg.get("tau0") or "0.2+1.1j"))
    taus = tau_grid(int(cfg.get("n") or 5), tau0, float(cfg.get("span") or 0.5))
    h = float(cfg.get("h") or 1e-3)
    rows = picard_rows(pd, taus, h, richardson=not cfg.get("plain"))
    e1 = np.array([r.e1 for r in rows])
    e3 = np.array([r.e3 for r in rows])
    spread = max(float(np.max(np.abs(e1 - e1[0]))), float(np.max(np.abs(e3 - e3[0]))))
    expo = max(exponent_mismatch(pd, lattice_from_tau(tau)) for tau in taus)
    checks = [check("p6_residual", max(r.residual for r in rows), cfg["tol"]),
              check("e_factor_spread", spread, 1e-8),
              check("exponent_vs_pi_i_C", expo, 1e-10)]
    data = {"C1": pd.C1, "C3": pd.C3, "h": h, "theta": list(PICARD_PARAMS.as_tuple()),
            "rows": [vars(r) for r in rows], "_csv": rows_to_csv(rows)}
    if cfg.get("drift"):
        d, _ = monodromy_drift(pd, taus, order=cfg["order"], tol=cfg["cont_tol"], estimate_error=False)
        checks.append(check("monodromy_drift", d, 1e-4))
    return data, checks


def cmd_density(cfg: dict, rng) -> tuple[dict, list]:
    """kappa-tilde = 0 integrals next to their algebraic form at z = wp(x)."""
    L = _lattice(cfg)
    if cfg.get("x") is not None:
        xs = [(int(cfg.get("i") or 1), complex(v)) for v in parse_list(cfg["x"])]
    else:
        n = int(cfg.get("points") or 10)
        xs = []
        for k in range(n):
            i = 1 + k % 3
            r = 0.3 * abs(L.omega1) * rng.uniform(0.2, 1.0)
            xs.append((i, segment_half_period(i, L) + r * np.exp(2j * np.pi * rng.uniform())))
    rows, worst = [], 0.0
    for i, x in xs:
        a = f_kappa_tilde(i, x, 0.0, L, cfg["order"])
        z = complex(wp(x, L))
        b = algebraic_integral(i, z, L, cfg["order"])
        gap = min(abs(a - b), abs(a + b)) / max(abs(b), 1e-300)
        worst = max(worst, gap)
        rows.append({"i": i, "x": x, "z": z, "sigma_integral": a, "algebraic": b,
                     "sign": 1 if abs(a - b) <= abs(a + b) else -1, "relative_gap": gap})
    return {"lattice": L.to_dict(), "rows": rows}, [check("borcea_shapiro", worst, cfg["tol"])]


COMMANDS = {
    "lattice": cmd_lattice, "build": cmd_build, "midconv": cmd_midconv,
    "monodromy": cmd_monodromy, "integral": cmd_integral, "picard": cmd_picard,
    "density": cmd_density,
}


# --- assembly -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values")
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--order", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--cont-tol", dest="cont_tol", type=float, default=None)

    p = argparse.ArgumentParser(prog="fuchsmono", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, *opts):
        sp = sub.add_parser(name, parents=[common], help=help_)
        for o in opts:
            sp.add_argument("--" + o.replace("_", "-"), dest=o, default=None)
        return sp

    lattice_opts = ("tau", "t")
    system_opts = ("theta", "lam", "mu", "k", "t")
    add("lattice", "lattice data and kernel checks", *lattice_opts, "points")
    add("build", "build the Fuchsian system", *system_opts)
    add("midconv", "middle convolution vs the s2 image", *system_opts, "nu")
    mono = add("monodromy", "numeric / closed-form monodromy", "tau", "t", "kappa_tilde", "alpha",
               "kappa", "heun", "base", "mode")
    mono.add_argument("--printed", action="store_true", default=None)
    add("integral", "one sigma-integral with error and ODE residual", *lattice_opts, "kernel", "i",
        "x", "alpha", "kappa", "k", "kappa_tilde", "shift")
    pic = add("picard", "Picard solution: P6 residual and e-factor preservation", "C1", "C3",
              "tau0", "n", "span", "h")
    pic.add_argument("--drift", action="store_true", default=None)
    pic.add_argument("--plain", action="store_true", default=None,
                     help="plain central differences, no Richardson step")
    add("density", "kappa-tilde = 0 integrals vs the algebraic integral", *lattice_opts, "x", "i",
        "points")
    return p


def resolve_config(ns: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    cfg["tol"] = DEFAULT_TOL[ns.command]
    if ns.config:
        with open(ns.config) as fh:
            cfg.update({k.replace("-", "_"): v for k, v in json.load(fh).items()})
    for k, v in vars(ns).items():
        if v is not None and k != "config":
            cfg[k] = v
    if float(cfg["tol"]) <= 0 or float(cfg["cont_tol"]) <= 0:
        raise DomainError("tolerances must be positive")
    if int(cfg["order"]) < 8:
        raise DomainError("quadrature order must be at least 8")
    cfg["tol"], cfg["cont_tol"], cfg["order"] = float(cfg["tol"]), float(cfg["cont_tol"]), int(cfg["order"])
    cfg["seed"] = int(cfg["seed"])
    return cfg


def _csv_results(checks: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "value_re", "value_im", "error_estimate", "tolerance", "pass"])
    for c in checks:
        v = complex(c["value"])
        w.writerow([c["name"], repr(v.real), repr(v.imag), repr(c["error_estimate"]),
                    repr(c["tolerance"]), c["pass"]])
    return buf.getvalue()


def run(argv: list[str] | None = None) -> tuple[int, str]:
    """Run the CLI and return (exit code, output text)."""
    ns = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(ns)
        rng = np.random.default_rng(cfg["seed"])
        data, checks = COMMANDS[ns.command](cfg, rng)
    except FuchsMonoError as exc:
        doc = {"command": ns.command, "pass": False,
               "error": {"code": getattr(exc, "code", "ERROR"), "type": type(exc).__name__,
                         "message": str(exc)}}
        return EXIT_ERROR, json.dumps(doc, sort_keys=True, indent=2) + "\n"
    except (ValueError, ZeroDivisionError, OSError) as exc:
        doc = {"command": ns.command, "pass": False,
               "error": {"code": "INPUT", "type": type(exc).__name__, "message": str(exc)}}
        return EXIT_ERROR, json.dumps(doc, sort_keys=True, indent=2) + "\n"
    ok = all(c["pass"] for c in checks)
    code = EXIT_OK if ok else EXIT_FAIL
    csv_table = data.pop("_csv", None)
    if cfg["format"] == "csv":
        return code, csv_table if csv_table is not None else _csv_results(checks)
    shown = {k: v for k, v in cfg.items() if v is not None}
    doc = {"command": ns.command, "config": shown, "data": data, "results": checks, "pass": ok}
    return code, json.dumps(jsonable(doc), sort_keys=True, indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    code, text = run(argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
