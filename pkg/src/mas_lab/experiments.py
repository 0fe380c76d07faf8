"""Scenario configs, runs, figure data and the kernel and roundoff checks behind the CLI.

A scenario is one JSON document::

    {
      "name": "fig2",
      "problem": {"kind": "exterior", "rho_cyl": 8, "rho_fil": 10, "rho_aux": 5.5,
                  "N": 81, "scheme": "bounded", "d_ref": 1},
      "solver": {"kind": "dft"},
      "probes": {"phi_deg": 45, "start": 1.0, "stop": 3.0, "num": 41},
      "outputs": "out/fig2",
      "seed": 0
    }

See ``configs/SCHEMA.md`` for every field.
"""

import hashlib
import json
import math
import os
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import elliptic as ell
from . import exterior as ext
from . import interior as intr
from . import kernels
from .common import LogValue
from .exceptions import DomainError

DEFAULT_OUT = "mas_lab_out"
PROBLEM_KINDS = ("exterior", "interior", "elliptic")
SOLVER_KINDS = ("dft", "dense", "lsq")

# parameter sets of the published figures
FIG2 = dict(rho_cyl=8.0, rho_fil=10.0, rho_aux=5.5, N=81, scheme="bounded")
FIG3 = dict(a=6.0, b=3.0, rho_fil=7.5, a_aux=5.2222, N=80, scheme="traditional")
FIG4 = dict(rho_cyl=5.0, rho_fil=4.0, rho_aux=6.5, N=59)
FIGURES = ("fig2a", "fig2b", "fig3a", "fig3b", "fig4")


class ConfigError(ValueError):
    """Invalid or unreadable scenario configuration."""


# ------------------------------------------------------------------ config


@dataclass
class ScenarioConfig:
    name: str
    problem: object
    kind: str
    solver: dict
    probes: dict
    outputs: str = None
    seed: int = 0
    raw: dict = field(default_factory=dict)


_PROBLEM_FIELDS = {
    "exterior": ("rho_cyl", "rho_fil", "rho_aux", "N", "scheme", "d_ref"),
    "interior": ("rho_cyl", "rho_fil", "rho_aux", "N", "d_ref"),
    "elliptic": ("a", "b", "rho_fil", "a_aux", "N", "M", "scheme", "d_ref"),
}
_PROBLEM_TYPES = {
    "exterior": ext.ExteriorCircularProblem,
    "interior": intr.InteriorCircularProblem,
    "elliptic": ell.EllipticProblem,
}


def build_problem(spec):
    """Problem object from its config dict; DomainError carries the violated inequality."""
    if not isinstance(spec, dict):
        raise ConfigError("'problem' must be an object")
    kind = spec.get("kind")
    if kind not in PROBLEM_KINDS:
        raise ConfigError(f"problem.kind must be one of {PROBLEM_KINDS}, got {kind!r}")
    allowed = _PROBLEM_FIELDS[kind]
    unknown = set(spec) - set(allowed) - {"kind"}
    if unknown:
        raise ConfigError(f"unknown problem fields for {kind}: {sorted(unknown)}")
    try:
        return _PROBLEM_TYPES[kind](**{k: spec[k] for k in allowed if k in spec})
    except TypeError as exc:
        raise ConfigError(f"problem: {exc}") from None


def parse_config(raw):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - {"name", "problem", "solver", "probes", "outputs", "seed"}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    problem = build_problem(raw.get("problem"))
    kind = raw["problem"]["kind"]
    solver = dict(raw.get("solver", {"kind": "dft"}))
    if solver.get("kind") not in SOLVER_KINDS:
        raise ConfigError(f"solver.kind must be one of {SOLVER_KINDS}, got {solver.get('kind')!r}")
    if kind == "elliptic" and solver["kind"] == "dft":
        raise ConfigError("the elliptic system is not circulant: use solver 'dense' or 'lsq'")
    if solver["kind"] == "lsq":
        M = solver.get("M")
        if not isinstance(M, int) or M < problem.N:
            raise ConfigError(f"solver lsq needs an integer M >= N, got M={M!r}")
    probes = dict(raw.get("probes", {}))
    if "points" not in probes:
        probes.setdefault("phi_deg", 0.0)
        probes.setdefault("start", 1.0 if kind != "interior" else 0.0)
        probes.setdefault("stop", 3.0 if kind != "interior" else 1.0)
        probes.setdefault("num", 41)
        if int(probes["num"]) < 1:
            raise ConfigError("probes.num must be positive")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return ScenarioConfig(
        name=str(raw.get("name", "scenario")), problem=problem, kind=kind, solver=solver,
        probes=probes, outputs=raw.get("outputs"), seed=seed, raw=raw,
    )


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(raw)


def resolve_out_dir(explicit=None, config_value=None):
    """``--out`` first, then the config's ``outputs``, then ``$MAS_LAB_OUT``, then ``./mas_lab_out``."""
    for cand in (explicit, config_value, os.environ.get("MAS_LAB_OUT"), DEFAULT_OUT):
        if cand:
            return Path(cand)


# ------------------------------------------------------------------ output


def write_csv(path, header, columns):
    """Comma-separated, header row, 17 significant digits, LF line endings."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    lines = [",".join(header)]
    lines += [",".join("%.17g" % v for v in row) for row in data]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return Path(path)


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(paths, root):
    return [
        {"path": str(Path(p).relative_to(root)), "sha256": sha256_file(p), "bytes": Path(p).stat().st_size}
        for p in paths
    ]


def jsonable(obj):
    """Replace non-finite floats by None and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def kappa_entry(value, log10=None):
    lv = LogValue(log10, 1) if log10 is not None else LogValue.from_float(value)
    return {"value": value if math.isfinite(value) else None, **lv.to_dict()}


# ---------------------------------------------------------------- solving


def solve(cfg):
    p, s = cfg.problem, cfg.solver
    if cfg.kind == "elliptic":
        if s["kind"] == "lsq":
            p = p.with_(M=s["M"])
            cfg.problem = p
        return ell.solve_elliptic(p)
    route = {"dft": "dft_exact", "dense": "dense_solve", "lsq": "least_squares"}[s["kind"]]
    fn = ext.currents if cfg.kind == "exterior" else intr.currents_interior
    return fn(p, route, M=s.get("M"))


def probe_arrays(cfg):
    """Observation points and the scale used for the first CSV column."""
    p, pr = cfg.problem, cfg.probes
    scale = p.b if cfg.kind == "elliptic" else p.rho_cyl
    if "points" in pr:
        pts = np.asarray(pr["points"], dtype=float).reshape(-1, 2)
        return pts[:, 0], np.deg2rad(pts[:, 1]), scale
    rho = np.linspace(pr["start"], pr["stop"], int(pr["num"])) * scale
    return rho, np.full(rho.shape, np.deg2rad(pr["phi_deg"])), scale


def potentials(cfg, sol, rho, phi):
    """Scattered MAS and exact potentials plus the incident one at the probes."""
    p = cfg.problem
    if cfg.kind == "exterior":
        return ext.potential_mas_direct(p, sol, rho, phi), ext.potential_exact(p, rho, phi), ext.potential_incident(p, rho, phi)
    if cfg.kind == "interior":
        return (
            intr.potential_mas_interior(p, sol, rho, phi),
            intr.potential_exact_interior(p, rho, phi),
            intr.potential_incident_interior(p, rho, phi),
        )
    return (
        ell.potential_mas_elliptic(p, sol, rho, phi),
        ell.potential_exact_elliptic(p, rho, phi),
        ell.potential_incident_elliptic(p, rho, phi),
    )


def diagnostics_dict(cfg, sol):
    p = cfg.problem
    if cfg.kind == "exterior":
        d = ext.diagnostics(sol, p).to_dict()
        d["kappa"] = {
            "computed": kappa_entry(d["kappa_computed"]),
            "asymptotic": kappa_entry(d["kappa_asymptotic"], d["kappa_asymptotic_log10"]),
        }
        d["mean_term_log10"] = LogValue.from_float(d["mean_term"]).to_dict() if math.isfinite(d["mean_term"]) else None
        return d
    if cfg.kind == "interior":
        d = intr.diagnostics_interior(sol, p).to_dict()
        d["kappa"] = {
            "computed": kappa_entry(d["kappa_computed"]),
            "asymptotic": kappa_entry(d["kappa_asymptotic"], d["kappa_asymptotic_log10"]),
        }
        return d
    d = ell.diagnostics_elliptic(sol, p).to_dict()
    d["regime"] = "oscillating" if d["oscillating"] else "smooth"
    d["t"] = None
    d["kappa"] = {"computed": kappa_entry(d["kappa_computed"]), "asymptotic": None}
    d["alternation_score"] = d["zigzag_fraction"]
    return d


@dataclass
class RunReport:
    name: str
    out_dir: Path
    diagnostics: dict
    files: list
    timings: dict

    def to_dict(self):
        return {
            "name": self.name,
            "diagnostics": self.diagnostics,
            "files": self.files,
            "timings": self.timings,
        }


def run(cfg, out_dir=None):
    """Solve, diagnose, evaluate probes; write currents.csv, potential.csv and report.json."""
    out = resolve_out_dir(out_dir, cfg.outputs)
    out.mkdir(parents=True, exist_ok=True)
    timings = {}
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sol = solve(cfg)
        timings["solve_s"] = time.perf_counter() - t0
        t1 = time.perf_counter()
        diag = diagnostics_dict(cfg, sol)
        timings["diagnostics_s"] = time.perf_counter() - t1
        t2 = time.perf_counter()
        rho, phi, scale = probe_arrays(cfg)
        a_mas, a_exact, a_inc = potentials(cfg, sol, rho, phi)
        timings["probes_s"] = time.perf_counter() - t2
    diag["warnings"] = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    diag["provenance"] = sol.provenance
    diag["solver_residual"] = sol.residual

    files = [
        write_csv(out / "currents.csv", ["ell", "current"], [np.arange(sol.N), sol.currents]),
        write_csv(
            out / "potential.csv",
            ["rho_over_scale", "phi_deg", "A_mas", "A_exact", "A_mas_total", "A_exact_total"],
            [rho / scale, np.rad2deg(phi), a_mas, a_exact, a_mas + a_inc, a_exact + a_inc],
        ),
    ]
    report = RunReport(cfg.name, out, jsonable(diag), manifest(files, out), timings)
    body = {"problem": {"kind": cfg.kind, **cfg.problem.to_dict()}, "solver": cfg.solver, **report.to_dict()}
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(jsonable(body), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def perturb(cfg, noise, seed, out_dir=None):
    """Perturbed-rhs experiment for an exterior scenario; writes perturb.json."""
    if cfg.kind != "exterior":
        raise ConfigError("perturb supports exterior problems only")
    solver = "dense_solve" if cfg.solver["kind"] == "dense" else "circulant"
    rep = ext.perturbation_experiment(cfg.problem, noise, seed=seed, solver=solver)
    out = resolve_out_dir(out_dir, cfg.outputs)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "perturb.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(jsonable(rep.to_dict()), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rep


# ---------------------------------------------------------------- figures


def _closed_loop(values):
    # the published plots repeat l = 0 at l = N
    return np.append(values, values[0])


def figure_data(fig_id):
    """Header and columns for one figure."""
    if fig_id == "fig2a":
        p = ext.ExteriorCircularProblem(**FIG2)
        exact = ext.currents(p).currents
        asym = ext.currents_asymptotic(p)
        return ["ell", "I_exact", "I_asymptotic"], [np.arange(p.N + 1), _closed_loop(exact), _closed_loop(asym)]
    if fig_id == "fig2b":
        p = ext.ExteriorCircularProblem(**FIG2)
        sol = ext.currents(p)
        s = np.linspace(1.0, 3.0, 201)
        phi = np.deg2rad(45.0)
        return ["rho_over_rho_cyl", "A_mas_total", "A_exact_total"], [
            s, ext.potential_mas_total(p, sol, s * p.rho_cyl, phi), ext.potential_exact_total(p, s * p.rho_cyl, phi),
        ]
    if fig_id == "fig3a":
        p = ell.EllipticProblem(**FIG3)
        cur = ell.solve_elliptic(p).currents
        return ["ell", "I"], [np.arange(p.N + 1), _closed_loop(cur)]
    if fig_id == "fig3b":
        p = ell.EllipticProblem(**FIG3)
        sol = ell.solve_elliptic(p)
        s = np.linspace(1.0, 3.0, 201)
        phi = np.deg2rad(90.0)
        return ["rho_over_b", "A_mas_total", "A_exact_total"], [
            s, ell.potential_mas_total_elliptic(p, sol, s * p.b, phi), ell.potential_exact_total_elliptic(p, s * p.b, phi),
        ]
    if fig_id == "fig4":
        s = np.linspace(0.0, 1.0, 101)
        phi = np.deg2rad(60.0)
        cols = [s]
        for n in (59, 60, 61):
            p = intr.InteriorCircularProblem(**{**FIG4, "N": n})
            cols.append(intr.potential_mas_interior(p, intr.currents_interior(p), s * p.rho_cyl, phi))
        return ["rho_over_rho_cyl", "A_N59", "A_N60", "A_N61"], cols
    raise ConfigError(f"unknown figure {fig_id!r}; expected one of {FIGURES}")


def figure(fig_id, out_dir=None):
    header, cols = figure_data(fig_id)
    out = resolve_out_dir(out_dir)
    return write_csv(out / f"{fig_id}.csv", header, cols)


# ---------------------------------------------------------- kernel checks


@dataclass
class KernelCheck:
    name: str
    args: tuple
    closed: float
    reference: float

    @property
    def error(self):
        return abs(self.closed - self.reference)


@dataclass
class KernelReport:
    tol: float
    checks: list

    @property
    def worst(self):
        return max(self.checks, key=lambda c: c.error)

    @property
    def failures(self):
        return [c for c in self.checks if c.error > self.tol]

    @property
    def passed(self):
        return not self.failures


def kernel_checks(nodes=4096):
    """J on its reference grid, the Poisson-kernel cases and the logarithmic Fourier series."""
    checks = []
    for m in kernels.J_GRID_M:
        for x in kernels.J_GRID_X:
            for y in kernels.J_GRID_Y:
                checks.append(KernelCheck(
                    "J", (m, x, y), kernels.eval_J_closed(m, x, y), kernels.eval_J_quadrature(m, x, y, nodes=nodes)
                ))
    for m in range(6):
        for x in (0.0, 0.3, 0.7, 1.5, 3.0):
            checks.append(KernelCheck(
                "poisson", (m, x), kernels.poisson_kernel_integral(m, x), kernels.poisson_kernel_quadrature(m, x, nodes)
            ))
    for r1, r2, th in ((0.0, 2.0, 0.3), (1.0, 2.0, math.pi), (1.0, 2.0, 1.0), (0.5, 3.0, 2.0)):
        checks.append(KernelCheck(
            "log_series", (r1, r2, 1.0, th), kernels.log_kernel_series(r1, r2, 1.0, th, 200),
            kernels.log_kernel_exact(r1, r2, 1.0, th),
        ))
    return checks


def verify_kernels(tol):
    if not tol > 0:
        raise ConfigError("tol must be positive")
    return KernelReport(tol, kernel_checks())


# --------------------------------------------------------------- roundoff


@dataclass
class RoundoffReport:
    N: int
    I0_dft: float
    I0_dense: float
    ratio: float
    dense_method: str
    control_N: int
    control_rel_diff: float
    kappa: float

    @property
    def dft_near_reference(self):
        return abs(self.I0_dft / 4.4e4 - 1.0) <= 0.2

    @property
    def dense_deviates(self):
        return abs(self.I0_dense / self.I0_dft - 1.0) > 0.1

    @property
    def control_agrees(self):
        return self.control_rel_diff <= 1e-3

    def to_dict(self):
        return {
            "N": self.N, "I0_dft": self.I0_dft, "I0_dense": self.I0_dense, "ratio": self.ratio,
            "dense_method": self.dense_method, "control_N": self.control_N,
            "control_rel_diff": self.control_rel_diff, "kappa": self.kappa,
            "dft_near_reference": self.dft_near_reference, "dense_deviates": self.dense_deviates,
            "control_agrees": self.control_agrees,
        }


def roundoff_demo(N=101, control_N=81):
    """Fig. 2 radii solved by the DFT and by a dense factorisation at large and moderate N."""
    p = ext.ExteriorCircularProblem(**{**FIG2, "N": N})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        dft_sol = ext.currents(p, "dft_exact")
        dense_sol = ext.currents(p, "dense_solve")
        pc = p.with_(N=control_N)
        c_dft = ext.currents(pc, "dft_exact").currents
        c_dense = ext.currents(pc, "dense_solve").currents
    return RoundoffReport(
        N=N,
        I0_dft=float(dft_sol.currents[0]),
        I0_dense=float(dense_sol.currents[0]),
        ratio=float(dft_sol.currents[0] / dense_sol.currents[0]),
        dense_method=dense_sol.method,
        control_N=control_N,
        control_rel_diff=float(np.abs(c_dense - c_dft).max() / np.abs(c_dft).max()),
        kappa=ext.condition_number_computed(p),
    )


__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "FIG2",
    "FIG3",
    "FIG4",
    "FIGURES",
    "build_problem",
    "parse_config",
    "load_config",
    "resolve_out_dir",
    "write_csv",
    "sha256_file",
    "RunReport",
    "run",
    "perturb",
    "figure_data",
    "figure",
    "KernelCheck",
    "KernelReport",
    "kernel_checks",
    "verify_kernels",
    "RoundoffReport",
    "roundoff_demo",
]
