"""Command-line runner: ``frachardy <command> [flags]``.

Every command writes ``<command>.json`` (the report) and, with
``--format csv``, its tables to ``--out``.  Timing and environment go to
``<command>.meta.json`` so the report itself is reproducible byte for
byte.  Settings come from built-in defaults, then ``--config FILE``
(key = value lines), then explicit flags.

Exit codes: 0 all checks pass, 1 a check failed, 2 invalid input,
3 the request lies in the nonexistence regime.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .constants import Params, gamma0, gamma_alpha, kappa_s, m_alpha
from .errors import DomainError, FracHardyError, TheoryForbidden
from .report import (Check, Report, backend_errors, extension_errors, groundstate_residual, lower,
                     maximum_principle_trials, poisson_mass_error, positive,
                     upper)

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_FORBIDDEN = 0, 1, 2, 3

COMMANDS = ("constants", "verify", "solve", "nonexistence", "hardy", "remainder", "extend")
VERIFY_CHECKS = ("groundstate", "backends", "dtn", "energy", "maxprinciple")

DEFAULTS: Dict[str, Any] = {
    "N": 3,
    "s": 0.5,
    "alpha": 0.0,
    "p": 2.0,
    "q": 1.5,
    "grid_nodes": None,
    "r_min": None,
    "r_max": None,
    "tol": None,
    "out": "frachardy-out",
    "format": "json",
    # command options
    "alpha_sweep": None,
    "check": "all",
    "method": "auto",
    "gamma": None,
    "family_size": 20,
    "seed": 0,
    "refine": 1,
    "trials": 100,
    "data": "gaussian",
}

_INT_KEYS = {"N", "grid_nodes", "family_size", "seed", "refine", "trials"}
_FLOAT_KEYS = {"s", "alpha", "p", "q", "r_min", "r_max", "tol", "gamma"}


def _convert(key, value):
    if value is None or value == "":
        return None
    try:
        if key in _INT_KEYS:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        if key in _FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{key} must be numeric, got {value!r}") from None
    return str(value)


def read_config(path) -> Dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys map to underscores."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DomainError(f"cannot read config file {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{n}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise DomainError(f"{path}:{n}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


@dataclass
class RunConfig:
    command: str
    params: Params
    options: Dict[str, Any] = field(default_factory=dict)

    @property
    def out(self) -> str:
        return self.options["out"]

    @property
    def formats(self) -> List[str]:
        return [f.strip() for f in str(self.options["format"]).split(",") if f.strip()]

    def get(self, key, default=None):
        v = self.options.get(key)
        return default if v is None else v

    def to_dict(self):
        d = {"command": self.command, "params": self.params.to_dict()}
        d.update({k: v for k, v in sorted(self.options.items()) if k not in self.params.to_dict()})
        return d


def resolve(command, config: Dict[str, Any], flags: Dict[str, Any]) -> RunConfig:
    merged = dict(DEFAULTS)
    merged.update({k: v for k, v in config.items() if v is not None})
    merged.update({k: v for k, v in flags.items() if v is not None})
    for f in str(merged["format"]).split(","):
        if f.strip() not in ("csv", "json"):
            raise DomainError(f"unknown format {f!r}; use csv, json or csv,json")
    if merged["check"] != "all":
        for c in str(merged["check"]).split(","):
            if c not in VERIFY_CHECKS:
                raise DomainError(f"unknown check {c!r}; choose from {', '.join(VERIFY_CHECKS)}")
    params = Params(N=merged["N"], s=merged["s"], alpha=merged["alpha"], p=merged["p"], q=merged["q"])
    for key in ("grid_nodes", "family_size", "refine", "trials"):
        if merged[key] is not None and merged[key] < 1:
            raise DomainError(f"{key} must be positive")
    if merged["r_min"] is not None and merged["r_max"] is not None and not 0 < merged["r_min"] < merged["r_max"]:
        raise DomainError("need 0 < r_min < r_max")
    if merged["tol"] is not None and not merged["tol"] > 0:
        raise DomainError("tol must be positive")
    opts = {k: v for k, v in merged.items() if k not in ("N", "s", "alpha", "p", "q")}
    return RunConfig(command, params, opts)


# -- output -------------------------------------------------------------------------

class Outputs:
    """Collects files and writes them all at the end of a run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.tables: Dict[str, tuple] = {}
        self.extra: Dict[str, Any] = {}

    def path(self, name):
        return os.path.join(self.cfg.out, name)

    def table(self, name, header, rows):
        if "csv" in self.cfg.formats:
            self.tables[name] = (header, rows)
        return self.path(name)

    def file(self, name, writer):
        """``writer(path)`` runs at flush time."""
        self.extra[name] = writer
        return self.path(name)

    def names(self):
        out = list(self.tables) + list(self.extra)
        if "json" in self.cfg.formats:
            out.append(f"{self.cfg.command}.json")
        return sorted(self.path(n) for n in out)

    def flush(self, report: Report, meta: dict):
        os.makedirs(self.cfg.out, exist_ok=True)
        for name, (header, rows) in self.tables.items():
            with open(self.path(name), "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                for row in rows:
                    w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
        for name, writer in self.extra.items():
            writer(self.path(name))
        if "json" in self.cfg.formats:
            with open(self.path(f"{self.cfg.command}.json"), "w") as fh:
                fh.write(report.to_json())
        with open(self.path(f"{self.cfg.command}.meta.json"), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


# -- commands -------------------------------------------------------------------------

def _sweep(spec, alpha_max):
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise DomainError(f"alpha sweep must read lo:hi:count, got {spec!r}") from None
    if not (0 <= lo < hi < alpha_max and n >= 2):
        raise DomainError(f"alpha sweep must satisfy 0 <= lo < hi < {alpha_max} with count >= 2")
    return np.linspace(lo, hi, n)


def cmd_constants(cfg: RunConfig, out: Outputs) -> Report:
    P = cfg.params
    N, s = P.N, P.s
    rep = Report("constants", cfg.to_dict())
    c = P.constants()
    rep.data["constants"] = c.to_dict()
    rep.data["p_crit"] = P.p_crit
    tol = cfg.get("tol", 1e-12)
    sweep = cfg.get("alpha_sweep")
    alphas = _sweep(sweep, P.alpha_max) if sweep else np.linspace(0.0, 0.99 * P.alpha_max, 50)
    rows = []
    for a in alphas:
        ga = gamma_alpha(N, s, a)
        rows.append((float(a), ga, m_alpha(N, s, a), m_alpha(N, s, -a)))
    g = np.array([r[1] for r in rows])
    prod_err = max(abs(r[2] * r[3] / r[1] - 1.0) for r in rows)
    rep.add(upper("gamma_alpha_factorization", prod_err, tol))
    rep.add(Check("gamma_alpha_decreasing", float(np.max(np.diff(g))), "< 0", None, bool(np.all(np.diff(g) < 0))))
    rep.add(upper("gamma_alpha_at_zero", abs(rows[0][1] - c.gamma0) / c.gamma0 if alphas[0] == 0 else 0.0, tol))
    rep.add(upper("poisson_mass", poisson_mass_error(N, s), 1e-8))
    rep.data["sweep"] = {"alpha": [r[0] for r in rows], "gamma_alpha": g.tolist()}
    out.table("constants.csv", ["alpha", "gamma_alpha", "m_alpha", "m_minus_alpha"], rows)
    return rep


def cmd_verify(cfg: RunConfig, out: Outputs) -> Report:
    P = cfg.params
    N, s = P.N, P.s
    which = VERIFY_CHECKS if cfg.get("check") == "all" else cfg.get("check").split(",")
    tol = cfg.get("tol", 1e-3)
    rep = Report("verify", cfg.to_dict())
    rows = []
    if "groundstate" in which:
        for a in sorted({0.0, P.alpha}):
            res = groundstate_residual(N, s, a)
            rep.add(upper(f"groundstate_residual[alpha={a:g}]", res, tol))
            rows.append(("groundstate", a, res))
    if "backends" in which:
        errs = backend_errors(N, s)
        for k in ("fft_vs_singular", "fft_vs_hankel", "singular_vs_hankel"):
            rep.add(upper(f"backends_{k}", errs[k], tol))
        rep.add(upper("backends_origin_closed_form", errs["origin"], 1e-4))
        rows += [("backends:" + k, s, v) for k, v in errs.items()]
    if "dtn" in which or "energy" in which:
        ext = extension_errors(N, s)
        if "dtn" in which:
            rep.add(upper("dtn_trace", ext["dtn"], 1e-2))
        if "energy" in which:
            rep.add(upper("energy_identity", ext["energy"], 2e-2))
        rows += [("extension:" + k, s, v) for k, v in ext.items()]
    if "maxprinciple" in which:
        mp = maximum_principle_trials(N, s, trials=cfg.get("trials"), seed=cfg.get("seed"))
        rep.add(Check("maximum_principle_violations", mp["violations"], 0, None, mp["violations"] == 0))
        rows.append(("maxprinciple", s, mp["worst"]))
    out.table("verify.csv", ["check", "parameter", "value"], rows)
    return rep


def _theory_guard(P: Params):
    if P.p >= P.p_crit:
        raise TheoryForbidden(
            f"p = {P.p:g} >= p_crit(alpha) = {P.p_crit:.6g}: no positive solution exists in a "
            "ball around the origin (nonexistence regime); nothing to solve"
        )


def cmd_solve(cfg: RunConfig, out: Outputs) -> Report:
    from .semilinear import PotentialSpec, explicit_supercritical, monotone_solve, variational_minimize

    P = cfg.params
    method = cfg.get("method")
    if method not in ("auto", "variational", "explicit", "monotone"):
        raise DomainError(f"unknown method {method!r}")
    if method != "monotone":
        # the linear monotone path has no exponent to forbid
        _theory_guard(P)
    if method == "auto":
        method = "variational" if P.p <= P.p_sobolev or P.alpha == 0 else "explicit"
    tol = cfg.get("tol", 1e-3)
    rep = Report("solve", cfg.to_dict())
    rep.data["path"] = method
    if method == "explicit":
        sol = explicit_supercritical(P, r_min=cfg.get("r_min", 1e-3), r_max=cfg.get("r_max", 1e3),
                                     n=cfg.get("grid_nodes", 512))
        rep.data.update(sol.to_dict())
        rep.add(upper("pde_residual", sol.residual, tol))
        prof = sol.profile
    else:
        if method == "variational":
            o = variational_minimize(P)
            rep.add(positive("lambda", o.lam))
            rep.data["lambda"] = o.lam
        else:
            g = cfg.get("gamma", 0.5 * gamma0(P.N, P.s))
            o = monotone_solve(PotentialSpec(g, P.s), 1.0, N=P.N)
            rep.add(Check("monotone_violations", o.monotone_violations, 0, None, o.monotone_violations == 0))
            rep.data["gamma"] = g
        rep.add(upper("pde_residual", o.residual, tol))
        rep.add(lower("min_value", float(np.min(o.profile.values)), 0.0))
        rep.data["iterations"] = o.iterations
        prof = o.profile
    rows = list(zip(prof.nodes.tolist(), prof.values.tolist()))
    out.table("solution.csv", ["r", "u"], rows)
    return rep


def cmd_nonexistence(cfg: RunConfig, out: Outputs) -> Report:
    from .semilinear import nonexistence_diagnostic, nonexistence_operator

    P = cfg.params
    if not P.alpha < P.alpha_max:
        raise DomainError("alpha must be below (N-2s)/2")
    op = nonexistence_operator(P.N, P.s, r_min=cfg.get("r_min", 1e-7))
    d = nonexistence_diagnostic(P, op=op)
    cell = nonexistence_diagnostic(P, op=op, closure="cell",
                                   fit_window=(1e3 * op.r[0], 1e4 * op.r[0]))
    tol = cfg.get("tol", 0.05)
    rep = Report("nonexistence", cfg.to_dict())
    rep.data["ground_state_closure"] = d.to_dict()
    rep.data["cell_closure"] = {"fitted_exponent": cell.fitted_exponent, "relative_error": cell.relative_error}
    rep.add(upper("origin_exponent", d.relative_error, tol))
    rep.add(Check("truncation_monotone", d.truncation_monotone, True, None, d.truncation_monotone))
    if P.alpha == 0:
        rep.add(upper("critical_log_growth_spread", d.critical_slope_spread, 0.1))
        rep.add(positive("critical_log_growth_slope", min(d.critical_slopes)))
    else:
        lv = np.asarray(d.critical_levels)
        spread = float(np.ptp(lv) / np.mean(lv))
        rep.add(upper("critical_potential_level_spread", spread, 0.1))
    sub = d.subcritical_slopes
    ratio = sub[-1] / sub[0]
    rep.add(upper("subcritical_convergence", ratio, 0.2))
    rows = [(str(k), v) for k, v in d.exponents.items()]
    out.table("nonexistence_exponents.csv", ["cutoff", "exponent"], rows)
    lad = [(e, ci, si) for e, ci, si in zip(d.eps, d.critical_integrals, d.subcritical_integrals)]
    out.table("nonexistence_integrals.csv", ["eps", "I_pcrit", "I_pcrit_minus_half"], lad)
    return rep


def cmd_hardy(cfg: RunConfig, out: Outputs) -> Report:
    from .fraclap import ground_state
    from .hardy import TRIAL_NODES, TrialFamily as TF, ap_form_check, hardy_report

    P = cfg.params
    n = cfg.get("grid_nodes", TRIAL_NODES)
    N, s = P.N, P.s
    fam = (TF.capped_ground_states(N, s, n=n) + TF.near_ground_states(N, s, n=n)
           + TF.bumps(N, cfg.get("family_size"), seed=cfg.get("seed"), n=n))
    hr = hardy_report(fam, N, s)
    g0 = hr.gamma0
    tol = cfg.get("tol", 1e-2)
    rep = Report("hardy", cfg.to_dict())
    rep.data["gamma0"] = g0
    rep.data["infimum"] = hr.infimum
    rep.add(lower("quotient_infimum", hr.infimum, g0 - tol))
    rep.add(upper("best_constant_gap", hr.infimum / g0 - 1.0, 0.1))
    th = ground_state(N, s, P.alpha)
    ap = ap_form_check(th, gamma_alpha(N, s, P.alpha), fam, s)
    rep.add(Check("ap_check_gamma_alpha", ap.passed, True, None, ap.passed))
    bad = ap_form_check(th, g0 + 0.2, fam, s)
    rep.add(Check("ap_check_fails_above_gamma0", bad.passed, False, None, not bad.passed))
    rep.data["ap_violators_above_gamma0"] = bad.violators
    rows = [(k, v, v / g0) for k, v in hr.quotients.items()]
    out.table("hardy_quotients.csv", ["trial", "quotient", "quotient_over_gamma0"], rows)
    return rep


def cmd_remainder(cfg: RunConfig, out: Outputs) -> Report:
    from .hardy import TRIAL_NODES, TrialFamily as TF, hardy_report

    P = cfg.params
    n = cfg.get("grid_nodes", TRIAL_NODES)
    P.require_remainder()
    fam = TF.bumps(P.N, cfg.get("family_size"), seed=cfg.get("seed"), n=n)
    hr = hardy_report(fam, P.N, P.s, q=P.q, refine=cfg.get("refine"))
    rep = Report("remainder", cfg.to_dict())
    rep.data["tau"] = hr.tau
    rep.data["ratio_infimum"] = hr.ratio_infimum
    rep.data["excluded"] = hr.excluded
    rep.add(positive("ratio_infimum", hr.ratio_infimum))
    rows = [(k, v) for k, v in hr.ratios.items()]
    out.table("remainder_ratios.csv", ["trial", "ratio"], rows)
    return rep


def cmd_extend(cfg: RunConfig, out: Outputs) -> Report:
    from .extension import HalfSpaceMesh, dtn_trace, extend_on_mesh, weighted_energy
    from .fraclap import RadialProfile, frac_lap_radial, ground_state, seminorm_sq

    P = cfg.params
    N, s = P.N, P.s
    data = cfg.get("data")
    rep = Report("extend", cfg.to_dict())
    rep.add(upper("poisson_mass", poisson_mass_error(N, s), 1e-8))
    mesh = HalfSpaceMesh.default(N, s)
    k = kappa_s(s)
    if data == "gaussian":
        u = RadialProfile.from_function(lambda r: np.exp(-0.5 * r * r), N, r_min=cfg.get("r_min", 1e-3),
                                        r_max=cfg.get("r_max", 12.0), n=cfg.get("grid_nodes", 1024))
        w = extend_on_mesh(u, mesh)
        tr = dtn_trace(w)
        ref = k * frac_lap_radial(u, s)(tr.r)
        sel = tr.r < 4.0
        err = float(np.max(np.abs(tr.values - ref)[sel]) / np.max(np.abs(ref)))
        E = weighted_energy(w)
        rep.add(upper("dtn_trace", err, cfg.get("tol", 1e-2)))
        rep.add(upper("energy_identity", abs(E.value / (k * seminorm_sq(u, s)) - 1.0), 2e-2))
    elif data == "groundstate":
        u = ground_state(N, s, P.alpha)
        w = extend_on_mesh(u, mesh)
        tr = dtn_trace(w)
        sel = (tr.r >= 0.2) & (tr.r <= 5.0)
        ref = k * gamma_alpha(N, s, P.alpha) * tr.r ** (-2 * s) * u(tr.r)
        err = float(np.max(np.abs(tr.values / ref - 1.0)[sel]))
        rep.add(upper("dtn_trace", err, cfg.get("tol", 1e-2)))
    else:
        raise DomainError(f"unknown data {data!r}; use gaussian or groundstate")
    if "csv" in cfg.formats:
        out.file("extension_field.csv", w.to_csv)
    rows = list(zip(tr.r.tolist(), tr.values.tolist()))
    out.table("extension_trace.csv", ["r", "flux"], rows)
    return rep


HANDLERS = {
    "constants": cmd_constants,
    "verify": cmd_verify,
    "solve": cmd_solve,
    "nonexistence": cmd_nonexistence,
    "hardy": cmd_hardy,
    "remainder": cmd_remainder,
    "extend": cmd_extend,
}


# -- entry point ------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("parameters")
    g.add_argument("--N", type=int, help="space dimension")
    g.add_argument("--s", type=float, help="order in (0, 1)")
    g.add_argument("--alpha", type=float, help="ground-state shift in [0, (N-2s)/2]")
    g.add_argument("--p", type=float, help="nonlinearity exponent > 1")
    g.add_argument("--q", type=float, help="remainder integrability in (max(1, 2/(1+2s)), 2)")
    g = common.add_argument_group("run")
    g.add_argument("--grid-nodes", dest="grid_nodes", type=int, help="radial grid nodes")
    g.add_argument("--r-min", dest="r_min", type=float)
    g.add_argument("--r-max", dest="r_max", type=float)
    g.add_argument("--tol", type=float, help="tolerance of the command's main check")
    g.add_argument("--out", help="output directory")
    g.add_argument("--format", help="csv, json or csv,json (default json)")
    g.add_argument("--config", help="key = value file; flags override it")

    p = _Parser(prog="frachardy", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"frachardy {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "constants": "Hardy constants, kappa_s, kernel constants and an alpha sweep",
        "verify": "ground-state, backend, DtN, energy and maximum-principle checks",
        "solve": "positive solution of B_s u - gamma_alpha |x|^{-2s} u = u^p in the unit ball",
        "nonexistence": "truncated-potential solves near the critical exponent",
        "hardy": "Rayleigh quotients and the supersolution form test",
        "remainder": "remainder ratio E_0(u) / ||u||^2 in W^{tau,q}",
        "extend": "weighted extension of radial data and its flux trace",
    }
    cmds = {c: sub.add_parser(c, parents=[common], help=helps[c]) for c in COMMANDS}
    cmds["constants"].add_argument("--alpha-sweep", dest="alpha_sweep", help="lo:hi:count")
    cmds["verify"].add_argument("--check", help="comma list of " + ", ".join(VERIFY_CHECKS) + " or all")
    cmds["verify"].add_argument("--trials", type=int, help="maximum-principle trials")
    cmds["verify"].add_argument("--seed", type=int)
    cmds["solve"].add_argument("--method", help="auto, variational, explicit or monotone")
    cmds["solve"].add_argument("--gamma", type=float, help="potential coefficient for --method monotone")
    for c in ("hardy", "remainder"):
        cmds[c].add_argument("--family-size", dest="family_size", type=int, help="number of bump trials")
        cmds[c].add_argument("--seed", type=int)
    cmds["remainder"].add_argument("--refine", type=int, help="quadrature refinement factor")
    cmds["extend"].add_argument("--data", help="gaussian or groundstate")
    return p


def _meta(cfg: RunConfig, elapsed: float, status: int) -> dict:
    return {
        "command": cfg.command,
        "version": __version__,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "elapsed_seconds": round(elapsed, 3),
        "exit_code": status,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threads": os.environ.get("FRACHARDY_THREADS"),
    }


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors (2), --help and --version (0)
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    ns = vars(args)
    command = ns.pop("command")
    config_path = ns.pop("config", None)
    t0 = time.time()
    try:
        config = read_config(config_path) if config_path else {}
        cfg = resolve(command, config, ns)
    except FracHardyError as exc:
        print(f"frachardy {command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = Outputs(cfg)
    try:
        rep = HANDLERS[command](cfg, out)
    except TheoryForbidden as exc:
        print(f"frachardy {command}: refused: {exc}", file=sys.stderr)
        return EXIT_FORBIDDEN
    except DomainError as exc:
        print(f"frachardy {command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FracHardyError as exc:
        print(f"frachardy {command}: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK
    status = EXIT_OK if rep.passed else EXIT_CHECK
    rep.artifacts = out.names()
    out.flush(rep, _meta(cfg, time.time() - t0, status))
    width = max((len(c.name) for c in rep.checks), default=0)
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.value}")
    return status


def main(argv: Optional[List[str]] = None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
