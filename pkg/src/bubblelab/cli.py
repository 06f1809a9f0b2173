"""Command-line front end.

``bubblelab <command> [--config PATH] [--out DIR] [--verbose]``

Commands: ``identities``, ``profile``, ``solve``, ``family``, ``trend`` and
``pohozaev``.  Each writes CSV tables (and optional SVG plots) to the output
directory together with the canonical ``config.ini``.  The exit status is 0
exactly when every declared tolerance passed; otherwise it is 1 and
``failures.jsonl`` lists the failed checks.  Configuration errors exit with 2.
"""
from __future__ import annotations

import argparse
import dataclasses
import glob
import json
import logging
import os
import re
import sys
from types import SimpleNamespace

import numpy as np

from .config import COMMANDS, ConfigError, ExperimentConfig, load_config, serialize
from .reports import Plot, Table, write_report

__all__ = ["main", "run_command", "Check"]

log = logging.getLogger("bubblelab")


@dataclasses.dataclass
class Check:
    """One declared tolerance: ``passed`` iff ``value <= tolerance``."""

    name: str
    value: float
    tolerance: float
    message: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)

    def record(self, command: str) -> dict:
        return {"command": command, "check": self.name, "value": _json_float(self.value),
                "tolerance": self.tolerance, "message": self.message}


def _json_float(v):
    v = float(v)
    return v if np.isfinite(v) else str(v)


# -- commands -------------------------------------------------------------------------


def _identities(cfg: ExperimentConfig):
    from .profiles import BubbleParams, integral_identity, roots_log_identity

    rows, checks = [], []
    ps = sorted({0.0, cfg.p})
    for N in cfg.N:
        scale = 8 * np.pi * (N + 1)
        for mu in cfg.heights((4.0, 8.0)):
            for p in ps:
                params = BubbleParams(N, mu, 1.0, p)
                for kind in ("d_mu", "d_P", "d_Pbar"):
                    val, err = integral_identity(params, kind)
                    tol = 1e-7 * scale
                    c = Check(f"identity {kind} N={N} mu={mu:g} p={p:g}", abs(val), tol)
                    checks.append(c)
                    rows.append((N, mu, p, kind, abs(val), err, tol, c.passed))
        if N >= 1:
            dev = abs(roots_log_identity(N) - np.log(N + 1))
            c = Check(f"roots_log N={N}", dev, 1e-12)
            checks.append(c)
            rows.append((N, float("nan"), float("nan"), "roots_log", dev, 0.0, 1e-12, c.passed))
    cols = ("N", "mu", "p", "kind", "value", "error", "tolerance", "passed")
    return [Table("identities", cols, rows)], checks


def _profile(cfg: ExperimentConfig):
    from .profiles import BubbleParams, bubble_mass, global_profile, profile_density

    N = cfg.single_N
    mu = cfg.heights()[0]
    params = BubbleParams(N, mu, 1.0, cfg.p)
    x = np.linspace(-cfg.extent, cfg.extent, cfg.samples)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    Z = (X1 + 1j * X2).ravel()
    V = global_profile(params, Z)
    D = profile_density(params, Z)
    rows = list(zip(Z.real, Z.imag, V, D))
    mass, err = bubble_mass(params, return_error=True)
    target = 8 * np.pi * (N + 1)
    c = Check(f"mass N={N} mu={mu:g}", abs(mass - target) / target, 1e-8)
    out = [Table("profile", ("x1", "x2", "V", "density"), rows),
           Table("profile", ("N", "mu", "p", "mass", "quadrature_error", "relative_deviation",
                             "tolerance", "passed"),
                 [(N, mu, cfg.p, mass, err, c.value, c.tolerance, c.passed)], tag="summary")]
    if cfg.svg:
        r = np.linspace(0.0, cfg.extent, 400)
        series = [("theta=0", r, global_profile(params, r.astype(complex)))]
        if N > 0:
            series.append((f"theta=pi/{N + 1}", r,
                           global_profile(params, r * np.exp(1j * np.pi / (N + 1)))))
        out.append(Plot("profile", series, xlabel="|y|", ylabel="V", title=f"N={N}, mu={mu:g}"))
    return out, [c]


def _smooth_perturbation(grid, amplitude: float, seed: int, modes: int = 3) -> np.ndarray:
    """Random combination of ``(r/R)^m (1 - (r/R)^2) e^{i m theta}``, zero on the boundary."""
    rng = np.random.default_rng(seed)
    s = grid.r[:, None] / grid.R
    out = np.zeros(grid.shape)
    for m in range(modes + 1):
        a, b = rng.standard_normal(2)
        out += (s**m) * (1 - s**2) * (a * np.cos(m * grid.theta) + b * np.sin(m * grid.theta))[None, :]
    out[-1] = 0.0
    return amplitude * out


def _mass(field, H, N) -> float:
    g = field.grid
    return float(np.sum(g.area_weights * np.abs(g.z) ** (2 * N) * H(g.z) * np.exp(field.values)))


def _solve(cfg: ExperimentConfig, out_dir: str):
    from .diagnostics import find_maxima
    from .grid import PolarGrid
    from .profiles import BubbleParams, global_profile, local_maxima
    from .solver import CoefficientField, check_resolution, newton_solve, save_checkpoint

    N = cfg.single_N
    mu = cfg.heights()[0]
    H = CoefficientField(cfg.h)
    q0 = local_maxima(BubbleParams(N, mu, 1.0, cfg.p))[0]
    params = BubbleParams(N, mu, float(H(q0)), cfg.p)
    grid = PolarGrid.for_bubbles(cfg.R, cfg.n_r, cfg.n_t, ring=abs(q0),
                                 core=cfg.core_factor * params.core_width)
    check_resolution(grid, params)
    H.bounds(grid.R)
    V = global_profile(params, grid.z)
    u0 = V + _smooth_perturbation(grid, cfg.perturbation, cfg.seed)
    u, rep = newton_solve(grid, H, N, V[-1], u0, tol=cfg.newton_tol, max_iter=cfg.max_iter)
    diag = find_maxima(u, N)
    mass = _mass(u, H, N)
    target = 8 * np.pi * (N + 1)
    checks = [Check("newton residual", rep.final_residual, cfg.newton_tol),
              Check("mass within 5%", abs(mass - target) / target, 0.05)]
    hist = [(i, r, (rep.damping[i - 1] if i else 1.0), (rep.krylov_iterations[i - 1] if i else 0))
            for i, r in enumerate(rep.residuals)]
    err = float(np.max(np.abs(u.values - V)))
    save_checkpoint(os.path.join(out_dir, "solve.npz"), u, H, N, mu=mu, p=cfg.p)
    tables = [
        Table("solve", ("iteration", "residual", "damping", "krylov_iterations"), hist, tag="history"),
        Table("solve", diag.COLUMNS, list(diag.rows()), tag="maxima"),
        Table("solve", ("N", "mu", "h", "iterations", "residual", "tol", "max_abs_u_minus_V", "mass"),
              [(N, mu, cfg.h, rep.iterations, rep.final_residual, cfg.newton_tol, err, mass)],
              tag="summary"),
    ]
    if cfg.svg:
        tables.append(Plot("solve", [("residual", np.arange(len(rep.residuals)),
                                      np.log10(rep.residuals))],
                           tag="history", xlabel="iteration", ylabel="log10 max|F|"))
    return tables, checks


def _family(cfg: ExperimentConfig, out_dir: str):
    from .solver import (CoefficientField, FamilyError, FamilyPolicy, continuation_family,
                         save_checkpoint)

    N = cfg.single_N
    H = CoefficientField(cfg.h)
    policy = FamilyPolicy(tau=cfg.tau, mu=cfg.mu, n_r=cfg.n_r, n_t=cfg.n_t, tol=cfg.tol,
                          core_factor=cfg.core_factor, max_iter=cfg.max_iter,
                          balance=cfg.balance, ramp=cfg.ramp)
    checks = []
    try:
        members = list(continuation_family(H, N, cfg.delta, policy))
    except FamilyError as exc:
        members = list(exc.members)
        checks.append(Check("family completed", float("inf"), 0.0, str(exc)))
    target = 8 * np.pi * (N + 1)
    tables, summary = [], []
    for k, m in enumerate(members):
        d = m.diagnostics
        mass = _mass(m.v, m.rescaled_coefficient, N)
        checks.append(Check(f"member {k} mass within 5%", abs(mass - target) / target, 0.05))
        summary.append((k, m.delta, m.mu, m.report.iterations, m.report.final_residual, m.tol,
                        m.lift[0], m.lift[1], mass, d.harnack_deficit, d.boundary_oscillation, len(d.maxima), d.simple))
        tables.append(Table("family", d.COLUMNS, list(d.rows()), tag=f"member-{k}"))
        save_checkpoint(os.path.join(out_dir, f"family-member-{k}.npz"), m.u, H, N,
                        delta=m.delta, mu=m.mu, h0=m.params.h0, lift=list(m.lift))
    cols = ("member", "delta", "mu", "iterations", "residual", "tol", "lift_x1", "lift_x2", "mass", "harnack_deficit",
            "boundary_oscillation", "n_maxima", "simple")
    tables.append(Table("family", cols, summary, tag="summary"))
    return tables, checks


def _load_family(directory: str):
    from .solver import CoefficientField, load_checkpoint

    paths = glob.glob(os.path.join(directory, "family-member-*.npz"))
    paths.sort(key=lambda p: int(re.search(r"member-(\d+)\.npz$", p).group(1)))
    members = []
    for p in paths:
        u, header = load_checkpoint(p)
        H = CoefficientField(**header["coefficient"])
        members.append(SimpleNamespace(u=u, coefficient=H, delta=float(header["delta"]),
                                       mu=float(header["mu"])))
    return members


def _trend(cfg: ExperimentConfig, out_dir: str):
    from .diagnostics import vanishing_trend

    members = _load_family(cfg.family_dir or out_dir)
    rep = vanishing_trend(members)
    checks = [Check("trend dominated by fitted bound", 0.0 if rep.dominated else 1.0, 0.0)]
    if all(m.coefficient.is_constant for m in members):
        checks.append(Check("constant coefficient: measured gradient", float(np.max(rep.measured)),
                            1e-8))
    tables = [Table("trend", rep.COLUMNS, list(rep.rows()))]
    if cfg.svg:
        tables.append(Plot("trend", [("measured", rep.delta, rep.measured),
                                     ("model", rep.delta, rep.model)],
                           xlabel="delta", ylabel="|grad(log H + phi)(0)|"))
    return tables, checks


def _pohozaev(cfg: ExperimentConfig):
    from .diagnostics import PohozaevReport, pohozaev_report
    from .profiles import BubbleParams, local_maxima
    from .solver import CoefficientField

    N = cfg.single_N
    mu = cfg.heights()[0]
    H = CoefficientField(cfg.h)
    q = local_maxima(BubbleParams(N, mu, 1.0, cfg.p))
    params = BubbleParams(N, mu, float(H(q[0])), cfg.p)
    center = q[cfg.center_index]
    rows, checks = [], []
    for radius in cfg.radius:
        for k in range(cfg.directions):
            a = 2 * np.pi * k / cfg.directions
            rep = pohozaev_report(params, H, N, center, radius, (np.cos(a), np.sin(a)))
            rows.extend(rep.rows())
            if H.is_constant:
                checks.append(Check(f"pohozaev residual r={radius:g} k={k}",
                                    abs(rep.residual) / rep.scale, 1e-6))
    return [Table("pohozaev", PohozaevReport.COLUMNS, rows)], checks


def run_command(cfg: ExperimentConfig, out_dir: str) -> int:
    """Run ``cfg.command`` writing artifacts to ``out_dir``; returns the exit status."""
    os.makedirs(out_dir, exist_ok=True)
    fail_path = os.path.join(out_dir, "failures.jsonl")
    if os.path.exists(fail_path):
        os.remove(fail_path)
    with open(os.path.join(out_dir, "config.ini"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(cfg))
    failures = []
    try:
        if cfg.command == "identities":
            reports, checks = _identities(cfg)
        elif cfg.command == "profile":
            reports, checks = _profile(cfg)
        elif cfg.command == "solve":
            reports, checks = _solve(cfg, out_dir)
        elif cfg.command == "family":
            reports, checks = _family(cfg, out_dir)
        elif cfg.command == "trend":
            reports, checks = _trend(cfg, out_dir)
        else:
            reports, checks = _pohozaev(cfg)
    except ConfigError:
        raise
    except Exception as exc:  # every failure is recorded, none is swallowed silently
        log.error("%s failed: %s", cfg.command, exc)
        failures.append({"command": cfg.command, "check": type(exc).__name__,
                         "value": None, "tolerance": None, "message": str(exc)})
        reports, checks = [], []
    write_report(reports, out_dir)
    for c in checks:
        log.info("%s: %s (%.3e <= %.3e)", c.name, "pass" if c.passed else "FAIL", c.value, c.tolerance)
        if not c.passed:
            failures.append(c.record(cfg.command))
    if failures:
        with open(fail_path, "w", encoding="utf-8", newline="\n") as fh:
            for rec in failures:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bubblelab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="configuration file (key = value)")
    parser.add_argument("--out", default="bubblelab-out", help="output directory")
    parser.add_argument("--verbose", action="store_true", help="log progress")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        cfg = dataclasses.replace(cfg, command=args.command)
        if args.command in ("profile", "solve", "family", "pohozaev"):
            cfg.single_N
    except (ConfigError, OSError) as exc:
        print(f"bubblelab: {exc}", file=sys.stderr)
        return 2
    return run_command(cfg, args.out)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
