"""Command-line front end: ``abpstab <command> --config run.ini --out DIR``.

Every command expands its parameter grid into independent tasks, runs them
(optionally in worker processes), writes one CSV table plus
``manifest.json`` into the output directory and exits with 0 only when
every task finished without error.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from . import acceptance
from .dispersion import (d_closed, d_quadrature, inviscid_root_value, inviscid_roots, model_b_eigenfunction,
                         model_b_root_value, model_b_roots, unstable_root_exists)
from .evolution import evolve_model_b, evolve_reduced, fit_rate, semigroup_series
from .fourier import FourierField, smooth_random_field
from .io import ConfigError, RunConfig, read_config, write_csv, write_json
from .kernels import green_kernel, model_b_margin, stability_margin_scan, volterra_kernel
from .model import ValidationError, HomogeneousState, ReducedParams, classify_state, law_from_config, make_velocity_law, zeta_of
from .spectral import (OperatorConfig, diffusive_eigenfunction, diffusive_root, leading_eigenvalue,
                       model_b_diffusive_root, resolvent_solve)
from .volterra import SampledKernel, paley_wiener_check, solve_density_volterra, solve_model_b_volterra

logger = logging.getLogger("abpstab")

COMMANDS = ("dispersion-roots", "stability-diagram", "growth-rate", "damping", "kernels", "volterra-check",
            "verify")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# task bodies (module level so worker processes can import them)


def _rng(seed, index):
    return np.random.default_rng([seed, index])


def task_roots(zeta, nu, model, N):
    rows = []
    if nu == 0.0:
        rep = inviscid_roots(zeta) if model == "A" else model_b_roots(zeta)
        for r, res, cnt in zip(rep.roots, rep.residuals, rep.counts or [None] * len(rep.roots)):
            rows.append([model, zeta, nu, float(np.real(r)), 0.0, res, cnt])
    elif zeta > 1.0 / (2.0 * math.pi):
        cfg = OperatorConfig(nu, N)
        rep = diffusive_root(zeta, cfg) if model == "A" else model_b_diffusive_root(zeta, cfg)
        lam = complex(rep.roots[0])
        rows.append([model, zeta, nu, lam.real, lam.imag, rep.residuals[0], rep.counts[0]])
    if not rows:
        rows.append([model, zeta, nu, "", "", "", 0])
    return rows, {"n_roots": sum(1 for r in rows if r[3] != "")}


def _law(section):
    return law_from_config(section) if section else make_velocity_law("affine")


def task_diagram(phi, nu, law_section, model, N):
    state = HomogeneousState(phi, _law(law_section))
    cls = classify_state(state)
    zeta = zeta_of(state)
    if nu == 0.0:
        # the point spectrum is explicit; otherwise the spectrum is the segment [-i, i]
        unstable = unstable_root_exists(zeta, model)
        if unstable:
            lead = complex(inviscid_root_value(zeta) if model == "A" else model_b_root_value(zeta))
        else:
            lead = 0j
    else:
        lead = leading_eigenvalue(zeta, OperatorConfig(nu, N), model)
        unstable = lead.real > 0
    return [[model, phi, nu, zeta, cls.label.name.lower(), cls.flux_derivative, unstable, lead.real, lead.imag]], {}


def task_growth(zeta, nu, model, N, T, dt, seed, index):
    """Evolve a seeded mode and fit its growth; T is capped at 20 e-folds."""
    cfg = OperatorConfig(nu, N)
    params = ReducedParams(zeta, nu)
    if model == "A":
        lam = complex(diffusive_root(zeta, cfg).roots[0])
        T = min(T, 20.0 / lam.real)
        f = diffusive_eigenfunction(zeta, lam, cfg)
        series = evolve_reduced(params, f, T, dt)
        window = None
    else:
        lam = complex(model_b_diffusive_root(zeta, cfg).roots[0])
        T = min(T, 20.0 / lam.real)
        if nu == 0.0:
            f = model_b_eigenfunction(zeta, lam, N)
            window = None
        else:
            f = smooth_random_field(N, _rng(seed, index))
            window = (0.5 * T, T)
        series = evolve_model_b(params, f, T, dt)
    rate = fit_rate(series, "exponential", window=window).rate
    return [[model, zeta, nu, lam.real, lam.imag, rate, abs(rate - lam.real)]], {}


def task_damping(zeta, nu, model, N, T, dt, seed, index):
    f = smooth_random_field(16, _rng(seed, index))
    params = ReducedParams(zeta, nu)
    run = evolve_reduced if model == "A" else evolve_model_b
    s = run(params, f, T, dt, N=N, sample_every=max(1, int(round(0.05 / dt))))
    rows = []
    if nu == 0.0:
        window = (min(20.0, 0.1 * T), T)
        free = semigroup_series(0.0, f, T, dt, N=N, sample_every=max(1, int(round(0.05 / dt))))
        rows.append([model, zeta, nu, "free_transport_exponent", fit_rate(free, "algebraic", window=window).rate])
        rows.append([model, zeta, nu, "density_exponent", fit_rate(s, "algebraic", window=window).rate])
        bound = float(np.max(np.sqrt(1 + s.times) * np.abs(s.rho)) / f.h1_norm())
        rows.append([model, zeta, nu, "sup_sqrt1pt_rho_over_H1", bound])
    else:
        fit = fit_rate(s, "exponential", window=(0.1 * T, 0.75 * T), quantity="rho", envelope=2 * math.pi)
        rows.append([model, zeta, nu, "density_decay_rate", -fit.rate])
        rows.append([model, zeta, nu, "norm_decay_rate", -fit_rate(s, "exponential", window=(0.1 * T, T)).rate])
    return rows, {}


def task_green(zeta, T, h, out):
    t = np.arange(0.0, T + h / 2, h)
    g = green_kernel(zeta, t)
    write_csv(Path(out) / "green_kernel.csv", ["t", "G"], zip(t, g))
    sel = t >= 1.0
    sup = float(np.max((1 + t[sel]) ** 1.5 * np.abs(g[sel]))) if np.any(sel) else float("nan")
    return [["green", zeta, 0.0, "G(0)", g[0]], ["green", zeta, 0.0, "sup_(1+t)^1.5|G|", sup]], {}


def task_kernel_margin(zeta, nu, model, N, T, h, im_max, res, delta_over_nu, out):
    cfg = OperatorConfig(nu, N)
    t = np.arange(0.0, T + h / 2, h)
    K = volterra_kernel(cfg, t, dt=min(h, 0.01))
    tag = f"nu{nu:g}"
    write_csv(Path(out) / f"kernel_{tag}.csv", ["t", "re", "im"], zip(t, K.values.real, K.values.imag))
    rows = [["kernel", zeta, nu, "K(0)", abs(K.values[0])]]
    if nu > 0:
        scan = stability_margin_scan if model == "A" else model_b_margin
        rep = scan(zeta, cfg, delta_over_nu * nu, im_max, res)
        rep.to_json(Path(out) / f"margin_{tag}.json")
        write_csv(Path(out) / f"margin_{tag}.csv", ["re", "im", "value"], rep.heatmap_rows())
        rows += [["margin", zeta, nu, f"min_{k}", v.value] for k, v in sorted(rep.minima.items())]
        rows.append(["margin", zeta, nu, "strip_min_over_nu", rep.strip_min / nu])
    return rows, {}


def task_volterra(zeta, nu, N, T, dt, seed, index):
    f = smooth_random_field(16, _rng(seed, index))
    cfg = OperatorConfig(nu, N)
    grid = np.arange(0.0, T + dt / 2, dt)
    params = ReducedParams(zeta, nu)
    rho = solve_density_volterra(zeta, cfg, f, grid, dt)
    dev_a = float(np.max(np.abs(rho - evolve_reduced(params, f, T, dt, N=N).rho)))
    U = solve_model_b_volterra(zeta, cfg, f, grid, dt)
    evb = evolve_model_b(params, f, T, dt, N=N)
    dev_b = float(max(np.max(np.abs(U[:, 0] - evb.rho)), np.max(np.abs(U[:, 1] - evb.p))))
    pw = None
    if nu > 0:
        Tk = 40.0 / math.sqrt(nu)
        tk = np.arange(0.0, Tk + 1e-9, 0.02)
        K = volterra_kernel(cfg, tk, dt=0.01)
        re = np.linspace(0.0, 0.6, 31)
        im = np.linspace(-3.0, 3.0, 121)
        pw = paley_wiener_check(SampledKernel(tk, -zeta * K.values), re[None, :] + 1j * im[:, None], tail_tol=1e-6)
    return [[zeta, nu, dev_a, dev_b, "" if pw is None else pw.passed, "" if pw is None else pw.min_abs,
             "" if pw is None else pw.winding]], {}


def task_check(key):
    r = acceptance.run_check(key)
    status = "ok" if r.passed else "failed"
    return [[r.key, r.name, r.passed, key in acceptance.KNOWN_FAILURES, r.detail]], {"check_status": status}


def task_branch(N):
    lams = np.array([0.3 + 0.2j, 1.0 + 2.0j, 0.05 - 0.7j, 2.5 - 0.1j])
    dev = max(abs(complex(d_closed(0.2, z)) - complex(d_quadrature(0.2, z, 4096))) for z in lams)
    passed = dev < 1e-10
    g = FourierField.from_function(lambda th: np.exp(np.cos(th)), N)
    resolvent_solve(0.5 + 0.5j, OperatorConfig(0.01, N), g)
    return [["branch", "closed form vs quadrature off the cut", passed, False, f"max deviation {dev:.2e}"]], \
        {"check_status": "ok" if passed else "failed"}


# --------------------------------------------------------------------------
# orchestration


def _run_task(fn):
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            rows, meta = fn()
            status = meta.pop("check_status", "ok")
            err = None
        except Exception as exc:  # recorded per task; the run continues
            rows, meta, status, err = [], {}, "error", f"{type(exc).__name__}: {exc}"
    msgs = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    return {"rows": rows, "meta": meta, "status": status, "error": err, "warnings": msgs,
            "seconds": round(time.perf_counter() - t0, 3)}


def _execute(tasks, jobs):
    fns = [fn for _, fn in tasks]
    if jobs <= 1 or len(fns) <= 1:
        return [_run_task(fn) for fn in fns]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, fns))


def _grid(cfg: RunConfig, name, default=None):
    vals = cfg.grid(name, default)
    if not vals:
        raise UsageError(f"grid {name!r} is empty")
    return vals


def _zetas(cfg: RunConfig, default):
    if "zeta" in cfg.grids:
        return _grid(cfg, "zeta")
    if "phi" in cfg.grids:
        return [zeta_of(HomogeneousState(p, cfg.law)) for p in _grid(cfg, "phi")]
    return list(default)


def build_tasks(command, cfg: RunConfig, seed, out):
    N = int(cfg.num("N_modes"))
    dt = float(cfg.num("dt_time"))
    T = float(cfg.num("T_time"))
    m = cfg.model
    tasks = []
    if command == "dispersion-roots":
        header = ["model", "zeta", "nu", "re_lambda", "im_lambda", "residual", "certificate_count"]
        for z in _zetas(cfg, [1 / math.pi]):
            for nu in _grid(cfg, "nu", [0.0]):
                tasks.append(((z, nu), partial(task_roots, z, nu, m, N)))
    elif command == "stability-diagram":
        header = ["model", "phi", "nu", "zeta", "class", "flux_derivative", "unstable_mode", "leading_re",
                  "leading_im"]
        for phi in _grid(cfg, "phi", np.round(np.linspace(0.05, 0.95, 19), 10)):
            for nu in _grid(cfg, "nu", [0.0]):
                tasks.append(((phi, nu), partial(task_diagram, phi, nu, cfg.raw.get("law"), m, N)))
    elif command == "growth-rate":
        header = ["model", "zeta", "nu", "re_lambda", "im_lambda", "fitted_rate", "abs_error"]
        for z in _zetas(cfg, [1 / math.pi]):
            for nu in _grid(cfg, "nu", [0.0, 0.01]):
                tasks.append(((z, nu), partial(task_growth, z, nu, m, N, T, dt, seed, len(tasks))))
    elif command == "damping":
        header = ["model", "zeta", "nu", "quantity", "value"]
        for z in _zetas(cfg, [1 / (4 * math.pi)]):
            for nu in _grid(cfg, "nu", [0.0, 0.01, 0.03, 0.1]):
                tasks.append(((z, nu), partial(task_damping, z, nu, m, N, T, dt, seed, len(tasks))))
    elif command == "kernels":
        header = ["object", "zeta", "nu", "quantity", "value"]
        res = (int(cfg.num("re_points")), int(cfg.num("im_points")))
        zetas = _zetas(cfg, [1 / (4 * math.pi)])
        for z in zetas:
            tasks.append(((z, "green"), partial(task_green, z, T, dt, out)))
            for nu in _grid(cfg, "nu", [0.02, 0.05, 0.1]):
                tasks.append(((z, nu), partial(task_kernel_margin, z, nu, m, N, T, dt, float(cfg.num("im_max")),
                                               res, float(cfg.num("delta_over_nu")), out)))
        if len(zetas) > 1:
            raise UsageError("kernels writes one file set per zeta; give a single zeta")
    elif command == "volterra-check":
        header = ["zeta", "nu", "max_dev_model_a", "max_dev_model_b", "paley_wiener_pass", "paley_wiener_min",
                  "winding"]
        for z in _zetas(cfg, [1 / (4 * math.pi)]):
            for nu in _grid(cfg, "nu", [0.0, 0.05]):
                tasks.append(((z, nu), partial(task_volterra, z, nu, N, T, dt, seed, len(tasks))))
    elif command == "verify":
        header = ["key", "name", "passed", "known_failure", "detail"]
        keys = cfg.raw.get("verify", {}).get("checks")
        keys = [k.strip() for k in keys.split(",")] if keys else list(acceptance.CHECKS)
        unknown = [k for k in keys if k not in acceptance.CHECKS]
        if unknown:
            raise UsageError(f"unknown checks {unknown}")
        tasks.append((("branch",), partial(task_branch, N)))
        tasks += [((k,), partial(task_check, k)) for k in keys]
    else:
        raise UsageError(f"unknown command {command!r}")
    return header, tasks


def default_jobs() -> int:
    env = os.environ.get("ABPSTAB_JOBS")
    if env:
        return max(1, int(env))
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run(command, cfg: RunConfig, out, jobs=1, seed=0):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    header, tasks = build_tasks(command, cfg, seed, out)
    t0 = time.perf_counter()
    results = _execute(tasks, jobs)
    rows = [row for r in results for row in r["rows"]]
    n_rows = write_csv(out / f"{command.replace('-', '_')}.csv", header, rows)
    entries = []
    for (key, _), r in zip(tasks, results):
        entries.append({"task": list(key), "status": r["status"], "error": r["error"], "warnings": r["warnings"],
                        "seconds": r["seconds"], **r["meta"]})
    ok = all(r["status"] == "ok" for r in results)
    manifest = {
        "command": command, "seed": seed, "jobs": jobs, "config": cfg.echo(), "model": cfg.model,
        "numerics": {k: cfg.num(k) for k in sorted(set(cfg.numerics) | {"N_modes", "dt_time", "T_time"})},
        "tasks": entries, "n_tasks": len(tasks), "n_rows": n_rows, "success": ok,
        "wall_seconds": round(time.perf_counter() - t0, 3),
    }
    write_json(out / "manifest.json", manifest)
    return ok, manifest, rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="abpstab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="INI-style run configuration")
    parser.add_argument("--out", help="output directory (default: ./out/<command>)")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes (default: ABPSTAB_JOBS or CPUs)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = read_config(args.config, experiment=args.command) if args.config else RunConfig(args.command)
        if cfg.law is None:
            cfg.law = make_velocity_law("affine")
        out = args.out or cfg.out or os.path.join("out", args.command)
        jobs = args.jobs if args.jobs is not None else default_jobs()
        if jobs < 1:
            raise UsageError("--jobs must be positive")
        ok, manifest, rows = run(args.command, cfg, out, jobs, args.seed)
    except (ConfigError, UsageError, ValidationError) as exc:
        parser.print_usage(sys.stderr)
        print(f"abpstab: error: {exc}", file=sys.stderr)
        return 2
    for t in manifest["tasks"]:
        line = f"{t['status']:>6}  {t['task']}"
        if t["error"]:
            line += f"  {t['error']}"
        print(line)
        for w in t["warnings"]:
            print(f"        warning: {w}", file=sys.stderr)
    if args.command == "verify":
        for key, name, passed, known, detail in rows:
            print(f"[{'PASS' if passed else 'FAIL'}] {key:>3} {name}{' (known)' if known else ''}: {detail}")
    print(f"{'success' if ok else 'failure'}: {manifest['n_tasks']} tasks, output in {out}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
