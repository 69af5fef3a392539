"""Acceptance checks, each returning a ``CheckResult``.

Criteria run at their stated tolerances.  ``1``, ``4`` and ``6`` are
evaluated exactly as stated (root expression (2 pi zeta - 1)/(2 sqrt(pi zeta)),
reference value 0.5, exponent band [-0.65, -0.40]) and are known to fail;
``1b``, ``4b`` and ``6b`` repeat them against the root obtained by solving
D = 0 in closed form and the decay law of the coupled density.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import bessel
from .contour import argument_principle_count
from .dispersion import (NearCutWarning, _excluded_ray, d_closed, d_quadrature, inviscid_root_value,
                         model_a_eigenfunction, rational_integral_oracle, rational_integral_quadrature,
                         unstable_root_exists)
from .evolution import evolve_model_b, evolve_reduced, fit_rate, free_transport_density, semigroup_series
from .fourier import FourierField, smooth_random_field
from .kernels import (density_via_convolution, forcing_moments, green_kernel_nodes, stability_margin_scan,
                      volterra_kernel)
from .model import ReducedParams, affine_state, zeta_of
from .spectral import OperatorConfig, diffusive_eigenfunction, diffusive_root, semigroup_norm_decay
from .volterra import (PreconditionError, SampledKernel, VolterraSystem, paley_wiener_check,
                       resolvent_kernel, solve_density_volterra, solve_model_b_volterra,
                       weighted_decay_transfer)

ZETA_UNSTABLE = 1.0 / math.pi
ZETA_STABLE = 1.0 / (4.0 * math.pi)


@dataclass
class CheckResult:
    key: str
    name: str
    passed: bool
    detail: str
    values: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.key:>3} {self.name}: {self.detail}"


def _stated_root(zeta):
    return (2.0 * math.pi * zeta - 1.0) / (2.0 * math.sqrt(math.pi * zeta))


def _zeta_sweep(n=20):
    return np.linspace(1.0 / (2.0 * math.pi), 2.0, n + 1)[1:]


def _root_check(key, name, root_fn):
    worst_c = worst_q = 0.0
    for z in _zeta_sweep():
        x = root_fn(z)
        worst_c = max(worst_c, abs(complex(d_closed(z, x))))
        worst_q = max(worst_q, abs(complex(d_quadrature(z, x, 512))))
    ok = worst_c < 1e-10 and worst_q < 1e-10
    return CheckResult(key, name, ok, f"max|D| closed {worst_c:.2e}, quadrature {worst_q:.2e} (tol 1e-10)",
                       {"closed": worst_c, "quadrature": worst_q})


def check_root_formula_stated():
    return _root_check("1", "inviscid root, stated expression", _stated_root)


def check_root_formula():
    return _root_check("1b", "inviscid root, (2 pi zeta - 1)/sqrt(4 pi zeta - 1)", inviscid_root_value)


def _bisect_threshold(model, lo=0.3, hi=0.7, width=1e-7):
    def unstable(phi):
        return unstable_root_exists(zeta_of(affine_state(phi)), model)

    if unstable(lo) or not unstable(hi):
        raise RuntimeError("bracket does not contain the flip")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if unstable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def check_threshold():
    a = _bisect_threshold("A")
    b = _bisect_threshold("B")
    ok = abs(a - 0.5) <= 1e-6 and abs(b - 0.5) <= 1e-6
    return CheckResult("2", "sharp threshold phi = 1/2", ok, f"flip A {a:.9f}, B {b:.9f} (tol 1e-6)",
                       {"A": a, "B": b})


def _covering_circles():
    """Circles covering {0.05 <= Re <= 5, |Im| <= 5} without touching Re <= 0."""
    out = []
    for re0, re1, a in ((0.05, 0.55, 0.1), (0.55, 5.05, 0.5)):
        xs = np.arange(re0 + a / 2, re1, a)
        ys = np.arange(-5.0 + a / 2, 5.0, a)
        r = 0.5 * a * math.sqrt(2.0) * 1.01
        out += [(complex(x, y), r) for x in xs for y in ys]
    return out


def check_stable_emptiness():
    totals = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearCutWarning)
        for zeta in (1.0 / (4 * math.pi), 1.0 / (8 * math.pi)):
            totals[zeta] = sum(argument_principle_count(lambda z: d_closed(zeta, z), c, r, 128).count
                               for c, r in _covering_circles())
    ok = all(v == 0 for v in totals.values())
    return CheckResult("3", "no zeros for stable zeta", ok,
                       f"counts {list(totals.values())} over {len(_covering_circles())} circles each",
                       {"counts": list(totals.values())})


NU_CONTINUATION = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)


def _continuation(reference, key, name):
    zeta = ZETA_UNSTABLE
    lams, counts = [], []
    for nu in NU_CONTINUATION:
        rep = diffusive_root(zeta, OperatorConfig(nu, 256))
        lams.append(rep.roots[0])
        counts.append(rep.counts[0])
    dev = np.abs(np.array(lams) - reference)
    slope = float(np.polyfit(np.log(NU_CONTINUATION), np.log(dev), 1)[0])
    ok = 0.9 <= slope <= 1.1 and all(l.real > 0 for l in lams) and all(c == 1 for c in counts)
    return CheckResult(key, name, ok, f"slope {slope:.4f} (want [0.9, 1.1]), counts {counts}",
                       {"slope": slope, "lambdas": lams, "counts": counts})


def check_continuation_stated():
    return _continuation(0.5, "4", "diffusive continuation, reference 0.5")


def check_continuation():
    return _continuation(inviscid_root_value(ZETA_UNSTABLE), "4b", "diffusive continuation, reference 1/sqrt(3)")


def check_growth_rate():
    zeta = ZETA_UNSTABLE
    errs = {}
    for nu in (0.0, 0.01):
        cfg = OperatorConfig(nu, 128)
        lam = diffusive_root(zeta, cfg).roots[0]
        f = model_a_eigenfunction(zeta, lam, 128) if nu == 0 else diffusive_eigenfunction(zeta, lam, cfg)
        series = evolve_reduced(ReducedParams(zeta, nu), f, 10.0, dt=0.01)
        fit = fit_rate(series, "exponential")
        errs[nu] = abs(fit.rate - lam.real)
    ok = max(errs.values()) < 1e-2
    return CheckResult("5", "growth rate of eigenmode evolution", ok,
                       ", ".join(f"nu={k}: |err| {v:.2e}" for k, v in errs.items()) + " (tol 1e-2)", errs)


@lru_cache(maxsize=None)
def _landau_run(seed, dt, zeta=ZETA_STABLE, N=256, T=200.0):
    f = smooth_random_field(16, np.random.default_rng(seed))
    if zeta == 0.0:
        s = semigroup_series(0.0, f, T, dt=dt, N=N, sample_every=int(round(0.05 / dt)))
    else:
        s = evolve_reduced(ReducedParams(zeta, 0.0), f, T, dt=dt, N=N, sample_every=int(round(0.05 / dt)))
    return f, s


def _landau_stats(zeta=ZETA_STABLE):
    exps, consts, stable = [], [], []
    for seed in range(3):
        bounds = []
        for dt in (0.005, 0.01):
            f, s = _landau_run(seed, dt, zeta)
            bounds.append(float(np.max(np.sqrt(1 + s.times) * np.abs(s.rho)) / f.h1_norm()))
            if dt == 0.005:
                exps.append(fit_rate(s, "algebraic", window=(20.0, 200.0)).rate)
        consts.append(bounds[0])
        stable.append(abs(bounds[0] - bounds[1]) / bounds[0])
    return exps, consts, max(stable)


def check_landau():
    exps, consts, change = _landau_stats()
    ok = all(-0.65 <= e <= -0.40 for e in exps) and change < 0.05
    return CheckResult("6", "Landau damping exponent in [-0.65, -0.40]", ok,
                       f"exponents {[round(e, 3) for e in exps]}, sup sqrt(1+t)|rho|/H1 {[round(c, 3) for c in consts]}"
                       f", dt-refinement change {change:.1e}", {"exponents": exps, "constants": consts})


def check_landau_coupled():
    """The stated band holds for free transport; the coupling cancels the t^(-1/2) part.

    S-hat and D both blow up like (lambda -+ i)^(-1/2) at the cut ends, so
    rho-hat = S-hat / D stays bounded there and rho decays like t^(-3/2).
    """
    free, _, _ = _landau_stats(0.0)
    exps, consts, change = _landau_stats()
    ok = (all(-0.65 <= e <= -0.40 for e in free) and all(-1.65 <= e <= -1.35 for e in exps)
          and change < 0.05)
    return CheckResult("6b", "Landau damping, free vs coupled exponents", ok,
                       f"zeta = 0: {[round(e, 3) for e in free]} (want [-0.65, -0.40]); coupled: "
                       f"{[round(e, 3) for e in exps]} (want [-1.65, -1.35]); sup sqrt(1+t)|rho|/H1 "
                       f"{[round(c, 3) for c in consts]}, dt-refinement change {change:.1e}",
                       {"free": free, "coupled": exps})


def check_green():
    zeta = ZETA_STABLE
    t = np.arange(1.0, 500.0 + 1e-9, 0.05)
    n = 8 + 4 * 500
    weighted = [np.max((1 + t) ** 1.5 * np.abs(green_kernel_nodes(zeta, t, m))) for m in (n, 2 * n)]
    change = abs(weighted[0] - weighted[1]) / weighted[1]
    f = smooth_random_field(16, np.random.default_rng(7))
    grid = np.arange(0.0, 50.0 + 1e-9, 0.01)
    conv = density_via_convolution(zeta, f, grid)
    ev = evolve_reduced(ReducedParams(zeta, 0.0), f, 50.0, dt=0.01, N=128)
    dev = float(np.max(np.abs(conv.rho - ev.rho)))
    tol = 1e-4 * f.h1_norm()
    ok = np.isfinite(weighted[1]) and change < 1e-6 and dev < tol
    return CheckResult("7", "Green kernel decay and convolution identity", ok,
                       f"sup (1+t)^1.5|G| = {weighted[1]:.4f} (doubling change {change:.1e}); "
                       f"|rho_conv - rho_evolve| {dev:.2e} < {tol:.2e}",
                       {"sup": weighted[1], "change": change, "deviation": dev})


def check_bessel():
    t = np.linspace(0.0, 50.0, 2001)
    const = FourierField.from_modes({0: 1.0 / (2 * math.pi)}, 4)
    e1 = float(np.max(np.abs(free_transport_density(const, t) - bessel.j0(t))))
    k0 = volterra_kernel(OperatorConfig(0.0, 64), t).values
    e2 = float(np.max(np.abs(k0 - 2 * math.pi * bessel.j1(t))))
    ok = e1 < 1e-8 and e2 < 1e-8
    return CheckResult("8", "Bessel oracles", ok, f"|S - J0| {e1:.1e}, |K0 - 2 pi J1| {e2:.1e} (tol 1e-8)",
                       {"S": e1, "K0": e2})


NU_DISSIPATION = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1)


def check_enhanced_dissipation():
    rates, slope = semigroup_norm_decay(NU_DISSIPATION, N=128)
    ok = 0.4 <= slope <= 0.6
    return CheckResult("9", "enhanced dissipation scaling", ok,
                       f"slope {slope:.3f} (want [0.4, 0.6]); rates {[f'{r.rate:.3g}' for r in rates]}",
                       {"slope": slope, "rates": [r.rate for r in rates]})


NU_MARGIN = (0.02, 0.05, 0.1)


def check_margin(resolution=(400, 400)):
    zeta = ZETA_STABLE
    strip, high, change = {}, {}, {}
    for nu in NU_MARGIN:
        cfg = OperatorConfig(nu, 128)
        coarse = stability_margin_scan(zeta, cfg, 0.25 * nu, 6.0, resolution)
        fine = stability_margin_scan(zeta, cfg, 0.25 * nu, 6.0, (2 * resolution[0], 2 * resolution[1]))
        strip[nu] = fine.strip_min
        high[nu] = fine.minima["strip_high"].value
        change[nu] = abs(coarse.strip_min - fine.strip_min) / fine.strip_min
    kappa = min(strip[nu] / nu for nu in NU_MARGIN)
    ok = kappa > 0 and max(change.values()) < 0.1 and min(high.values()) >= 0.45
    return CheckResult("10", "stability margin floor", ok,
                       f"kappa {kappa:.3f}, strip minima {[round(v, 4) for v in strip.values()]}, "
                       f"|Im| >= 1+sqrt2 minima {[round(v, 4) for v in high.values()]}, "
                       f"refinement change {max(change.values()):.1e}",
                       {"kappa": kappa, "strip": strip, "high": high})


def check_volterra():
    h = 1e-3
    t = np.arange(0.0, 5.0 + h / 2, h)
    R = resolvent_kernel(SampledKernel(t, np.exp(-t)))
    e_res = float(np.max(np.abs(R.values - np.exp(-2 * t))))
    f = smooth_random_field(16, np.random.default_rng(3))
    dt = 0.005
    grid = np.arange(0.0, 50.0 + dt / 2, dt)
    cfg = OperatorConfig(0.05, 64)
    rho = solve_density_volterra(ZETA_STABLE, cfg, f, grid, dt)
    ev = evolve_reduced(ReducedParams(ZETA_STABLE, 0.05), f, 50.0, dt=dt, N=64)
    e_a = float(np.max(np.abs(rho - ev.rho)))
    U = solve_model_b_volterra(ZETA_STABLE, cfg, f, grid, dt)
    evb = evolve_model_b(ReducedParams(ZETA_STABLE, 0.05), f, 50.0, dt=dt, N=64)
    e_b = float(max(np.max(np.abs(U[:, 0] - evb.rho)), np.max(np.abs(U[:, 1] - evb.p))))
    pw = {}
    for zeta, nu, T in ((ZETA_STABLE, 0.05, 300.0), (ZETA_UNSTABLE, 0.01, 600.0)):
        tk = np.arange(0.0, T + 1e-9, 0.02)
        K = volterra_kernel(OperatorConfig(nu, 64), tk, dt=0.01)
        re = np.linspace(0.0, 0.6, 31)
        im = np.linspace(-3.0, 3.0, 121)
        rep = paley_wiener_check(SampledKernel(tk, -zeta * K.values), re[None, :] + 1j * im[:, None])
        pw[(round(zeta, 4), nu)] = rep
    p_ok = pw[(round(ZETA_STABLE, 4), 0.05)].passed and not pw[(round(ZETA_UNSTABLE, 4), 0.01)].passed
    ok = e_res < 1e-6 and e_a < 1e-4 and e_b < 1e-4 and p_ok
    pw_txt = ", ".join(f"zeta={k[0]} nu={k[1]}: {'pass' if r.passed else 'fail'} (min {r.min_abs:.3g}, winding {r.winding})"
                       for k, r in pw.items())
    return CheckResult("11", "Volterra machinery", ok,
                       f"resolvent err {e_res:.1e}; model A {e_a:.1e}; model B {e_b:.1e}; {pw_txt}",
                       {"resolvent": e_res, "A": e_a, "B": e_b})


def check_rational_integral(n=50, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    while count < n:
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if _excluded_ray(z, 0.05):
            continue
        worst = max(worst, abs(rational_integral_oracle(z) - rational_integral_quadrature(z)))
        count += 1
    return CheckResult("12", "rational integral oracle", worst < 1e-8, f"max deviation {worst:.1e} over {n} points (tol 1e-8)",
                       {"max": worst})


def check_weighted_boundedness():
    """e^{gamma t}|rho(t)| bounded for gamma = 0.25 * (fitted |rho| decay rate)."""
    nu, zeta = 0.05, ZETA_STABLE
    f = smooth_random_field(16, np.random.default_rng(11))
    dt = 0.01
    grid = np.arange(0.0, 200.0 + dt / 2, dt)
    cfg = OperatorConfig(nu, 64)
    ev = evolve_reduced(ReducedParams(zeta, nu), f, 200.0, dt=dt, N=64)
    fit = fit_rate(ev, "exponential", window=(20.0, 150.0), quantity="rho", envelope=2 * math.pi)
    c_fit = -fit.rate / nu
    gamma = 0.25 * c_fit * nu
    K = volterra_kernel(cfg, grid, dt)
    V = forcing_moments(cfg, f, grid, dt)[:, 0]
    system = VolterraSystem(SampledKernel(grid, -zeta * K.values), V)
    try:
        uw, dev = weighted_decay_transfer(system, gamma)
    except PreconditionError as exc:
        return CheckResult("13", "weighted boundedness", False, str(exc))
    w = np.abs(uw)
    half = grid.size // 2
    ratio = float(np.max(w[half:]) / np.max(w[:half]))
    ok = c_fit > 0 and dev < 1e-7 and ratio <= 1.0
    return CheckResult("13", "weighted boundedness of rho", ok,
                       f"c_fit {c_fit:.3f}, gamma {gamma:.4f}; late/early sup of e^(gamma t)|rho| {ratio:.3f}; "
                       f"weighted-solve identity {dev:.1e}", {"c_fit": c_fit, "ratio": ratio, "identity": dev})


CHECKS = {
    "1": check_root_formula_stated,
    "1b": check_root_formula,
    "2": check_threshold,
    "3": check_stable_emptiness,
    "4": check_continuation_stated,
    "4b": check_continuation,
    "5": check_growth_rate,
    "6": check_landau,
    "6b": check_landau_coupled,
    "7": check_green,
    "8": check_bessel,
    "9": check_enhanced_dissipation,
    "10": check_margin,
    "11": check_volterra,
    "12": check_rational_integral,
    "13": check_weighted_boundedness,
}

# stated forms that cannot hold: the expression is not a zero of D, the
# continued roots approach 1/sqrt(3), not 0.5, and the coupled density
# decays like t^(-3/2), faster than the stated band
KNOWN_FAILURES = frozenset({"1", "4", "6"})


def run_check(key: str) -> CheckResult:
    t0 = time.perf_counter()
    try:
        res = CHECKS[key]()
    except Exception as exc:  # a crash is a failure with a reason
        res = CheckResult(key, CHECKS[key].__name__, False, f"{type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def run_all(keys=None, echo=print):
    out = []
    for k in keys or CHECKS:
        r = run_check(k)
        if echo:
            echo(r.line())
        out.append(r)
    return out
