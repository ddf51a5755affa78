"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary.  ``python3 tests/test_acceptance.py`` runs the same checks
without pytest.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from qgswlab import littlewood_paley as lp
from qgswlab.config import load_config
from qgswlab.harness import (
    GaussianBlobs,
    endpoint_patch_study,
    fit_rate,
    initial_field,
    project_mean_zero,
    run_sweep,
    strictly_decreasing,
    two_blob,
)
from qgswlab.kernels import (
    bessel_k0,
    bessel_k1,
    k0_derivative_lower_bound_holds,
    k0_derivative_positivity_holds,
)
from qgswlab.patches import PatchSpec
from qgswlab.report import csv_text
from qgswlab.spectral import (
    Grid,
    ScalarField,
    error_symbol_magnitude,
    error_velocity,
    velocity_from_vorticity,
)
from qgswlab.transport import SolverConfig, simulate

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
RESULTS: dict[int, str] = {}


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    print(line)
    return ok


# ---- 1: kernel closed forms ----------------------------------------------------

def test_criterion_1_kernel_closed_forms():
    t0 = time.perf_counter()
    worst = 0.0
    for lam in (0.25, 1.0, 4.0):
        f = lambda r: 2 * math.pi * r * error_symbol_magnitude(r, lam)
        a = math.sqrt(lam)
        l1 = integrate.quad(f, 0, a, epsabs=0, epsrel=1e-12)[0] + integrate.quad(f, a, np.inf, epsabs=0, epsrel=1e-12)[0]
        g = integrate.quad(lambda r: 2 * math.pi * r / (lam + r * r) ** 2, 0, np.inf, epsrel=1e-12)[0]
        worst = max(worst, abs(l1 / (math.pi**2 * a) - 1), abs(lam * math.sqrt(g) / math.sqrt(math.pi * lam) - 1))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-3 and dt < 1.0
    assert record(1, ok, f"max rel err {worst:.2e}, {dt:.2f} s")


# ---- 2: single-mode operator exactness -----------------------------------------

def test_criterion_2_single_modes():
    t0 = time.perf_counter()
    g = Grid(64)
    x, y = g.mesh
    worst = 0.0
    cases = [
        (np.sin(x), 0.0, 0 * x, np.cos(x)),
        (np.sin(x), 1.0, 0 * x, 0.5 * np.cos(x)),
        (np.cos(y), 3.0, 0.25 * np.sin(y), 0 * x),
    ]
    for w, lam, u1, u2 in cases:
        u = velocity_from_vorticity(ScalarField(g, w), lam)
        scale = max(np.abs(u1).max(), np.abs(u2).max())
        worst = max(worst, np.abs(u.u1.values - u1).max() / scale, np.abs(u.u2.values - u2).max() / scale)
    e = error_velocity(ScalarField(g, np.sin(x)), 1.0)
    worst = max(worst, np.abs(e.u1.values).max(), np.abs(e.u2.values - 0.5 * np.cos(x)).max() / 0.5)
    rng = np.random.default_rng(0)
    for lam in (1e-3, 0.1, 10.0):
        w = ScalarField(g, rng.standard_normal((64, 64))).minus_mean()
        d = velocity_from_vorticity(w, 0.0) - velocity_from_vorticity(w, lam)
        e = error_velocity(w, lam)
        ref = velocity_from_vorticity(w, 0.0)
        for a, b, r in ((e.u1, d.u1, ref.u1), (e.u2, d.u2, ref.u2)):
            worst = max(worst, np.abs(a.spectral - b.spectral).max() / np.abs(r.spectral).max())
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 1.0
    assert record(2, ok, f"max rel err {worst:.2e}, {dt:.2f} s")


# ---- 3: conservation -----------------------------------------------------------

@pytest.mark.slow
def test_criterion_3_conservation():
    g = Grid(256)
    w, _ = project_mean_zero(initial_field(two_blob(g.length, 0.5, 5.0), g))
    parts, ok = [], True
    for lam in (0.0, 0.1):
        tr = simulate(w, lam, 1.0, SolverConfig(filter=False), [0.0, 1.0])
        d0, d1 = tr.diagnostics[0], tr.diagnostics[-1]
        mean = abs(d1.mean - d0.mean)
        l2 = abs(d1.l2 / d0.l2 - 1)
        ham = abs(d1.hamiltonian / d0.hamiltonian - 1)
        ok &= mean <= 1e-12 and l2 <= 1e-3 and ham <= 1e-3
        parts.append(f"lam={lam}: mean {mean:.1e} L2 {l2:.1e} H {ham:.1e}")
    assert record(3, ok, "; ".join(parts))


# ---- 4, 5, 9: convergence sweep ------------------------------------------------

@pytest.fixture(scope="module")
def sweep():
    cfg = load_config(CONFIGS / "sweep.toml").sweep_config()
    return cfg, run_sweep(cfg, threads=1)


@pytest.mark.slow
def test_criterion_4_convergence_sweep(sweep):
    cfg, rep = sweep
    dec = {k: strictly_decreasing([c.sup(k) for c in rep.cases]) for k in ("l2", "xnorm", "u_l2")}
    slope = fit_rate([(c.lam, c.sup("xnorm")) for c in rep.cases]).exponent
    C = rep.checks["c_fit"]
    envelope = 0.5 * math.exp(-C * cfg.T)
    ok = all(dec.values()) and 0.25 <= slope <= 0.55 and envelope <= 0.5 and rep.checks["scaling_consistent"]
    assert record(
        4, ok,
        f"decreasing {dec}, xnorm slope {slope:.3f}, C_fit {C:.3f}, "
        f"envelope {envelope:.3f}, scaling consistent {rep.checks['scaling_consistent']}",
    )


@pytest.mark.slow
def test_criterion_5_high_frequency_evanescence(sweep):
    cfg, rep = sweep
    assert cfg.theta_rule.alpha == 0.5
    h = [c.sup("hipass_l2") for c in rep.cases]
    ratio = h[-1] / h[0]
    ok = strictly_decreasing(h) and ratio <= 1 / 3
    assert record(5, ok, f"sup_t ||1_(|D|>=Theta) omega||_2 = {[f'{v:.3e}' for v in h]}, last/first {ratio:.3f}")


@pytest.mark.slow
def test_criterion_9_determinism(sweep):
    cfg, rep = sweep
    again = run_sweep(cfg, threads=4)
    ok = csv_text(again) == csv_text(rep)
    assert record(9, ok, "threads=1 and threads=4 CSV byte-identical" if ok else "CSV differs across thread counts")


# ---- 6: endpoint sharpness -----------------------------------------------------

@pytest.mark.slow
def test_criterion_6_endpoint_sharpness():
    rc = load_config(CONFIGS / "patch.toml")
    ps = rc.patch_study
    ellipse = rc.initial_data()
    assert ellipse.shape == "ellipse" and ellipse.a / ellipse.b == 2.0
    assert rc.grid.n == 512 and rc.solver.filter and ps["lambda"] == 0.5 and ps["T"] == 1.0
    disc = PatchSpec("disc", ellipse.center, radius=ellipse.b, mollify_width=ellipse.mollify_width)
    e = endpoint_patch_study(ellipse, ps["lambda"], ps["T"], rc.solver, rc.grid, ps["samples"], 0.9)
    d = endpoint_patch_study(disc, ps["lambda"], ps["T"], rc.solver, rc.grid, ps["samples"], 0.9)
    ok = e.window_length >= 0.2 and d.sup_difference.max() <= 0.05
    assert record(
        6, ok,
        f"ellipse window {e.window} (length {e.window_length:.3f}), disc max supDifference {d.sup_difference.max():.4f}",
    )


# ---- 7: Bessel functions and monotonicity --------------------------------------

def _k_integral(nu, x):
    upper = math.acosh(800.0 / x + 1.0)
    f = lambda t: math.exp(-x * math.cosh(t)) * math.cosh(nu * t)
    mid = min(upper / 2, math.acosh(1.0 / x + 1.0))
    return (integrate.quad(f, 0, mid, epsabs=0, epsrel=1e-13, limit=200)[0]
            + integrate.quad(f, mid, upper, epsabs=0, epsrel=1e-13, limit=200)[0])


def test_criterion_7_bessel():
    t0 = time.perf_counter()
    r = np.logspace(-3, math.log10(20), 500)
    ineq = k0_derivative_lower_bound_holds(r) and k0_derivative_positivity_holds(r)
    worst = 0.0
    for x in (1e-3, 0.01, 0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 3.0, 5.0, 10.0, 20.0):
        worst = max(worst, abs(bessel_k0(x) / _k_integral(0, x) - 1), abs(bessel_k1(x) / _k_integral(1, x) - 1))
    dt = time.perf_counter() - t0
    ok = ineq and worst <= 1e-10 and dt < 5.0
    assert record(7, ok, f"inequalities {ineq}, max rel err vs integral {worst:.1e}, {dt:.2f} s")


# ---- 8: harmonic-analysis suite ------------------------------------------------

def _band_limited(grid, rng, kcut):
    c = np.fft.fft2(rng.standard_normal((grid.n, grid.n)))
    c = np.where(grid.kabs <= kcut, c, 0.0)
    c[0, 0] = 0.0
    return ScalarField.from_spectral(grid, c)


def test_criterion_8_harmonic_analysis():
    t0 = time.perf_counter()
    fam = lp.DEFAULT_FAMILY
    rng = np.random.default_rng(8)

    part = 0.0
    for n in (8, 64, 256):
        g = Grid(n)
        total = fam.low_symbol(g, 0) + sum(fam.band_symbol(g, j) for j in range(fam.max_band(g) + 1))
        part = max(part, np.abs(total - 1).max())

    g = Grid(256)
    f = ScalarField(g, rng.standard_normal((256, 256)))
    rec = sum((lp.band_project(f, j) for j in fam.bands(g)), g.zeros())
    recon = np.abs(rec.values - f.values).max() / np.abs(f.values).max()

    g64 = Grid(64)
    log_ok, display_fail = True, 0
    for _ in range(100):
        h = _band_limited(g64, rng, int(rng.integers(1, 32)))
        for N in range(1, 13):
            log_ok &= lp.log_interpolation_check(h, -1.0, 2, 1.0, N)
            display_fail += not lp.log_interpolation_check(h, -1.0, 2, 1.0, N, form="display")

    # smooth data rasterized independently at each resolution
    comm = []
    for sigma in (0.3, 0.5):
        w_data = two_blob(2 * math.pi, sigma, 1.0)
        h_data = GaussianBlobs(((2.0, 3.0, sigma, 1.0), (4.0, 2.5, 0.7 * sigma, -0.5)))
        sups = []
        for n in (128, 256):
            gn = Grid(n)
            v = velocity_from_vorticity(initial_field(w_data, gn).minus_mean(), 0.0)
            sups.append(max(lp.commutator_profile(v, initial_field(h_data, gn).minus_mean()).values()))
        comm.append(abs(sups[0] - sups[1]) / sups[1])

    dt = time.perf_counter() - t0
    ok = part <= 1e-12 and recon <= 1e-12 and log_ok and max(comm) <= 0.1 and dt < 60
    assert record(
        8, ok,
        f"partition {part:.1e}, reconstruction {recon:.1e}, log-interpolation {log_ok} "
        f"(short-form RHS fails {display_fail}/1200), commutator drift {max(comm):.1e}, {dt:.1f} s",
    )


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v", "-s"]))
