"""lambda-sweeps comparing QGSW against Euler from shared initial data.

A sweep runs one Euler reference, then one QGSW case per lambda, and records
time series of the difference ``f = omega_lam - Omega``::

    l1, l2, l4, linf   Lebesgue norms of f
    u_l2, u_linf       norms of u_lam - v
    xnorm              X^{-1}_{2,inf} norm of f
    hipass_l2          ||1_{|D| >= Theta} omega_lam||_2
    annulus_l2         ||1_{Theta/12 <= |D| <= 8 Theta/3} omega_lam||_2

Rates are fitted by least squares in log-log coordinates against the sweep
maximum over time of each series.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import brentq

from .littlewood_paley import annulus_project, sharp_highpass, x_norm
from .patches import PatchSpec, overlap_measures, rasterize
from .spectral import Grid, ScalarField, velocity_from_vorticity
from .transport import SolverConfig, Trajectory, simulate

log = logging.getLogger(__name__)

NORMS = ("l1", "l2", "l4", "linf", "u_l2", "u_linf", "xnorm", "hipass_l2", "annulus_l2")


# ---------------------------------------------------------------- initial data


@dataclass(frozen=True)
class GaussianBlobs:
    """Sum of periodised Gaussians; each blob is ``(x1, x2, sigma, amplitude)``."""

    blobs: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        blobs = tuple(tuple(float(v) for v in b) for b in self.blobs)
        if not blobs or any(len(b) != 4 for b in blobs):
            raise ValueError("blobs must be a non-empty list of (x1, x2, sigma, amplitude)")
        if any(b[2] <= 0 for b in blobs):
            raise ValueError("blob widths must be positive")
        object.__setattr__(self, "blobs", blobs)

    def rasterize(self, grid: Grid) -> ScalarField:
        x1, x2 = grid.mesh
        L = grid.length
        out = np.zeros((grid.n, grid.n))
        for c1, c2, sigma, amp in self.blobs:
            d1 = (x1 - c1 + L / 2) % L - L / 2
            d2 = (x2 - c2 + L / 2) % L - L / 2
            out += amp * np.exp(-(d1 * d1 + d2 * d2) / (2 * sigma * sigma))
        return ScalarField(grid, out)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "blobs", "blobs": [list(b) for b in self.blobs]}


def two_blob(length: float, sigma: float, amplitude: float) -> GaussianBlobs:
    """Opposite-signed Gaussian pair about the box centre, offset by ``1.2 sigma``."""
    c = length / 2
    return GaussianBlobs(
        (
            (c - 1.2 * sigma, c, sigma, amplitude),
            (c + 1.2 * sigma, c + 0.8 * sigma, sigma, -amplitude),
        )
    )


def initial_field(data, grid: Grid) -> ScalarField:
    if isinstance(data, PatchSpec):
        return rasterize(data, grid)
    return data.rasterize(grid)


def project_mean_zero(f: ScalarField) -> tuple[ScalarField, float]:
    """Subtract the mean; returns the field and the removed mean."""
    m = f.mean()
    return f.minus_mean(), m


# ---------------------------------------------------------------- bounds and fits


def predicted_bound(gap0: float, lam: float, T: float, C: float) -> float:
    """``(gap0^2 + C lam T)^{exp(-C T)/2}``."""
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    if gap0 < 0 or lam < 0 or T < 0:
        raise ValueError("gap0, lambda and T must be nonnegative")
    base = gap0 * gap0 + C * lam * T
    if base == 0:
        return 0.0
    return float(base ** (0.5 * math.exp(-C * T)))


def theta_rule(lam: float, T: float, C: float, alpha: float = 0.5) -> float:
    """Truncation frequency ``predicted_bound(0, lam, T, C)^{-alpha}``."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return predicted_bound(0.0, lam, T, C) ** (-alpha)


def fit_constant(err: float, gap0: float, lam: float, T: float) -> float:
    """Smallest ``C`` with ``predicted_bound(gap0, lam, T, C) >= err``.

    The search is restricted to ``gap0^2 + C lam T <= 1``, where the bound is
    increasing in ``C``; returns ``nan`` when no such ``C`` exists and ``0``
    when ``gap0`` alone already covers ``err``.
    """
    if err <= gap0:
        return 0.0
    cmax = (1.0 - gap0 * gap0) / (lam * T)
    if err > 1.0 or cmax <= 0:
        return math.nan

    def g(C):
        return 0.5 * math.exp(-C * T) * math.log(gap0 * gap0 + C * lam * T) - math.log(err)

    lo = 1e-300
    if g(cmax) < 0:
        return math.nan
    C = brentq(g, lo, cmax, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    # brentq may land a hair below the root; step up until the inequality holds
    while predicted_bound(gap0, lam, T, C) < err:
        C = np.nextafter(C, math.inf)
    return float(C)


@dataclass
class RateFit:
    norm: str
    exponent: float
    intercept: float
    residual: float
    lam_min: float
    lam_max: float

    def to_dict(self) -> dict[str, Any]:
        return dict(vars(self))


def fit_rate(points: Sequence[tuple[float, float]], norm: str = "") -> RateFit:
    """Least-squares slope of ``log err`` against ``log lam``."""
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < 3:
        raise ValueError("fit_rate needs at least three points")
    lam = np.array([p[0] for p in pts])
    err = np.array([p[1] for p in pts])
    if np.any(~(lam > 0)) or np.any(~(err > 0)):
        raise ValueError("fit_rate needs strictly positive lambdas and errors")
    x, y = np.log(lam), np.log(err)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - y) ** 2)))
    return RateFit(norm, float(slope), float(intercept), resid, float(lam.min()), float(lam.max()))


def patch_rate_exponent(s: float, C: float, T: float) -> float:
    """Interpolation rate exponent ``s e^{-2CT} / (2 (1 + s e^{-CT}))`` for ``B^s``-regular data."""
    return s * math.exp(-2 * C * T) / (2 * (1 + s * math.exp(-C * T)))


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class ThetaRule:
    C: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("theta_rule.C must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("theta_rule.alpha must lie in (0, 1)")


@dataclass(frozen=True)
class SweepConfig:
    initial_data: GaussianBlobs | PatchSpec
    lambdas: tuple[float, ...]
    T: float = 1.0
    n: int = 256
    length: float = 2 * math.pi
    solver: SolverConfig = field(default_factory=SolverConfig)
    theta_rule: ThetaRule = field(default_factory=ThetaRule)
    norms: tuple[str, ...] = NORMS
    samples: int = 11  # sample times, equally spaced on [0, T]

    def __post_init__(self):
        lams = tuple(float(x) for x in self.lambdas)
        object.__setattr__(self, "lambdas", lams)
        if any(not x > 0 for x in lams):
            raise ValueError("lambdas must be positive")
        if any(b >= a for a, b in zip(lams, lams[1:])):
            raise ValueError("lambdas must be strictly decreasing")
        if not self.T > 0:
            raise ValueError("T must be positive")
        unknown = set(self.norms) - set(NORMS)
        if unknown:
            raise ValueError(f"unknown norms: {sorted(unknown)}")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")

    @property
    def grid(self) -> Grid:
        return Grid(self.n, self.length)

    def sample_times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.samples)

    def to_dict(self) -> dict[str, Any]:
        data = self.initial_data
        init = data.to_dict()
        if isinstance(data, PatchSpec):
            init = {"kind": "patch", **init}
        return {
            "initial_data": init,
            "lambdas": list(self.lambdas),
            "T": self.T,
            "n": self.n,
            "length": self.length,
            "solver": dict(vars(self.solver)),
            "theta_rule": dict(vars(self.theta_rule)),
            "norms": list(self.norms),
            "samples": self.samples,
        }


@dataclass
class CaseResult:
    lam: float
    theta: float
    times: np.ndarray
    series: dict[str, np.ndarray]
    steps: int = 0

    def sup(self, name: str) -> float:
        return float(np.max(self.series[name]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "theta": self.theta,
            "steps": self.steps,
            "times": [float(t) for t in self.times],
            "series": {k: [float(v) for v in vals] for k, vals in self.series.items()},
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CaseResult":
        return cls(
            lam=d["lambda"],
            theta=d["theta"],
            times=np.array(d["times"], dtype=float),
            series={k: np.array(v, dtype=float) for k, v in d["series"].items()},
            steps=d["steps"],
        )


@dataclass
class SweepReport:
    config: dict[str, Any]
    euler_reference: dict[str, Any]
    cases: list[CaseResult]
    fits: list[RateFit]
    checks: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "euler_reference": self.euler_reference,
            "cases": [c.to_dict() for c in self.cases],
            "fits": [f.to_dict() for f in self.fits],
            "checks": self.checks,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SweepReport":
        return cls(
            config=d["config"],
            euler_reference=d["euler_reference"],
            cases=[CaseResult.from_dict(c) for c in d["cases"]],
            fits=[RateFit(**f) for f in d["fits"]],
            checks=d.get("checks", {}),
        )


def case_series(
    omega_t: Sequence[ScalarField],
    euler_t: Sequence[ScalarField],
    lam: float,
    theta: float,
    norms: Sequence[str] = NORMS,
) -> dict[str, np.ndarray]:
    """Per-sample diagnostics of ``omega_lam`` against the Euler reference."""
    out: dict[str, list[float]] = {k: [] for k in norms}
    want_u = "u_l2" in norms or "u_linf" in norms
    for w, W in zip(omega_t, euler_t):
        if w.grid != W.grid:
            raise ValueError("QGSW and Euler trajectories live on different grids")
        f = w - W
        vals: dict[str, float] = {}
        vals["l1"] = f.norm(1)
        vals["l2"] = f.norm(2)
        vals["l4"] = f.norm(4)
        vals["linf"] = f.norm(np.inf)
        if want_u:
            du = velocity_from_vorticity(w.minus_mean(), lam) - velocity_from_vorticity(W.minus_mean(), 0.0)
            vals["u_l2"] = du.norm(2)
            vals["u_linf"] = du.norm(np.inf)
        if "xnorm" in norms:
            # both means are conserved and equal; drop the rounding residue
            vals["xnorm"] = x_norm(f.minus_mean())
        if "hipass_l2" in norms:
            vals["hipass_l2"] = sharp_highpass(w, theta).norm(2)
        if "annulus_l2" in norms:
            vals["annulus_l2"] = annulus_project(w, theta / 12.0, 8.0 * theta / 3.0).norm(2)
        for k in norms:
            out[k].append(vals[k])
    return {k: np.array(v) for k, v in out.items()}


def run_case(
    omega0: ScalarField,
    lam: float,
    T: float,
    cfg: SolverConfig,
    euler: Trajectory,
    theta: float,
    norms: Sequence[str] = NORMS,
) -> CaseResult:
    """Run QGSW at ``lam`` and compare against a precomputed Euler trajectory."""
    if euler.grid != omega0.grid:
        raise ValueError("Euler reference and initial data live on different grids")
    traj = simulate(omega0, lam, T, cfg, euler.times)
    series = case_series(traj.snapshots, euler.snapshots, lam, theta, norms)
    return CaseResult(lam, theta, traj.times, series, traj.steps)


def scaling_consistency(
    lams: Sequence[float], errs: Sequence[float], gap0: float, T: float
) -> tuple[float, list[bool]]:
    """Fit ``C`` on the largest lambda and test the bound at every lambda."""
    C = fit_constant(errs[0], gap0, lams[0], T)
    if not np.isfinite(C) or C <= 0:
        return C, [False] * len(lams)
    ok = [e <= predicted_bound(gap0, lam, T, C) * (1 + 1e-12) for lam, e in zip(lams, errs)]
    return C, ok


def strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def run_sweep(config: SweepConfig, threads: int = 1) -> SweepReport:
    """Euler reference first, then every lambda (concurrently); merged in lambda order."""
    grid = config.grid
    raw = initial_field(config.initial_data, grid)
    omega0, removed = project_mean_zero(raw)
    times = config.sample_times()
    cfg = config.solver
    euler = simulate(omega0, 0.0, config.T, cfg, times)
    thetas = [theta_rule(lam, config.T, config.theta_rule.C, config.theta_rule.alpha) for lam in config.lambdas]

    def job(i: int) -> CaseResult:
        return run_case(omega0, config.lambdas[i], config.T, cfg, euler, thetas[i], config.norms)

    idx = range(len(config.lambdas))
    if threads > 1 and len(config.lambdas) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cases = list(pool.map(job, idx))
    else:
        cases = [job(i) for i in idx]

    fits = []
    checks: dict[str, Any] = {}
    lams = list(config.lambdas)
    if len(lams) >= 3:
        for name in config.norms:
            sups = [c.sup(name) for c in cases]
            if all(s > 0 for s in sups):
                fits.append(fit_rate(list(zip(lams, sups)), name))
    if cases:
        for name in config.norms:
            checks[f"{name}_strictly_decreasing"] = strictly_decreasing([c.sup(name) for c in cases])
        if "xnorm" in config.norms:
            errs = [c.sup("xnorm") for c in cases]
            C, ok = scaling_consistency(lams, errs, 0.0, config.T)
            checks["c_fit"] = C
            checks["scaling_consistent"] = bool(all(ok))
            if np.isfinite(C):
                checks["bound_exponent"] = 0.5 * math.exp(-C * config.T)
                checks["predicted_bounds"] = [predicted_bound(0.0, lam, config.T, C) for lam in lams]
        if isinstance(config.initial_data, PatchSpec):
            # display only: interpolation rate for B^{1/2}_{2,inf}-regular patch data
            checks["patch_rate_exponent"] = patch_rate_exponent(0.5, config.theta_rule.C, config.T)

    ref = {
        "lambda": 0.0,
        "n": grid.n,
        "length": grid.length,
        "steps": euler.steps,
        "mean_removed": removed,
        "times": [float(t) for t in euler.times],
        "l2": [float(v) for v in euler.series("l2")],
        "hamiltonian": [float(v) for v in euler.series("hamiltonian")],
    }
    return SweepReport(config.to_dict(), ref, cases, fits, checks)


# ---------------------------------------------------------------- endpoint patch study


@dataclass
class PatchStudyReport:
    patch: dict[str, Any]
    lam: float
    times: np.ndarray
    sup_difference: np.ndarray
    symmetric_difference_area: np.ndarray
    intersection_area: np.ndarray
    mean_removed: float
    threshold: float
    window: tuple[float, float] | None  # longest interval with sup_difference >= threshold

    @property
    def window_length(self) -> float:
        if self.window is None:
            return 0.0
        return self.window[1] - self.window[0]

    def diverges(self, min_window: float = 0.2) -> bool:
        return self.window_length >= min_window

    def to_dict(self) -> dict[str, Any]:
        return {
            "patch": self.patch,
            "lambda": self.lam,
            "times": [float(t) for t in self.times],
            "sup_difference": [float(v) for v in self.sup_difference],
            "symmetric_difference_area": [float(v) for v in self.symmetric_difference_area],
            "intersection_area": [float(v) for v in self.intersection_area],
            "mean_removed": self.mean_removed,
            "threshold": self.threshold,
            "window": list(self.window) if self.window else None,
            "window_length": self.window_length,
        }


def longest_window(times: np.ndarray, flags: np.ndarray) -> tuple[float, float] | None:
    """Longest run of consecutive sample times where ``flags`` holds."""
    best = None
    start = None
    for i, ok in enumerate(flags):
        if ok and start is None:
            start = i
        if start is not None and (not ok or i == len(flags) - 1):
            end = i if ok else i - 1
            cand = (float(times[start]), float(times[end]))
            if best is None or cand[1] - cand[0] > best[1] - best[0]:
                best = cand
            start = None
    return best


def endpoint_patch_study(
    patch: PatchSpec,
    lam: float,
    T: float,
    cfg: SolverConfig,
    grid: Grid,
    samples: int = 41,
    threshold: float = 0.9,
) -> PatchStudyReport:
    """Evolve the same patch under Euler and QGSW and track their separation."""
    raw = rasterize(patch, grid)
    omega0, removed = project_mean_zero(raw)
    times = np.linspace(0.0, T, samples)
    E = simulate(omega0, 0.0, T, cfg, times)
    Q = simulate(omega0, lam, T, cfg, times)
    # level sets of the unshifted field: threshold amplitude/2 minus the removed mean
    level = 0.5 * patch.amplitude - removed
    sup, sym, inter = [], [], []
    for a, b in zip(Q.snapshots, E.snapshots):
        m = overlap_measures(a, b, threshold=level)
        sup.append(m.sup_difference)
        sym.append(m.symmetric_difference_area)
        inter.append(m.intersection_area)
    sup = np.array(sup)
    window = longest_window(times, sup >= threshold)
    return PatchStudyReport(
        patch.to_dict(), lam, times, sup, np.array(sym), np.array(inter), removed, threshold, window
    )
