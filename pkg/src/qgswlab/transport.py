"""Pseudo-spectral transport of vorticity under the QGSW / Euler velocity laws.

The solver advances ``d_t omega + u . grad omega = 0`` with
``u = grad_perp (lam - Laplacian)^{-1} omega`` (``lam = 0`` is Euler) using
classical RK4, the two-thirds dealiasing rule and an optional exponential
filter. Internally the state is kept as a half-plane (``rfft2``) coefficient
array; both velocity laws share every line except the inversion symbol.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft
from scipy import ndimage

from .spectral import Grid, ScalarField, VectorField, check_mean_zero, velocity_from_vorticity

log = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"QGSW"
SNAPSHOT_VERSION = 1


class NumericalError(RuntimeError):
    """Raised on CFL violation with a fixed step or on non-finite state."""


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.5
    filter: bool = False
    filter_alpha: float = 36.0
    filter_order: float = 36.0
    dt: float | None = None  # fixed step; None means adaptive CFL stepping
    snapshot_cadence: float = 100.0  # snapshots per unit time for flow maps

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.filter_alpha <= 0 or self.filter_order <= 0:
            raise ValueError("filter parameters must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.snapshot_cadence <= 0:
            raise ValueError("snapshot_cadence must be positive")


class _HalfSpectral:
    """Wavenumber arrays on the ``rfft2`` half lattice of a grid."""

    def __init__(self, grid: Grid, lam: float, cfg: SolverConfig):
        n = grid.n
        self.grid = grid
        k1 = grid.wavenumbers[:, None]
        k2 = (np.arange(n // 2 + 1) * grid.k_unit)[None, :]
        i1 = np.fft.fftfreq(n, d=1.0 / n)[:, None]
        i2 = np.arange(n // 2 + 1)[None, :]
        self.shape = (n, n // 2 + 1)
        ksq = k1**2 + k2**2
        keep = (np.abs(i1) <= n / 3.0) & (np.abs(i2) <= n / 3.0)
        self.mask = np.broadcast_to(keep, self.shape).astype(float)
        # masked derivative symbols; the mask also removes both Nyquist lines
        self.ik1 = 1j * k1 * self.mask
        self.ik2 = 1j * k2 * self.mask
        with np.errstate(divide="ignore"):
            inv = 1.0 / (lam + ksq)
        inv = np.broadcast_to(inv, self.shape).copy()
        inv[0, 0] = 1.0 / lam if lam > 0 else 0.0
        self.inv = inv
        if cfg.filter:
            kmax = grid.kmax_dealiased
            self.filter = np.exp(-cfg.filter_alpha * (np.sqrt(ksq) / kmax) ** cfg.filter_order)
        else:
            self.filter = None


class VorticitySolver:
    """RK4 integrator for one value of ``lam`` on one grid."""

    def __init__(self, grid: Grid, lam: float, cfg: SolverConfig | None = None):
        if lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {lam}")
        self.grid = grid
        self.lam = float(lam)
        self.cfg = cfg or SolverConfig()
        self.ops = _HalfSpectral(grid, self.lam, self.cfg)
        self._speed = 0.0

    def to_half(self, omega: ScalarField) -> np.ndarray:
        return sfft.rfft2(omega.values) * self.ops.mask

    def to_field(self, w_hat: np.ndarray) -> ScalarField:
        return ScalarField(self.grid, sfft.irfft2(w_hat, s=(self.grid.n, self.grid.n)))

    def velocity_half(self, w_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        psi = w_hat * self.ops.inv
        return -self.ops.ik2 * psi, self.ops.ik1 * psi

    def rhs_half(self, w_hat: np.ndarray) -> np.ndarray:
        n = self.grid.n
        s = (n, n)
        u1h, u2h = self.velocity_half(w_hat)
        u1 = sfft.irfft2(u1h, s=s)
        u2 = sfft.irfft2(u2h, s=s)
        w1 = sfft.irfft2(self.ops.ik1 * w_hat, s=s)
        w2 = sfft.irfft2(self.ops.ik2 * w_hat, s=s)
        self._speed = float(np.sqrt((u1 * u1 + u2 * u2).max()))
        return -sfft.rfft2(u1 * w1 + u2 * w2) * self.ops.mask

    def max_speed(self, w_hat: np.ndarray) -> float:
        n = self.grid.n
        u1h, u2h = self.velocity_half(w_hat)
        u1 = sfft.irfft2(u1h, s=(n, n))
        u2 = sfft.irfft2(u2h, s=(n, n))
        return float(np.sqrt((u1 * u1 + u2 * u2).max()))

    def stable_dt(self, w_hat: np.ndarray) -> float:
        speed = self.max_speed(w_hat)
        if speed == 0:
            return math.inf
        return self.cfg.cfl * self.grid.dx / speed

    def step_half(self, w_hat: np.ndarray, dt: float) -> np.ndarray:
        k1 = self.rhs_half(w_hat)
        k2 = self.rhs_half(w_hat + 0.5 * dt * k1)
        k3 = self.rhs_half(w_hat + 0.5 * dt * k2)
        k4 = self.rhs_half(w_hat + dt * k3)
        out = w_hat + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if self.ops.filter is not None:
            out = out * self.ops.filter
        if not np.all(np.isfinite(out)):
            raise NumericalError(f"non-finite vorticity after step dt={dt:g} (lambda={self.lam:g})")
        return out

    def advance(self, w_hat: np.ndarray, t0: float, t1: float) -> tuple[np.ndarray, int]:
        """Integrate from ``t0`` to ``t1`` exactly; returns the state and step count."""
        t = t0
        steps = 0
        fixed = self.cfg.dt
        while t1 - t > 1e-14 * max(1.0, abs(t1)):
            limit = self.stable_dt(w_hat)
            if fixed is not None:
                if fixed > limit * (1 + 1e-12):
                    raise NumericalError(
                        f"fixed dt={fixed:g} violates CFL limit {limit:g} (cfl={self.cfg.cfl})"
                    )
                dt = fixed
            else:
                dt = limit
            # land exactly on t1; split the remainder evenly to avoid a sliver step
            remaining = t1 - t
            if dt >= remaining:
                dt = remaining
            else:
                nsteps = math.ceil(remaining / dt)
                dt = remaining / nsteps if fixed is None else dt
            w_hat = self.step_half(w_hat, dt)
            t = t1 if dt == remaining else t + dt
            steps += 1
        return w_hat, steps


def rhs(omega: ScalarField, lam: float) -> ScalarField:
    """Transport tendency ``-dealias(u . grad omega)`` for the given velocity law."""
    check_mean_zero(omega, "transport tendency")
    solver = VorticitySolver(omega.grid, lam)
    w_hat = sfft.rfft2(omega.values) * solver.ops.mask
    return solver.to_field(solver.rhs_half(w_hat))


def step(omega: ScalarField, lam: float, dt: float, cfg: SolverConfig | None = None) -> ScalarField:
    """One RK4 step of size ``dt`` (checked against the CFL limit)."""
    check_mean_zero(omega, "transport step")
    cfg = cfg or SolverConfig()
    solver = VorticitySolver(omega.grid, lam, cfg)
    w_hat = solver.to_half(omega)
    limit = solver.stable_dt(w_hat)
    if dt > limit * (1 + 1e-12):
        raise NumericalError(f"dt={dt:g} violates CFL limit {limit:g}")
    return solver.to_field(solver.step_half(w_hat, dt))


@dataclass
class Diagnostics:
    mean: float
    l1: float
    l2: float
    l4: float
    linf: float
    hamiltonian: float


def diagnostics(omega: ScalarField, lam: float) -> Diagnostics:
    from .spectral import hamiltonian

    return Diagnostics(
        mean=omega.mean(),
        l1=omega.norm(1),
        l2=omega.norm(2),
        l4=omega.norm(4),
        linf=omega.norm(np.inf),
        hamiltonian=hamiltonian(omega, lam),
    )


@dataclass
class Trajectory:
    lam: float
    times: np.ndarray
    snapshots: list[ScalarField | None]  # None where a snapshot was not kept
    diagnostics: list[Diagnostics]
    steps: int = 0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        self.times = t
        grids = {s.grid for s in self.snapshots if s is not None}
        if len(grids) > 1:
            raise ValueError("trajectory snapshots live on different grids")

    @property
    def grid(self) -> Grid:
        return self.snapshots[-1].grid

    def at(self, t: float) -> ScalarField:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-12 * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t={t}")
        if self.snapshots[i] is None:
            raise KeyError(f"snapshot at t={t} was not kept")
        return self.snapshots[i]

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(d, name) for d in self.diagnostics])


def default_sample_times(T: float, cfg: SolverConfig) -> np.ndarray:
    count = max(1, math.ceil(T * cfg.snapshot_cadence))
    return np.linspace(0.0, T, count + 1)


def simulate(
    omega0: ScalarField,
    lam: float,
    T: float,
    cfg: SolverConfig | None = None,
    sample_times: Sequence[float] | None = None,
    keep_snapshots: bool = True,
) -> Trajectory:
    """Integrate to ``T`` and record snapshots/diagnostics at ``sample_times``.

    ``sample_times`` defaults to the config snapshot cadence and always
    includes ``0`` and ``T``.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    check_mean_zero(omega0, "simulation")
    cfg = cfg or SolverConfig()
    if sample_times is None:
        times = default_sample_times(T, cfg)
    else:
        times = np.unique(np.concatenate([[0.0], np.asarray(sample_times, float), [T]]))
        if times[0] < 0 or times[-1] > T:
            raise ValueError("sample times must lie in [0, T]")
    solver = VorticitySolver(omega0.grid, lam, cfg)
    w_hat = solver.to_half(omega0)
    snaps: list[ScalarField] = []
    diags: list[Diagnostics] = []
    t = 0.0
    total = 0
    for ts in times:
        if ts > t:
            w_hat, nsteps = solver.advance(w_hat, t, ts)
            total += nsteps
            t = ts
        field_t = solver.to_field(w_hat)
        diags.append(diagnostics(field_t, lam))
        snaps.append(field_t if keep_snapshots or ts == times[-1] else None)
    log.debug("lambda=%g: %d RK4 steps to T=%g", lam, total, T)
    return Trajectory(lam, times, snaps, diags, total)


# ---------------------------------------------------------------- flow maps


class SnapshotVelocity:
    """Velocity ``u(t, x)`` from stored vorticity snapshots.

    Space: periodic cubic-spline interpolation of each snapshot velocity.
    Time: linear interpolation between neighbouring snapshots.
    """

    def __init__(self, trajectory: Trajectory):
        self.lam = trajectory.lam
        self.times = trajectory.times
        self.grid = trajectory.grid
        self._coeffs = []
        if any(s is None for s in trajectory.snapshots):
            raise ValueError("flow maps need a trajectory with every snapshot kept")
        for snap in trajectory.snapshots:
            u = velocity_from_vorticity(snap.minus_mean(), self.lam)
            self._coeffs.append(
                (
                    ndimage.spline_filter(u.u1.values, order=3, mode="grid-wrap"),
                    ndimage.spline_filter(u.u2.values, order=3, mode="grid-wrap"),
                )
            )

    @property
    def time_range(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def _interp(self, i: int, idx: np.ndarray) -> np.ndarray:
        c1, c2 = self._coeffs[i]
        kw = dict(order=3, mode="grid-wrap", prefilter=False)
        return np.stack(
            [ndimage.map_coordinates(c1, idx, **kw), ndimage.map_coordinates(c2, idx, **kw)],
            axis=-1,
        )

    def __call__(self, t: float, points: np.ndarray) -> np.ndarray:
        t0, t1 = self.time_range
        tol = 1e-12 * max(1.0, abs(t1))
        if t < t0 - tol or t > t1 + tol:
            raise ValueError(f"t={t} outside snapshot coverage [{t0}, {t1}]")
        idx = (np.asarray(points, float) / self.grid.dx).T
        if len(self.times) == 1:
            return self._interp(0, idx)
        j = int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2))
        ta, tb = self.times[j], self.times[j + 1]
        w = min(max((t - ta) / (tb - ta), 0.0), 1.0)
        ua = self._interp(j, idx)
        if w == 0.0:
            return ua
        return (1 - w) * ua + w * self._interp(j + 1, idx)


VelocityProvider = Callable[[float, np.ndarray], np.ndarray]


def advect_points(
    velocity: VelocityProvider,
    points: np.ndarray,
    t0: float,
    t1: float,
    dt: float,
    sign: int = 1,
) -> np.ndarray:
    """RK4 integration of ``dX/dt = sign * u(t, X)`` from ``t0`` to ``t1``.

    ``sign = +1`` transports sets forward; ``sign = -1`` is the minus-sign
    map ``X(t) = x - int_0^t u(s, X(s)) ds``. Providers exposing
    ``time_range`` are checked for coverage of ``[t0, t1]``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not dt > 0:
        raise ValueError("dt must be positive")
    rng = getattr(velocity, "time_range", None)
    if rng is not None:
        lo, hi = rng
        tol = 1e-12 * max(1.0, abs(hi))
        if min(t0, t1) < lo - tol or max(t0, t1) > hi + tol:
            raise ValueError(f"time range [{t0}, {t1}] outside velocity coverage [{lo}, {hi}]")
    x = np.array(points, dtype=float, copy=True)
    if t1 == t0:
        return x
    nsteps = max(1, math.ceil(abs(t1 - t0) / dt - 1e-12))
    h = (t1 - t0) / nsteps

    def f(t, y):
        return sign * velocity(t, y)

    t = t0
    for i in range(nsteps):
        a = f(t, x)
        b = f(t + 0.5 * h, x + 0.5 * h * a)
        c = f(t + 0.5 * h, x + 0.5 * h * b)
        d = f(t + h, x + h * c)
        x = x + (h / 6.0) * (a + 2 * b + 2 * c + d)
        t = t0 + (i + 1) * h
    return x


# ---------------------------------------------------------------- snapshot files


def write_snapshot(path: str | Path, f: ScalarField) -> None:
    """Binary layout (little-endian): ``b"QGSW"``, u32 version, u32 n,
    f64 length, then ``n*n`` f64 values in row-major order."""
    g = f.grid
    header = SNAPSHOT_MAGIC + struct.pack("<IId", SNAPSHOT_VERSION, g.n, g.length)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_snapshot(path: str | Path) -> ScalarField:
    data = Path(path).read_bytes()
    head = 4 + struct.calcsize("<IId")
    if len(data) < head or data[:4] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a QGSW snapshot file")
    version, n, length = struct.unpack("<IId", data[4:head])
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    grid = Grid(n, length)
    body = data[head:]
    if len(body) != 8 * n * n:
        raise ValueError(f"{path}: expected {n * n} values, found {len(body) // 8}")
    return ScalarField(grid, np.frombuffer(body, dtype="<f8").reshape(n, n))
