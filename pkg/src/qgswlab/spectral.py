"""Periodic grid, Fourier transforms and the exact symbol operators.

All fields live on the periodic box ``[0, length)^2`` sampled at ``n`` points
per axis. Axis 0 of every array is ``x1`` and axis 1 is ``x2``. Lebesgue norms
use the unnormalised measure ``dx``, so ``||cos x1||_2 = pi*sqrt(2)`` on the
``2*pi`` box.

The two velocity laws differ only by the inversion symbol::

    u = grad_perp (lam - Laplacian)^{-1} omega,   grad_perp = (-d2, d1)

with ``lam = 0`` giving the Euler (Biot-Savart) law.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

TWO_PI = 2.0 * np.pi


class IllPosedInversion(ValueError):
    """Poisson inversion requested for a field with nonzero mean."""


@dataclass(frozen=True)
class Grid:
    """Square periodic grid with ``n`` points per axis and side ``length``."""

    n: int
    length: float = TWO_PI

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ValueError(f"n must be an integer, got {n!r}")
        if n < 8 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def cell_area(self) -> float:
        return self.dx * self.dx

    @property
    def area(self) -> float:
        return self.length * self.length

    @property
    def k_unit(self) -> float:
        """Physical wavenumber of the lattice spacing, ``2*pi/length``."""
        return TWO_PI / self.length

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Per-axis physical wavenumbers in standard DFT ordering."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n) * self.k_unit

    @cached_property
    def integer_wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    @cached_property
    def coords(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.coords
        return np.meshgrid(x, x, indexing="ij")

    @cached_property
    def k1(self) -> np.ndarray:
        return _readonly(np.broadcast_to(self.wavenumbers[:, None], (self.n, self.n)))

    @cached_property
    def k2(self) -> np.ndarray:
        return _readonly(np.broadcast_to(self.wavenumbers[None, :], (self.n, self.n)))

    @cached_property
    def ksq(self) -> np.ndarray:
        return _readonly(self.k1**2 + self.k2**2)

    @cached_property
    def kabs(self) -> np.ndarray:
        return _readonly(np.sqrt(self.ksq))

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True where either integer wavenumber equals ``-n/2``."""
        m = self.integer_wavenumbers == -(self.n // 2)
        return _readonly(m[:, None] | m[None, :])

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep ``max(|k1|, |k2|) <= n/3`` in integer units."""
        ik = np.abs(self.integer_wavenumbers)
        keep = ik <= self.n / 3.0
        return _readonly(keep[:, None] & keep[None, :])

    @cached_property
    def kmax_dealiased(self) -> float:
        return (self.n // 3) * self.k_unit

    def spectral_norm_factor(self) -> float:
        """Factor ``c`` such that ``int f^2 dx = c * sum |fft2(f)|^2``."""
        return self.area / float(self.n) ** 4

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros((self.n, self.n)))

    def from_function(self, func) -> "ScalarField":
        x1, x2 = self.mesh
        return ScalarField(self, np.asarray(func(x1, x2), dtype=float) * np.ones((self.n, self.n)))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


def build_grid(n: int, length: float = TWO_PI) -> Grid:
    return Grid(n, length)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real samples on a grid with a lazily computed Fourier lattice.

    The spectral lattice is ``fft2(values)`` (unnormalised forward DFT). Both
    arrays are read-only so a field can be shared freely.
    """

    grid: Grid
    values: np.ndarray
    _spectral: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"values shape {v.shape} does not match grid n={self.grid.n}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self._spectral is not None:
            s = np.array(self._spectral, dtype=complex)
            s.setflags(write=False)
            object.__setattr__(self, "_spectral", s)

    @classmethod
    def from_spectral(cls, grid: Grid, coeffs: np.ndarray) -> "ScalarField":
        """Build from a full coefficient lattice; the imaginary residue is dropped."""
        values = sfft.ifft2(coeffs).real
        return cls(grid, values)

    @property
    def spectral(self) -> np.ndarray:
        if self._spectral is None:
            s = sfft.fft2(self.values)
            s.setflags(write=False)
            object.__setattr__(self, "_spectral", s)
        return self._spectral

    def mean(self) -> float:
        return float(self.values.mean())

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell_area)

    def norm(self, p: float = 2) -> float:
        return lp_norm(self.values, self.grid, p)

    def minus_mean(self) -> "ScalarField":
        return ScalarField(self.grid, self.values - self.values.mean())

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self, other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _check_same_grid(self, other)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * float(c))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    u1: ScalarField
    u2: ScalarField

    def __post_init__(self):
        _check_same_grid(self.u1, self.u2)

    @property
    def grid(self) -> Grid:
        return self.u1.grid

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u1.values, self.u2.values)

    def norm(self, p: float = 2) -> float:
        return lp_norm(self.magnitude(), self.grid, p)

    def max_speed(self) -> float:
        return float(self.magnitude().max())

    def spectral_divergence(self) -> np.ndarray:
        g = self.grid
        return g.k1 * self.u1.spectral + g.k2 * self.u2.spectral

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.u1 - other.u1, self.u2 - other.u2)


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def lp_norm(values: np.ndarray, grid: Grid, p: float = 2) -> float:
    """Midpoint-rule ``L^p`` norm with measure ``dx``; ``p = inf`` is the grid max."""
    a = np.abs(values)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if p == 2:
        return float(np.sqrt(np.sum(a * a) * grid.cell_area))
    if p == 1:
        return float(a.sum() * grid.cell_area)
    return float((np.sum(a**p) * grid.cell_area) ** (1.0 / p))


def apply_multiplier(f: ScalarField, symbol: np.ndarray) -> ScalarField:
    return ScalarField.from_spectral(f.grid, f.spectral * symbol)


def inverse_symbol(grid: Grid, lam: float) -> np.ndarray:
    """``1/(lam + |k|^2)`` with the ``k = 0`` entry set per the inversion rule."""
    ksq = grid.ksq
    with np.errstate(divide="ignore", over="ignore"):
        sym = 1.0 / (lam + ksq)
    sym[0, 0] = 1.0 / lam if lam > 0 else 0.0
    return sym


def check_mean_zero(omega: ScalarField, what: str = "Poisson inversion") -> None:
    # ||mean||_2 over the box is |mean| * length
    mean_l2 = abs(omega.mean()) * omega.grid.length
    if mean_l2 > 1e-10 * omega.norm(2) + 1e-300:
        raise IllPosedInversion(
            f"{what} needs a mean-zero field; mean = {omega.mean():.3e}"
        )


def invert_helmholtz(omega: ScalarField, lam: float) -> ScalarField:
    """Stream function ``psi = (lam - Laplacian)^{-1} omega``."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if lam == 0:
        check_mean_zero(omega)
    return apply_multiplier(omega, inverse_symbol(omega.grid, lam))


def perp_gradient_symbols(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Symbols of ``(-d2, d1)``, with the Nyquist row/column zeroed."""
    s1 = -1j * grid.k2
    s2 = 1j * grid.k1
    s1 = np.where(grid.nyquist_mask, 0.0, s1)
    s2 = np.where(grid.nyquist_mask, 0.0, s2)
    return s1, s2


def velocity_from_vorticity(omega: ScalarField, lam: float) -> VectorField:
    """Velocity ``grad_perp (lam - Laplacian)^{-1} omega``; divergence-free by construction."""
    psi = invert_helmholtz(omega, lam)
    s1, s2 = perp_gradient_symbols(omega.grid)
    return VectorField(apply_multiplier(psi, s1), apply_multiplier(psi, s2))


def error_symbol(grid: Grid, lam: float) -> np.ndarray:
    """Scalar part ``lam/(|k|^2 (lam + |k|^2))`` of the error operator; zero at ``k = 0``."""
    ksq = grid.ksq
    with np.errstate(divide="ignore", invalid="ignore"):
        sym = lam / (ksq * (lam + ksq))
    sym[0, 0] = 0.0
    return sym


def error_velocity(omega: ScalarField, lam: float) -> VectorField:
    """``lam grad_perp (-Laplacian)^{-1} (lam - Laplacian)^{-1} omega``.

    Equals ``velocity_from_vorticity(omega, 0) - velocity_from_vorticity(omega, lam)``.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    check_mean_zero(omega)
    sym = error_symbol(omega.grid, lam)
    s1, s2 = perp_gradient_symbols(omega.grid)
    return VectorField(apply_multiplier(omega, s1 * sym), apply_multiplier(omega, s2 * sym))


def error_symbol_magnitude(xi: np.ndarray | float, lam: float) -> np.ndarray:
    """``|S_lam(xi)| = lam / (|xi| (lam + |xi|^2))`` as a function of ``|xi|``."""
    r = np.asarray(xi, dtype=float)
    return lam / (r * (lam + r * r))


def dealias(f: ScalarField) -> ScalarField:
    return apply_multiplier(f, f.grid.dealias_mask)


def spectral_energy(f: ScalarField) -> float:
    """``int f^2 dx`` computed from the coefficients (Parseval)."""
    return float(np.sum(np.abs(f.spectral) ** 2) * f.grid.spectral_norm_factor())


def hamiltonian(omega: ScalarField, lam: float) -> float:
    """``1/2 int omega (lam - Laplacian)^{-1} omega dx`` evaluated spectrally."""
    g = omega.grid
    sym = inverse_symbol(g, lam)
    return 0.5 * float(np.sum(np.abs(omega.spectral) ** 2 * sym) * g.spectral_norm_factor())
