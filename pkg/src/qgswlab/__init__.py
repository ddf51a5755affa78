"""QGSW / Euler spectral laboratory."""

from .spectral import (
    Grid,
    IllPosedInversion,
    ScalarField,
    VectorField,
    build_grid,
    error_symbol,
    error_velocity,
    hamiltonian,
    invert_helmholtz,
    velocity_from_vorticity,
)
from .littlewood_paley import (
    BesovSpec,
    DyadicFamily,
    band_norms,
    band_project,
    besov_norm,
    build_family,
    commutator,
    homogeneous_besov_norm,
    log_interpolation_check,
    low_project,
    rescaled_cutoffs,
    sharp_highpass,
    x_norm,
)
from .transport import NumericalError, SolverConfig, Trajectory, advect_points, simulate
from .kernels import bessel_k0, bessel_k1, kernel_combined, monotonicity_check
from .patches import PatchSpec, overlap_measures, rasterize
from .harness import (
    SweepConfig,
    SweepReport,
    ThetaRule,
    endpoint_patch_study,
    fit_rate,
    predicted_bound,
    run_sweep,
    theta_rule,
)

__version__ = "0.1.0"
