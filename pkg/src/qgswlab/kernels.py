"""Modified Bessel functions K0, K1 and the combined log/Bessel kernel.

``K0`` and ``K1`` switch at ``x = 2`` between the ascending series and a
large-argument branch. The large-argument branch evaluates the scaled
function ``sqrt(2x/pi) e^x K_nu(x)`` through Steed's continued fraction
(the convergent resummation of the Hankel asymptotic expansion), so both
branches reach ~1e-15 relative accuracy at the switchover.
"""

from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
SWITCHOVER = 2.0
_EPS = 1e-16
_MAXIT = 10000


def _check_positive(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("Bessel K needs strictly positive arguments")
    return x


def _series_k0_k1(x: float) -> tuple[float, float]:
    # K0 = -(ln(x/2) + gamma) I0 + sum_{k>=1} H_k (x^2/4)^k / (k!)^2
    # K1 = 1/x + ln(x/2) I1 - (x/4) sum_k (psi(k+1) + psi(k+2)) (x^2/4)^k / (k! (k+1)!)
    y = 0.25 * x * x
    lg = math.log(0.5 * x)
    term = 1.0  # (x^2/4)^k / (k!)^2
    i0 = 0.0
    i1 = 0.0
    s0 = 0.0
    s1 = 0.0
    harmonic = 0.0  # H_k
    k = 0
    while True:
        term1 = term / (k + 1)  # (x^2/4)^k / (k! (k+1)!)
        i0 += term
        i1 += term1
        s0 += harmonic * term
        psi_sum = 2.0 * (harmonic - EULER_GAMMA) + 1.0 / (k + 1)
        s1 += psi_sum * term1
        k += 1
        harmonic += 1.0 / k
        term *= y / (k * k)
        if term < _EPS * i0 and k > 2:
            break
    i1 *= 0.5 * x
    k0 = -(lg + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + lg * i1 - 0.25 * x * s1
    return k0, k1


def _steed_k0_k1(x: float) -> tuple[float, float]:
    # Steed's CF2 for nu = 0 (Temme/Thompson-Barnett form)
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:
        raise RuntimeError(f"continued fraction did not converge at x={x}")
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k0_k1_scalar(x: float) -> tuple[float, float]:
    if x <= SWITCHOVER:
        return _series_k0_k1(x)
    return _steed_k0_k1(x)


def _vectorize(x, which: int):
    x = _check_positive(x)
    out = np.array([_k0_k1_scalar(float(v))[which] for v in x.ravel()]).reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def bessel_k0(x):
    """Modified Bessel function of the second kind, order 0, for ``x > 0``."""
    return _vectorize(x, 0)


def bessel_k1(x):
    """Modified Bessel function of the second kind, order 1, for ``x > 0``."""
    return _vectorize(x, 1)


def kernel_combined(r, lam: float):
    """``(1/2pi) log r + (1/2pi) K0(sqrt(lam) r)``, the radial profile of the
    difference between the Euler and QGSW Green's functions."""
    r = _check_positive(r)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return (np.log(r) + bessel_k0(math.sqrt(lam) * r)) / (2.0 * math.pi)


def kernel_combined_derivative(r, lam: float):
    """Radial derivative ``(1/2pi)(1/r - sqrt(lam) K1(sqrt(lam) r))``."""
    r = _check_positive(r)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    sl = math.sqrt(lam)
    return (1.0 / r - sl * bessel_k1(sl * r)) / (2.0 * math.pi)


def monotonicity_check(lam: float, r_grid) -> bool:
    """True iff the combined kernel is strictly increasing at every grid radius."""
    return bool(np.all(kernel_combined_derivative(r_grid, lam) > 0))


def k0_derivative_lower_bound_holds(r_grid) -> bool:
    """``K0'(r) = -K1(r) >= -e^{-r} (1 + 1/r)`` on the grid."""
    r = _check_positive(r_grid)
    return bool(np.all(-bessel_k1(r) >= -np.exp(-r) * (1.0 + 1.0 / r)))


def k0_derivative_positivity_holds(r_grid) -> bool:
    """``K0'(r) + 1/r > 0`` on the grid, together with the explicit lower bound
    ``(1 - e^{-r})/r - e^{-r}`` being positive and not exceeding it."""
    r = _check_positive(r_grid)
    lhs = -bessel_k1(r) + 1.0 / r
    lower = (1.0 - np.exp(-r)) / r - np.exp(-r)
    return bool(np.all(lhs >= lower) and np.all(lower > 0) and np.all(lhs > 0))
