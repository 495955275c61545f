"""Gevrey norms, radius-of-analyticity estimation, and closed-form floors.

Weighted norms are accumulated in the log domain (log-sum-exp over modes),
so arbitrarily large radii never overflow; the linear value is returned
whenever it is representable in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllBelowFloorError,
    MissingInputError,
    TooFewShellsError,
    WrongDimensionError,
)
from .operators import GEVREY_EXP_CLAMP
from .spectral import SCALAR, VECTOR, SpectralField, kspace, to_physical

_LOG_MAX = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class GevreyNorm:
    """Weighted norm with a log-domain value that never overflows."""

    log: float  # log of the norm; -inf for the zero field
    value: float  # exp(log), or +inf when not representable
    overflow: bool


@dataclass(frozen=True)
class XYNorms:
    x: float
    y: float
    x_log: float
    y_log: float


@dataclass(frozen=True)
class RadiusFit:
    tau_fit: float
    s: float
    shell_range: tuple[int, int]
    residual: float
    n_shells_used: int


def _logsumexp(terms: np.ndarray) -> float:
    if terms.size == 0:
        return -math.inf
    peak = float(np.max(terms))
    if peak == -math.inf:
        return -math.inf
    return peak + math.log(float(np.sum(np.exp(terms - peak))))


def gevrey_norm(field: SpectralField, tau: float, s: float = 1.0,
                r: float = 0.0) -> GevreyNorm:
    """|| Lambda^r exp(tau Lambda^{1/s}) field ||_{L2}, log-domain safe."""
    ks = kspace(field.grid)
    mag = field.mode_magnitude()
    nz = mag > 0.0
    if not nz.any():
        return GevreyNorm(-math.inf, 0.0, False)
    absk = ks.abs_k[nz]
    terms = (
        2.0 * tau * absk ** (1.0 / s)
        + 2.0 * r * np.log(absk)
        + 2.0 * np.log(mag[nz])
    )
    log_sq = field.grid.d * math.log(2.0 * math.pi) + _logsumexp(terms)
    log_norm = 0.5 * log_sq
    if log_norm < _LOG_MAX:
        return GevreyNorm(log_norm, math.exp(log_norm), False)
    return GevreyNorm(log_norm, math.inf, True)


def gevrey_weighted_l2(field: SpectralField, tau: float, s: float = 1.0,
                       r: float = 0.0) -> float:
    """Fast linear-domain Gevrey norm; may overflow to inf for huge tau."""
    ks = kspace(field.grid)
    exponent = np.minimum(2.0 * tau * ks.abs_k ** (1.0 / s), 2 * GEVREY_EXP_CLAMP)
    weight = np.exp(exponent)
    if r != 0.0:
        weight = weight * np.where(ks.k_sq > 0, ks.abs_k ** (2.0 * r), 0.0)
    total = float(np.sum(weight * field.mode_magnitude() ** 2))
    return math.sqrt(field.grid.measure * total)


def xy_norms(omega: SpectralField, tau: float, s: float = 1.0) -> XYNorms:
    """Componentwise Gevrey norms: X uses |k_m|, Y uses |k_m|^{1+s/2}."""
    if omega.grid.d != 3:
        raise WrongDimensionError("X/Y norms are defined for d=3 only")
    ks = kspace(omega.grid)
    mag_sq = omega.mode_magnitude() ** 2
    nz = mag_sq > 0.0
    if not nz.any():
        return XYNorms(0.0, 0.0, -math.inf, -math.inf)
    log_meas = 3.0 * math.log(2.0 * math.pi)
    x_parts, y_parts = [], []
    for m in range(3):
        akm = np.abs(ks.k[m])[nz]
        pos = akm > 0.0
        if not pos.any():
            continue
        base = 2.0 * tau * akm[pos] ** (1.0 / s) + np.log(mag_sq[nz][pos])
        x_parts.append(_logsumexp(base + 2.0 * np.log(akm[pos])))
        y_parts.append(_logsumexp(base + (2.0 + s) * np.log(akm[pos])))
    x_log_sq = _logsumexp(np.array(x_parts)) + log_meas if x_parts else -math.inf
    y_log_sq = _logsumexp(np.array(y_parts)) + log_meas if y_parts else -math.inf
    x_log, y_log = 0.5 * x_log_sq, 0.5 * y_log_sq
    x = math.exp(x_log) if x_log < _LOG_MAX else math.inf
    y = math.exp(y_log) if y_log < _LOG_MAX else math.inf
    return XYNorms(x, y, x_log, y_log)


# shells with peaks below this multiple of eps * field max are noise
_FLOOR_FACTOR = 1e3 * np.finfo(np.float64).eps


def fit_radius(field: SpectralField, s: float = 1.0,
               shell_range: tuple[int, int] | None = None) -> RadiusFit:
    """Estimate the decay rate of shell-peak coefficients.

    For each integer shell n the peak magnitude and the |k| where it is
    attained are recorded; the fit is the least-squares slope of
    log(peak) against -|k_peak|^{1/s}. Peaks track the slowest-decaying
    direction, which is what the radius measures; shell sums would bias
    the estimate up by shell multiplicity.
    """
    grid = field.grid
    if shell_range is None:
        shell_range = (2, max(grid.dealias_cutoff - 2, 3))
    k_lo, k_hi = shell_range
    if k_lo < 1:
        raise ValueError("shell_range must start at k_lo >= 1")
    ks = kspace(grid)
    mag = field.mode_magnitude()
    peak_global = float(np.max(mag))
    if peak_global <= 0.0:
        raise AllBelowFloorError("field is numerically zero")
    floor = _FLOOR_FACTOR * peak_global
    shells = np.floor(ks.abs_k).astype(int)
    xs, ys = [], []
    for n in range(k_lo, k_hi + 1):
        sel = shells == n
        if not sel.any():
            continue
        vals = mag[sel]
        j = int(np.argmax(vals))
        peak = float(vals[j])
        if peak < floor:
            continue
        k_peak = float(ks.abs_k[sel][j])
        xs.append(k_peak ** (1.0 / s))
        ys.append(math.log(peak))
    if not xs:
        raise AllBelowFloorError("all shell peaks sit below the noise floor")
    if len(xs) < 4:
        raise TooFewShellsError(
            f"only {len(xs)} usable shells in [{k_lo}, {k_hi}]; need >= 4"
        )
    xs_a, ys_a = np.asarray(xs), np.asarray(ys)
    slope, intercept = np.polyfit(xs_a, ys_a, 1)
    resid = float(np.sqrt(np.mean((ys_a - (slope * xs_a + intercept)) ** 2)))
    return RadiusFit(
        tau_fit=max(0.0, -float(slope)),
        s=s,
        shell_range=(k_lo, k_hi),
        residual=resid,
        n_shells_used=len(xs),
    )


def c0_2d(z0: float, w0: float, u0_h3: float, nu: float,
          c_cal: float = 1.0) -> float:
    """Data constant entering the 2-d small-alpha radius floor."""
    m4 = u0_h3**4
    return (z0 + w0) * (1.0 / nu**2
                        + c_cal * m4 / nu**6 * math.exp(c_cal * m4 / nu**4))


def c0_3d(h1_0: float, x0: float, tau0: float, nu: float, alpha: float,
          c_cal: float = 1.0) -> float:
    """Data constant entering the 3-d large-data radius floor."""
    one_a2 = 1.0 + alpha**2
    return (
        1.0
        + c_cal * tau0 * (h1_0 + x0) * one_a2 / (nu * alpha)
        + c_cal * tau0 * (1.0 + tau0) * h1_0**2 * one_a2**2 / (nu * alpha) ** 2
    )


def theorem_floor(variant: str, **inputs: float) -> float:
    """Closed-form lower bounds for the Gevrey radius.

    A: tau0 exp(-c (2+2a^2) M0 / (a nu))        [2-d, large alpha]
    B: tau0 / (1 + tau0 C0),  C0 from c0_2d     [2-d, small alpha]
    C: (tau0 / C0) exp(-c int ||grad u||_inf)   [3-d, large data]
    D: tau0 exp(-kappa (4+4a^2) M0 / (nu a))    [3-d, small data]
    E: tau0 exp(-2 Cbar / nu)                   [damped Euler]
    """

    def need(*names: str) -> list[float]:
        missing = [n for n in names if n not in inputs]
        if missing:
            raise MissingInputError(
                f"variant {variant} needs {missing}, got {sorted(inputs)}"
            )
        return [float(inputs[n]) for n in names]

    if variant == "A":
        tau0, m0, alpha, nu = need("tau0", "m0", "alpha", "nu")
        c = float(inputs.get("c_cal", 1.0))
        return tau0 * math.exp(-c * (2.0 + 2.0 * alpha**2) * m0 / (alpha * nu))
    if variant == "B":
        tau0, c0 = need("tau0", "c0")
        return tau0 / (1.0 + tau0 * c0)
    if variant == "C":
        tau0, c0, grad_int = need("tau0", "c0", "grad_int")
        c = float(inputs.get("c_cal", 1.0))
        return tau0 / c0 * math.exp(-c * grad_int)
    if variant == "D":
        tau0, m0, alpha, nu = need("tau0", "m0", "alpha", "nu")
        kappa = float(inputs.get("kappa_cal", 1.0))
        return tau0 * math.exp(-kappa * (4.0 + 4.0 * alpha**2) * m0 / (nu * alpha))
    if variant == "E":
        tau0, cbar, nu = need("tau0", "cbar", "nu")
        return tau0 * math.exp(-2.0 * cbar / nu)
    raise ValueError(f"unknown floor variant {variant!r}")


def sup_gradient(u: SpectralField) -> float:
    """Collocation sup of the Frobenius norm of grad u."""
    if u.rank != VECTOR:
        raise WrongDimensionError("sup_gradient expects a vector field")
    ks = kspace(u.grid)
    d = u.grid.d
    total = None
    for i in range(d):
        for j in range(d):
            part = to_physical(
                SpectralField(u.grid, SCALAR, 1j * ks.k[j] * u.coeffs[i])
            )
            total = part**2 if total is None else total + part**2
    return float(np.sqrt(np.max(total)))


def bkm_gradient_bound(omega0_l2: float, omega0_sup: float, omega_hr: float,
                       nu: float, t: float, c_cal: float = 1.0) -> float:
    """Log-interpolation bound on ||grad u||_inf for 2-d damped Euler."""
    c0 = max(omega0_sup, 1e-300)
    return c_cal * math.exp(-nu * t) * (
        omega0_l2
        + omega0_sup * (2.0 + math.log1p(math.exp(nu * t) * omega_hr / c0))
    )
