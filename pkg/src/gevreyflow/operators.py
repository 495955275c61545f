"""Fourier multipliers and vector calculus on the torus.

Conventions fixed here and used everywhere: in 2-d the scalar curl is
curl v = d1 v2 - d2 v1, and the stream-function inversion is chosen so that
curl(velocity_from_vorticity(w, alpha)) equals (I - alpha^2 Lap)^{-1} w
exactly on coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidVorticityError, RankMismatchError
from .spectral import (
    SCALAR,
    TWO_PI,
    VECTOR,
    Grid,
    SpectralField,
    divergence_defect,
    kspace,
    to_physical,
)

# exponent clamp keeping exp() inside float64 range with square slack
GEVREY_EXP_CLAMP = 0.5 * math.log(np.finfo(np.float64).max)

DIV_TOL = 1e-12


@dataclass(frozen=True)
class MultiplierSpec:
    """Radial / componentwise Fourier multiplier description."""

    kind: str  # lambda | lambda_m | gevrey | gevrey_m | r_alpha | helmholtz_inv
    sigma: float = 0.0
    m: int = 0
    tau: float = 0.0
    s: float = 1.0
    alpha: float = 0.0


def lam(sigma: float) -> MultiplierSpec:
    return MultiplierSpec("lambda", sigma=sigma)


def lam_m(m: int, sigma: float) -> MultiplierSpec:
    return MultiplierSpec("lambda_m", sigma=sigma, m=m)


def gevrey(tau: float, s: float = 1.0) -> MultiplierSpec:
    return MultiplierSpec("gevrey", tau=tau, s=s)


def gevrey_m(m: int, tau: float, s: float = 1.0) -> MultiplierSpec:
    return MultiplierSpec("gevrey_m", tau=tau, s=s, m=m)


def r_alpha(alpha: float) -> MultiplierSpec:
    return MultiplierSpec("r_alpha", alpha=alpha)


def helmholtz_inv(alpha: float) -> MultiplierSpec:
    return MultiplierSpec("helmholtz_inv", alpha=alpha)


def symbol(spec: MultiplierSpec, grid: Grid) -> tuple[np.ndarray, bool]:
    """Evaluate the multiplier on the resolved lattice.

    Returns (values, overflowed). Gevrey symbols clamp their exponent at
    GEVREY_EXP_CLAMP instead of producing infinities.
    """
    ks = kspace(grid)
    if spec.kind == "lambda":
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(ks.k_sq > 0, ks.abs_k**spec.sigma, 0.0)
        return vals, False
    if spec.kind == "lambda_m":
        akm = np.abs(ks.k[spec.m - 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(akm > 0, akm**spec.sigma, 0.0)
        return vals, False
    if spec.kind in ("gevrey", "gevrey_m"):
        base = ks.abs_k if spec.kind == "gevrey" else np.abs(ks.k[spec.m - 1])
        exponent = spec.tau * base ** (1.0 / spec.s)
        peak = float(np.max(exponent * ks.trunc_keep))
        overflowed = peak > GEVREY_EXP_CLAMP
        return np.exp(np.minimum(exponent, GEVREY_EXP_CLAMP)), overflowed
    if spec.kind == "r_alpha":
        return ks.k_sq / (1.0 + spec.alpha**2 * ks.k_sq), False
    if spec.kind == "helmholtz_inv":
        return 1.0 / (1.0 + spec.alpha**2 * ks.k_sq), False
    raise ValueError(f"unknown multiplier kind {spec.kind!r}")


def apply_multiplier(field: SpectralField, spec: MultiplierSpec) -> SpectralField:
    vals, overflowed = symbol(spec, field.grid)
    return field.with_coeffs(field.coeffs * vals,
                             overflow=field.overflow or overflowed)


def grad(field: SpectralField) -> SpectralField:
    if field.rank != SCALAR:
        raise RankMismatchError("grad expects a scalar field")
    ks = kspace(field.grid)
    comps = np.stack([1j * ks.k[i] * field.coeffs for i in range(field.grid.d)])
    return SpectralField(field.grid, VECTOR, comps, field.overflow)


def div(field: SpectralField) -> SpectralField:
    if field.rank != VECTOR:
        raise RankMismatchError("div expects a vector field")
    ks = kspace(field.grid)
    out = sum(1j * ks.k[i] * field.coeffs[i] for i in range(field.grid.d))
    return SpectralField(field.grid, SCALAR, out, field.overflow)


def curl(field: SpectralField) -> SpectralField:
    """3-d: vector curl. 2-d: scalar curl d1 v2 - d2 v1."""
    if field.rank != VECTOR:
        raise RankMismatchError("curl expects a vector field")
    ks = kspace(field.grid)
    c = field.coeffs
    if field.grid.d == 2:
        out = 1j * (ks.k[0] * c[1] - ks.k[1] * c[0])
        return SpectralField(field.grid, SCALAR, out, field.overflow)
    kx, ky, kz = ks.k
    out = np.stack([
        1j * (ky * c[2] - kz * c[1]),
        1j * (kz * c[0] - kx * c[2]),
        1j * (kx * c[1] - ky * c[0]),
    ])
    return SpectralField(field.grid, VECTOR, out, field.overflow)


def leray(field: SpectralField) -> SpectralField:
    """Project onto divergence-free fields: u - k (k.u)/|k|^2."""
    if field.rank != VECTOR:
        raise RankMismatchError("leray expects a vector field")
    ks = kspace(field.grid)
    dot = sum(ks.k[i] * field.coeffs[i] for i in range(field.grid.d))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(ks.k_sq > 0, dot / np.where(ks.k_sq > 0, ks.k_sq, 1.0), 0.0)
    out = np.stack([field.coeffs[i] - ks.k[i] * scale for i in range(field.grid.d)])
    return SpectralField(field.grid, VECTOR, out, field.overflow)


def differential_op(field: SpectralField, which: str) -> SpectralField:
    ops = {"curl": curl, "div": div, "grad": grad, "leray": leray}
    try:
        fn = ops[which]
    except KeyError:
        raise ValueError(f"unknown operator {which!r}") from None
    return fn(field)


def laplacian(field: SpectralField) -> SpectralField:
    ks = kspace(field.grid)
    return field.with_coeffs(field.coeffs * (-ks.k_sq))


def velocity_from_vorticity(omega: SpectralField, alpha: float) -> SpectralField:
    """Biot-Savart composed with the Helmholtz inverse.

    2-d: u_hat = i (k2, -k1) w_hat / (|k|^2 (1 + alpha^2 |k|^2)), which makes
    curl u = (I - alpha^2 Lap)^{-1} w under this module's curl convention.
    3-d: u_hat = i k x w_hat / (|k|^2 (1 + alpha^2 |k|^2)); requires div w = 0.
    """
    grid = omega.grid
    ks = kspace(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(ks.k_sq > 0,
                       1.0 / (np.where(ks.k_sq > 0, ks.k_sq, 1.0)
                              * (1.0 + alpha**2 * ks.k_sq)),
                       0.0)
    if grid.d == 2:
        if omega.rank != SCALAR:
            raise RankMismatchError("2-d vorticity is scalar")
        w = omega.coeffs
        comps = np.stack([
            1j * ks.k[1] * w * inv,
            -1j * ks.k[0] * w * inv,
        ])
        return SpectralField(grid, VECTOR, comps, omega.overflow)
    if omega.rank != VECTOR:
        raise RankMismatchError("3-d vorticity is a vector")
    defect = _div_defect_relative(omega)
    if defect > DIV_TOL:
        raise InvalidVorticityError(
            f"vorticity divergence defect {defect:.3e} exceeds {DIV_TOL:g}"
        )
    kx, ky, kz = ks.k
    w = omega.coeffs
    comps = np.stack([
        1j * (ky * w[2] - kz * w[1]) * inv,
        1j * (kz * w[0] - kx * w[2]) * inv,
        1j * (kx * w[1] - ky * w[0]) * inv,
    ])
    return SpectralField(grid, VECTOR, comps, omega.overflow)


def _div_defect_relative(field: SpectralField) -> float:
    mag = field.mode_magnitude()
    scale = float(np.max(mag)) if mag.size else 0.0
    if scale == 0.0:
        return 0.0
    ks = kspace(field.grid)
    return divergence_defect(field) / (scale * max(1.0, float(np.max(ks.abs_k))))


def vorticity_from_velocity(u: SpectralField, alpha: float) -> SpectralField:
    """w = curl (I - alpha^2 Lap) u; scalar in 2-d, vector in 3-d."""
    ks = kspace(u.grid)
    lifted = u.with_coeffs(u.coeffs * (1.0 + alpha**2 * ks.k_sq))
    return curl(lifted)


def sobolev_norm(field: SpectralField, r: float) -> float:
    ks = kspace(field.grid)
    weight = (1.0 + ks.k_sq) ** r
    total = float(np.sum(weight * field.mode_magnitude() ** 2))
    return math.sqrt(field.grid.measure * total)


def inner_product(f: SpectralField, g: SpectralField) -> float:
    if f.grid != g.grid or f.rank != g.rank:
        raise RankMismatchError("inner product needs matching grids and ranks")
    raw = np.sum(f.coeffs * np.conj(g.coeffs))
    return f.grid.measure * float(np.real(raw))


def sup_norm(field: SpectralField) -> float:
    phys = to_physical(field)
    if field.rank == VECTOR:
        phys = np.sqrt(np.sum(phys**2, axis=0))
    return float(np.max(np.abs(phys)))


def l1_norm(field: SpectralField) -> float:
    phys = to_physical(field)
    if field.rank == VECTOR:
        phys = np.sqrt(np.sum(phys**2, axis=0))
    return float(np.sum(np.abs(phys))) * (TWO_PI / field.grid.n) ** field.grid.d


def advect(a: SpectralField, f: SpectralField) -> SpectralField:
    """Pseudospectral (a . grad) f with 2/3 dealiasing.

    `a` must be a vector field; `f` may be scalar or vector. Covers both the
    transport term (a = velocity) and the stretching term (a = vorticity,
    f = velocity).
    """
    from .spectral import dealias, from_physical

    if a.rank != VECTOR:
        raise RankMismatchError("advecting field must be a vector")
    if a.grid != f.grid:
        raise RankMismatchError("operands live on different grids")
    grid = a.grid
    ks = kspace(grid)
    a_phys = to_physical(a)
    comps = f.coeffs if f.rank == VECTOR else f.coeffs[None]
    out = np.empty(comps.shape)
    for i in range(comps.shape[0]):
        acc = None
        for j in range(grid.d):
            dj = to_physical(SpectralField(grid, SCALAR, 1j * ks.k[j] * comps[i]))
            term = a_phys[j] * dj
            acc = term if acc is None else acc + term
        out[i] = acc
    rank = f.rank
    result = from_physical(grid, out if rank == VECTOR else out[0], rank)
    return dealias(result)


def cross_curl(u: SpectralField, w: SpectralField) -> SpectralField:
    """curl(u x w) in 3-d, dealiased; equals (w.grad)u - (u.grad)w for
    divergence-free inputs but is divergence free to rounding by construction."""
    from .spectral import dealias, from_physical

    if u.grid.d != 3 or u.rank != VECTOR or w.rank != VECTOR:
        raise RankMismatchError("cross_curl needs 3-d vector fields")
    up = to_physical(u)
    wp = to_physical(w)
    cross = np.stack([
        up[1] * wp[2] - up[2] * wp[1],
        up[2] * wp[0] - up[0] * wp[2],
        up[0] * wp[1] - up[1] * wp[0],
    ])
    prod = from_physical(u.grid, cross, VECTOR)
    return dealias(curl(prod))
