"""Named initial-data presets used by scenarios and tests."""

from __future__ import annotations

import math

import numpy as np

from .operators import vorticity_from_velocity
from .spectral import (
    SCALAR,
    VECTOR,
    Grid,
    SpectralField,
    from_physical,
    physical_mesh,
    random_divfree_field,
)


def exp_profile(amplitude: float, radius: float, s: float = 1.0):
    """Per-mode amplitude profile amplitude * exp(-radius |k|^{1/s})."""

    def profile(absk: np.ndarray) -> np.ndarray:
        return amplitude * np.exp(-radius * absk ** (1.0 / s))

    return profile


def flat_profile(amplitude: float = 1.0):
    def profile(absk: np.ndarray) -> np.ndarray:
        return amplitude * np.ones_like(absk)

    return profile


def taylor_green_velocity(grid: Grid) -> SpectralField:
    """u = (sin x1 cos x2, -cos x1 sin x2) on the 2-torus."""
    if grid.d != 2:
        raise ValueError("Taylor-Green preset is two-dimensional")
    x, y = physical_mesh(grid)
    values = np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)])
    return from_physical(grid, values, VECTOR)


def taylor_green_vorticity(grid: Grid, alpha: float) -> SpectralField:
    """curl (I - alpha^2 Lap) of the Taylor-Green velocity: an exact
    eigenfield whose transport term vanishes identically."""
    return vorticity_from_velocity(taylor_green_velocity(grid), alpha)


def random_analytic_vorticity(grid: Grid, seed: int, amplitude: float,
                              radius: float, s: float = 1.0,
                              k_band: int | None = None) -> SpectralField:
    """Random vorticity with exact e^{-radius |k|^{1/s}} mode amplitudes;
    scalar in 2-d, divergence-free vector in 3-d."""
    rank = SCALAR if grid.d == 2 else VECTOR
    return random_divfree_field(grid, exp_profile(amplitude, radius, s),
                                seed, rank, k_band)


def random_analytic_velocity(grid: Grid, seed: int, amplitude: float,
                             radius: float, s: float = 1.0,
                             k_band: int | None = None) -> SpectralField:
    return random_divfree_field(grid, exp_profile(amplitude, radius, s),
                                seed, VECTOR, k_band)


def bardos_titi_velocity(grid: Grid) -> SpectralField:
    """Shear flow u = (sin x2, 0, sin x1): exact 3-d Euler data whose
    analyticity radius decays for all time."""
    if grid.d != 3:
        raise ValueError("shear preset is three-dimensional")
    x1, x2, _ = physical_mesh(grid)
    values = np.stack([np.sin(x2), np.zeros_like(x1), np.sin(x1)])
    return from_physical(grid, values, VECTOR)


def bardos_titi_exact_vorticity(grid: Grid, t: float) -> SpectralField:
    """curl of the exact shear solution u = (sin x2, 0, sin(x1 - t sin x2))."""
    if grid.d != 3:
        raise ValueError("shear preset is three-dimensional")
    x1, x2, _ = physical_mesh(grid)
    theta = x1 - t * np.sin(x2)
    w1 = -t * np.cos(x2) * np.cos(theta)
    w2 = -np.cos(theta)
    w3 = -np.cos(x2)
    return from_physical(grid, np.stack([w1, w2, w3]), VECTOR)


def scale_to_l2(field: SpectralField, target_l2: float) -> SpectralField:
    """Rescale so the L2 norm equals target_l2 exactly."""
    from .spectral import l2_norm

    current = l2_norm(field)
    if current == 0.0:
        raise ValueError("cannot scale the zero field")
    return field.with_coeffs(field.coeffs * (target_l2 / current))
