"""Spectral representation of mean-free periodic fields on [0, 2pi]^d.

Fields are stored as full complex coefficient arrays in numpy FFT layout,
normalised so that v(x) = sum_k v_hat(k) exp(i k.x) with integer wavenumbers.
Every public operation returns fields that are mean free, Hermitian symmetric
(the physical field is real), and truncated to |k_i| <= N/2 - 1 so each
retained mode has its mirror on the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    InsufficientPaddingError,
    InvalidBandError,
    InvalidGridError,
    RankMismatchError,
)

TWO_PI = 2.0 * np.pi

SCALAR = "scalar"
VECTOR = "vector"


@dataclass(frozen=True)
class Grid:
    """Uniform N^d collocation grid on the periodic box [0, 2pi]^d."""

    d: int
    n: int

    def __post_init__(self):
        if self.d not in (2, 3):
            raise InvalidGridError(f"d must be 2 or 3, got {self.d}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise InvalidGridError(f"n must be a power of two >= 8, got {self.n}")

    @property
    def k_max(self) -> int:
        return self.n // 2 - 1

    @property
    def dealias_cutoff(self) -> int:
        return self.n // 3

    @property
    def measure(self) -> float:
        return TWO_PI**self.d


class KSpace:
    """Cached wavenumber meshes and masks for one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        n, d = grid.n, grid.d
        k1d = np.fft.fftfreq(n, 1.0 / n).astype(np.float64)
        shapes = [(1,) * ax + (n,) + (1,) * (d - ax - 1) for ax in range(d)]
        self.k_axes = [k1d.reshape(s) for s in shapes]
        self.k = [np.broadcast_to(ka, (n,) * d) for ka in self.k_axes]
        self.k_sq = sum(ka**2 for ka in self.k_axes)
        self.abs_k = np.sqrt(self.k_sq)
        km = grid.k_max
        self.trunc_keep = np.ones((n,) * d, dtype=bool)
        for ka in self.k_axes:
            self.trunc_keep &= np.abs(ka) <= km
        cut = grid.dealias_cutoff
        self.dealias_keep = np.ones((n,) * d, dtype=bool)
        for ka in self.k_axes:
            self.dealias_keep &= np.abs(ka) <= cut
        # one of each +-k pair: first nonzero component positive
        pos = np.zeros((n,) * d, dtype=bool)
        prev_zero = np.ones((n,) * d, dtype=bool)
        for ka in self.k:
            pos |= prev_zero & (ka > 0)
            prev_zero &= ka == 0
        self.half_lattice = pos & self.trunc_keep


_KSPACE_CACHE: dict[tuple[int, int], KSpace] = {}


def kspace(grid: Grid) -> KSpace:
    key = (grid.d, grid.n)
    if key not in _KSPACE_CACHE:
        _KSPACE_CACHE[key] = KSpace(grid)
    return _KSPACE_CACHE[key]


def _reflect(coeffs: np.ndarray, d: int) -> np.ndarray:
    """Return c(-k) in FFT layout: flip each transform axis, then roll by one."""
    axes = tuple(range(coeffs.ndim - d, coeffs.ndim))
    out = np.flip(coeffs, axis=axes)
    return np.roll(out, shift=(1,) * d, axis=axes)


@dataclass(frozen=True)
class SpectralField:
    """Immutable Fourier-side field: scalar or d-component vector."""

    grid: Grid
    rank: str
    coeffs: np.ndarray
    overflow: bool = False

    def __post_init__(self):
        expected = self.expected_shape(self.grid, self.rank)
        if self.coeffs.shape != expected:
            raise InvalidGridError(
                f"coefficient shape {self.coeffs.shape} does not match {expected}"
            )
        self.coeffs.setflags(write=False)

    @staticmethod
    def expected_shape(grid: Grid, rank: str) -> tuple[int, ...]:
        base = (grid.n,) * grid.d
        if rank == SCALAR:
            return base
        if rank == VECTOR:
            return (grid.d,) + base
        raise RankMismatchError(f"unknown rank {rank!r}")

    @classmethod
    def zeros(cls, grid: Grid, rank: str = SCALAR) -> "SpectralField":
        shape = cls.expected_shape(grid, rank)
        return cls(grid, rank, np.zeros(shape, dtype=np.complex128))

    @classmethod
    def build(cls, grid: Grid, rank: str, coeffs: np.ndarray,
              drop_mean: bool = True) -> "SpectralField":
        """Construct from untrusted coefficients, restoring all invariants."""
        arr = np.array(coeffs, dtype=np.complex128, copy=True)
        arr = canonicalize(grid, rank, arr, drop_mean=drop_mean)
        return cls(grid, rank, arr)

    def with_coeffs(self, coeffs: np.ndarray, overflow: bool | None = None) -> "SpectralField":
        ov = self.overflow if overflow is None else overflow
        return SpectralField(self.grid, self.rank, coeffs, ov)

    def component(self, i: int) -> np.ndarray:
        if self.rank != VECTOR:
            raise RankMismatchError("component access needs a vector field")
        return self.coeffs[i]

    def mode_magnitude(self) -> np.ndarray:
        """Per-mode magnitude; vector fields use the l2 norm over components."""
        if self.rank == SCALAR:
            return np.abs(self.coeffs)
        return np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=0))


def canonicalize(grid: Grid, rank: str, coeffs: np.ndarray,
                 drop_mean: bool = True) -> np.ndarray:
    """Zero the mean, truncate the Nyquist modes, enforce Hermitian symmetry."""
    ks = kspace(grid)
    coeffs = coeffs * ks.trunc_keep
    mirror = np.conj(_reflect(coeffs, grid.d))
    coeffs = 0.5 * (coeffs + mirror)
    if drop_mean:
        zero = (0,) * grid.d
        if rank == SCALAR:
            coeffs[zero] = 0.0
        else:
            coeffs[(slice(None),) + zero] = 0.0
    return coeffs


def hermitian_defect(field: SpectralField) -> float:
    mirror = np.conj(_reflect(field.coeffs, field.grid.d))
    return float(np.max(np.abs(field.coeffs - mirror)))


def to_physical(field: SpectralField) -> np.ndarray:
    """Collocation samples of the field; imaginary part is discarded."""
    n, d = field.grid.n, field.grid.d
    axes = tuple(range(-d, 0))
    return np.real(np.fft.ifftn(field.coeffs, axes=axes)) * n**d


def realness_defect(field: SpectralField) -> float:
    n, d = field.grid.n, field.grid.d
    axes = tuple(range(-d, 0))
    return float(np.max(np.abs(np.imag(np.fft.ifftn(field.coeffs, axes=axes)))) * n**d)


def from_physical(grid: Grid, values: np.ndarray, rank: str = SCALAR,
                  drop_mean: bool = True) -> SpectralField:
    expected = SpectralField.expected_shape(grid, rank)
    if values.shape != expected:
        raise InvalidGridError(
            f"sample shape {values.shape} does not match {expected}"
        )
    d = grid.d
    axes = tuple(range(-d, 0))
    coeffs = np.fft.fftn(values, axes=axes) / grid.n**d
    coeffs = canonicalize(grid, rank, coeffs, drop_mean=drop_mean)
    return SpectralField(grid, rank, coeffs)


def physical_mesh(grid: Grid) -> list[np.ndarray]:
    x = np.linspace(0.0, TWO_PI, grid.n, endpoint=False)
    return list(np.meshgrid(*([x] * grid.d), indexing="ij"))


def transform_roundtrip(field: SpectralField) -> SpectralField:
    """Inverse transform to collocation points, then transform back."""
    values = to_physical(field)
    return from_physical(field.grid, values, field.rank)


def dealias(field: SpectralField) -> SpectralField:
    """2/3-rule truncation: zero every mode with any |k_i| > floor(N/3)."""
    keep = kspace(field.grid).dealias_keep
    return field.with_coeffs(field.coeffs * keep)


def band_limit(field: SpectralField) -> int:
    """Largest |k_i| carrying a nonzero coefficient (0 for the zero field)."""
    mag = field.mode_magnitude()
    nz = mag > 0.0
    if not nz.any():
        return 0
    ks = kspace(field.grid)
    return int(max(np.max(np.abs(ka)[nz]) for ka in ks.k))


def l2_norm_sq(field: SpectralField) -> float:
    return field.grid.measure * float(np.sum(np.abs(field.coeffs) ** 2))


def l2_norm(field: SpectralField) -> float:
    return float(np.sqrt(l2_norm_sq(field)))


def parseval_gap(field: SpectralField) -> float:
    """Relative gap between the collocation and spectral L2 sums."""
    grid = field.grid
    phys = to_physical(field)
    lhs = float(np.sum(phys**2)) * (TWO_PI / grid.n) ** grid.d
    rhs = l2_norm_sq(field)
    scale = max(lhs, rhs, 1e-300)
    return abs(lhs - rhs) / scale


def multiply(f: SpectralField, g: SpectralField, drop_mean: bool = False,
             check_padding: bool = True) -> SpectralField:
    """Pointwise product of two scalar fields, exact for padded bands.

    The product of trig polynomials with band_limit(f) + band_limit(g)
    <= k_max is represented exactly on the grid; wider inputs alias, which
    `check_padding` turns into an error instead of silent corruption.
    """
    if f.rank != SCALAR or g.rank != SCALAR:
        raise RankMismatchError("multiply expects scalar fields")
    if f.grid != g.grid:
        raise InvalidGridError("operands live on different grids")
    if check_padding:
        bf, bg = band_limit(f), band_limit(g)
        if bf + bg > f.grid.k_max:
            raise InsufficientPaddingError(
                f"bands {bf}+{bg} exceed k_max={f.grid.k_max}"
            )
    values = to_physical(f) * to_physical(g)
    return from_physical(f.grid, values, SCALAR, drop_mean=drop_mean)


def random_divfree_field(grid: Grid, spectrum: Callable[[np.ndarray], np.ndarray],
                         seed: int, rank: str = SCALAR,
                         k_band: int | None = None) -> SpectralField:
    """Reproducible random field with per-mode amplitude spectrum(|k|).

    Phases are uniform per independent half-lattice mode and mirrored for
    Hermitian symmetry, so every mode magnitude equals the profile exactly.
    Vector fields are pointwise orthogonal to k (divergence free).
    """
    ks = kspace(grid)
    if k_band is None:
        k_band = grid.dealias_cutoff
    if k_band > grid.dealias_cutoff or k_band < 1:
        raise InvalidBandError(
            f"k_band={k_band} outside [1, {grid.dealias_cutoff}]"
        )
    sel = ks.half_lattice & (ks.abs_k <= k_band)
    idx = np.nonzero(sel)
    radii = ks.abs_k[idx]
    amps = np.asarray(spectrum(radii), dtype=np.float64)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, TWO_PI, radii.size)
    phase = np.exp(1j * theta)

    shape = (grid.n,) * grid.d
    if rank == SCALAR:
        coeffs = np.zeros(shape, dtype=np.complex128)
        coeffs[idx] = amps * phase
        coeffs = coeffs + np.conj(_reflect(coeffs, grid.d))
        return SpectralField(grid, SCALAR, coeffs)

    if rank != VECTOR:
        raise RankMismatchError(f"unknown rank {rank!r}")
    kvec = np.stack([ka[idx] for ka in ks.k], axis=1)
    if grid.d == 2:
        norm = np.sqrt(np.sum(kvec**2, axis=1))
        basis = np.stack([-kvec[:, 1], kvec[:, 0]], axis=1) / norm[:, None]
        modes = basis * (amps * phase)[:, None]
    else:
        along_x = (kvec[:, 1] == 0) & (kvec[:, 2] == 0)
        ref = np.where(along_x[:, None], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0])
        e1 = np.cross(kvec, ref)
        e1 /= np.linalg.norm(e1, axis=1)[:, None]
        e2 = np.cross(kvec, e1)
        e2 /= np.linalg.norm(e2, axis=1)[:, None]
        # one Gram-Schmidt pass keeps k.e at the eps^2 level
        ksq = np.sum(kvec**2, axis=1)
        for e in (e1, e2):
            e -= kvec * (np.sum(e * kvec, axis=1) / ksq)[:, None]
            e /= np.linalg.norm(e, axis=1)[:, None]
        psi = rng.uniform(0.0, TWO_PI, radii.size)
        direction = np.cos(psi)[:, None] * e1 + np.sin(psi)[:, None] * e2
        modes = direction * (amps * phase)[:, None]
    coeffs = np.zeros((grid.d,) + shape, dtype=np.complex128)
    for i in range(grid.d):
        comp = np.zeros(shape, dtype=np.complex128)
        comp[idx] = modes[:, i]
        coeffs[i] = comp + np.conj(_reflect(comp, grid.d))
    return SpectralField(grid, VECTOR, coeffs)


def divergence_defect(field: SpectralField) -> float:
    """max_k |k . u_hat(k)| for a vector field."""
    if field.rank != VECTOR:
        raise RankMismatchError("divergence defect needs a vector field")
    ks = kspace(field.grid)
    dot = sum(ks.k[i] * field.coeffs[i] for i in range(field.grid.d))
    return float(np.max(np.abs(dot)))


def embed(field: SpectralField, target: Grid) -> SpectralField:
    """Copy coefficients, mode by mode, onto a finer grid of the same d."""
    grid = field.grid
    if target.d != grid.d:
        raise InvalidGridError("embedding requires matching dimension")
    if target.n < grid.n:
        raise InvalidGridError("target grid must be at least as fine")
    km = grid.k_max
    src_order = (np.arange(-km, km + 1) % grid.n).astype(np.intp)
    dst_order = (np.arange(-km, km + 1) % target.n).astype(np.intp)
    src_idx = np.ix_(*([src_order] * grid.d))
    dst_idx = np.ix_(*([dst_order] * grid.d))
    shape = SpectralField.expected_shape(target, field.rank)
    out = np.zeros(shape, dtype=np.complex128)
    if field.rank == SCALAR:
        out[dst_idx] = field.coeffs[src_idx]
    else:
        for c in range(grid.d):
            out[c][dst_idx] = field.coeffs[c][src_idx]
    return SpectralField(target, field.rank, out, field.overflow)
