"""Dyadic frequency decomposition, Bony paraproducts, Bernstein ratios.

The radial cutoff chi is a smooth bump equal to 1 on |xi| <= 3/4 with
support in |xi| <= 4/3, built from exp(-1/x) transitions, and
phi(xi) = chi(xi/2) - chi(xi). Block q multiplies by phi(2^{-q}|k|).

On the mean-free integer lattice the block range q in [-1, Q] is complete:
S_{-2} = chi(4|k|) vanishes for |k| >= 1, so sum_q Delta_q = Id exactly and
the Bony split reconstructs products exactly. (Starting at q = 0 would drop
the S_0 f Delta_0 g cross terms carried by the |k| = 1 shell, where
chi(1) is strictly between 0 and 1.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientPaddingError, WrongDimensionError, ZeroBlockError
from .gevrey import sup_gradient
from .operators import l1_norm, sobolev_norm, sup_norm
from .spectral import (
    SCALAR,
    VECTOR,
    Grid,
    SpectralField,
    band_limit,
    dealias,
    from_physical,
    kspace,
    multiply,
    to_physical,
)

_LO = 0.75  # chi == 1 inside this radius
_HI = 4.0 / 3.0  # chi == 0 outside this radius


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.where(t < 1.0, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class CutoffPair:
    """Radial cutoff profile pair (chi, phi) with a tabulation resolution."""

    resolution: int = 4096

    def chi(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=np.float64))
        return 1.0 - _smooth_step((r - _LO) / (_HI - _LO))

    def phi(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        return self.chi(r / 2.0) - self.chi(r)

    def tabulate(self, r_max: float = 4.0):
        """Sampled profile values, recorded by lp-check reports."""
        r = np.linspace(0.0, r_max, self.resolution)
        return r, self.chi(r), self.phi(r)


DEFAULT_CUTOFF = CutoffPair()


def q_range(grid: Grid) -> range:
    """Dyadic levels resolving the truncated lattice, lowest first."""
    return range(-1, int(math.ceil(math.log2(grid.k_max))) + 2)


def dyadic_project(u: SpectralField, q: int, kind: str = "delta",
                   cutoff: CutoffPair = DEFAULT_CUTOFF) -> SpectralField:
    """Delta_q u (kind='delta') or S_q u (kind='s')."""
    ks = kspace(u.grid)
    scaled = ks.abs_k / 2.0**q
    if kind == "delta":
        sym = cutoff.phi(scaled)
    elif kind == "s":
        sym = cutoff.chi(scaled)
    else:
        raise ValueError(f"kind must be 'delta' or 's', got {kind!r}")
    return u.with_coeffs(u.coeffs * sym)


@dataclass(frozen=True)
class DyadicBlockSet:
    """All Delta_q blocks of a field plus the (vanishing) low S block."""

    source: SpectralField
    qs: tuple[int, ...]
    blocks: tuple[SpectralField, ...]
    s_low: SpectralField
    cutoff: CutoffPair = field(default=DEFAULT_CUTOFF)

    def block(self, q: int) -> SpectralField:
        try:
            return self.blocks[self.qs.index(q)]
        except ValueError:
            return SpectralField.zeros(self.source.grid, self.source.rank)

    def reconstruct(self) -> SpectralField:
        total = self.s_low.coeffs.copy()
        for b in self.blocks:
            total = total + b.coeffs
        return self.source.with_coeffs(total)


def decompose(u: SpectralField, cutoff: CutoffPair = DEFAULT_CUTOFF) -> DyadicBlockSet:
    qs = tuple(q_range(u.grid))
    blocks = tuple(dyadic_project(u, q, "delta", cutoff) for q in qs)
    s_low = dyadic_project(u, qs[0] - 1, "s", cutoff)
    return DyadicBlockSet(u, qs, blocks, s_low, cutoff)


def bony_decompose(f: SpectralField, g: SpectralField,
                   cutoff: CutoffPair = DEFAULT_CUTOFF):
    """Split fg into (T_f g, T_g f, R(f, g)).

    T_f g = sum_q S_{q-1} f Delta_q g and R = sum_q Delta_q f
    (Delta_{q-1} + Delta_q + Delta_{q+1}) g. The three parts keep the mean
    modes their products generate, so they sum to fg exactly.
    """
    if f.grid != g.grid:
        raise InsufficientPaddingError("operands live on different grids")
    if band_limit(f) + band_limit(g) > f.grid.k_max:
        raise InsufficientPaddingError(
            f"bands {band_limit(f)}+{band_limit(g)} exceed k_max={f.grid.k_max}"
        )
    qs = list(q_range(f.grid))
    fb = {q: dyadic_project(f, q, "delta", cutoff) for q in qs}
    gb = {q: dyadic_project(g, q, "delta", cutoff) for q in qs}
    zero = SpectralField.zeros(f.grid, SCALAR)

    def tilde(blocks, q):
        total = np.zeros_like(zero.coeffs)
        for qq in (q - 1, q, q + 1):
            if qq in blocks:
                total = total + blocks[qq].coeffs
        return zero.with_coeffs(total)

    def para(a, b_blocks):
        total = np.zeros_like(zero.coeffs)
        for q in qs:
            s_part = dyadic_project(a, q - 1, "s", cutoff)
            if not np.any(s_part.coeffs) or not np.any(b_blocks[q].coeffs):
                continue
            total = total + multiply(s_part, b_blocks[q], check_padding=False).coeffs
        return zero.with_coeffs(total)

    t_fg = para(f, gb)
    t_gf = para(g, fb)
    rem = np.zeros_like(zero.coeffs)
    for q in qs:
        if not np.any(fb[q].coeffs):
            continue
        partner = tilde(gb, q)
        if not np.any(partner.coeffs):
            continue
        rem = rem + multiply(fb[q], partner, check_padding=False).coeffs
    return t_fg, t_gf, zero.with_coeffs(rem)


def _lp_norm(field: SpectralField, p) -> float:
    if p == 1:
        return l1_norm(field)
    if p == 2:
        return math.sqrt(field.grid.measure * float(np.sum(field.mode_magnitude() ** 2)))
    if p == math.inf:
        return sup_norm(field)
    raise ValueError(f"supported p values are 1, 2, inf; got {p!r}")


def bernstein_ratio(u: SpectralField, q: int, n: int, p1, p2,
                    cutoff: CutoffPair = DEFAULT_CUTOFF) -> float:
    """Observed constant in the Bernstein inequality on block q.

    Returns ||Lambda^n Delta_q u||_{p2} / (2^{q(n + d(1/p1 - 1/p2))}
    ||Delta_q u||_{p1}).
    """
    if p1 not in (1, 2, math.inf) or p2 not in (1, 2, math.inf):
        raise ValueError("supported p values are 1, 2, inf")
    if p1 > p2:
        raise ValueError("need p1 <= p2")
    block = dyadic_project(u, q, "delta", cutoff)
    denom_norm = _lp_norm(block, p1)
    if denom_norm == 0.0:
        raise ZeroBlockError(f"block q={q} is empty")
    ks = kspace(u.grid)
    deriv = block.with_coeffs(block.coeffs * ks.abs_k**n)
    inv1 = 0.0 if p1 == math.inf else 1.0 / p1
    inv2 = 0.0 if p2 == math.inf else 1.0 / p2
    rate = 2.0 ** (q * (n + u.grid.d * (inv1 - inv2)))
    return _lp_norm(deriv, p2) / (rate * denom_norm)


def h1_product_check(omega: SpectralField, u: SpectralField):
    """Measure ||(omega . grad) u||_{H1} against ||grad u||_inf ||omega||_{H1}.

    Returns (lhs, rhs_factor, ratio); the dimensional constant of the
    product estimate is the survey maximum of `ratio`.
    """
    if omega.grid.d != 3 or u.grid.d != 3:
        raise WrongDimensionError("product check is a d=3 survey")
    if omega.rank != VECTOR or u.rank != VECTOR:
        raise WrongDimensionError("both inputs must be vector fields")
    ks = kspace(u.grid)
    w_phys = to_physical(omega)
    out = np.empty((3,) + (u.grid.n,) * 3)
    for i in range(3):
        acc = None
        for j in range(3):
            dju = to_physical(
                SpectralField(u.grid, SCALAR, 1j * ks.k[j] * u.coeffs[i])
            )
            term = w_phys[j] * dju
            acc = term if acc is None else acc + term
        out[i] = acc
    stretched = dealias(from_physical(u.grid, out, VECTOR))
    lhs = sobolev_norm(stretched, 1.0)
    rhs = sup_gradient(u) * sobolev_norm(omega, 1.0)
    ratio = lhs / rhs if rhs > 0.0 else 0.0
    return lhs, rhs, ratio


def partition_of_unity_defect(grid: Grid,
                              cutoff: CutoffPair = DEFAULT_CUTOFF) -> float:
    """max over resolved lattice xi != 0 of |sum_q phi(2^-q xi) - 1|."""
    ks = kspace(grid)
    nz = ks.trunc_keep & (ks.k_sq > 0)
    radii = ks.abs_k[nz]
    total = np.zeros_like(radii)
    for q in q_range(grid):
        total += cutoff.phi(radii / 2.0**q)
    return float(np.max(np.abs(total - 1.0)))
