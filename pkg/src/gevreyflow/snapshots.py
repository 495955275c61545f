"""Binary snapshot format for flow states.

Layout (all little endian):
  magic   "GVRF" (4 bytes)
  version u16 (currently 1)
  d, n, rank_code      u64 x 3   (rank_code: 0 scalar, 1 vector)
  s, tau, t, nu, alpha f64 x 5
  payload: retained coefficients in lexicographic k order, each mode as
           (re, im) f64 pairs, vector components interleaved per mode last
           axis first (component-major blocks)
  checksum: 8-byte BLAKE2b digest of the payload
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .dynamics import FlowState, ModelParams
from .errors import ChecksumError, SnapshotFormatError
from .spectral import SCALAR, VECTOR, Grid, SpectralField

MAGIC = b"GVRF"
VERSION = 1
_HEADER = struct.Struct("<4sHQQQddddd")


def _lex_index(grid: Grid) -> tuple[np.ndarray, ...]:
    """Fancy index putting coefficients into lexicographic k order."""
    km = grid.k_max
    order = (np.arange(-km, km + 1) % grid.n).astype(np.intp)
    grids = np.meshgrid(*([order] * grid.d), indexing="ij")
    return tuple(grids)


def _payload(field: SpectralField) -> bytes:
    idx = _lex_index(field.grid)
    comps = field.coeffs if field.rank == VECTOR else field.coeffs[None]
    parts = []
    for c in range(comps.shape[0]):
        lex = comps[c][idx]
        inter = np.empty(lex.shape + (2,), dtype="<f8")
        inter[..., 0] = lex.real
        inter[..., 1] = lex.imag
        parts.append(inter.tobytes())
    return b"".join(parts)


def _digest(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=8).digest()


def write_snapshot(path, state: FlowState, params: ModelParams) -> None:
    field = state.omega
    grid = field.grid
    rank_code = 0 if field.rank == SCALAR else 1
    header = _HEADER.pack(MAGIC, VERSION, grid.d, grid.n, rank_code,
                          params.s, state.tau, state.t, params.nu,
                          params.alpha)
    payload = _payload(field)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(_digest(payload))


def read_snapshot(path) -> tuple[FlowState, dict]:
    """Returns the stored state and a metadata dict (s, nu, alpha)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size + 8:
        raise SnapshotFormatError("file shorter than header + checksum")
    magic, version, d, n, rank_code, s, tau, t, nu, alpha = _HEADER.unpack(
        raw[: _HEADER.size])
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported version {version}")
    grid = Grid(int(d), int(n))
    rank = SCALAR if rank_code == 0 else VECTOR
    n_comp = 1 if rank == SCALAR else grid.d
    span = 2 * grid.k_max + 1
    expected = n_comp * span**grid.d * 16
    payload = raw[_HEADER.size: _HEADER.size + expected]
    if len(payload) != expected:
        raise SnapshotFormatError(
            f"payload truncated: {len(payload)} of {expected} bytes"
        )
    stored = raw[_HEADER.size + expected: _HEADER.size + expected + 8]
    if len(stored) != 8 or stored != _digest(payload):
        raise ChecksumError("payload checksum mismatch")

    flat = np.frombuffer(payload, dtype="<f8").reshape(n_comp, span**grid.d, 2)
    lex = (flat[..., 0] + 1j * flat[..., 1]).reshape((n_comp,) + (span,) * grid.d)
    idx = _lex_index(grid)
    coeffs = np.zeros((n_comp,) + (grid.n,) * grid.d, dtype=np.complex128)
    for c in range(n_comp):
        coeffs[c][idx] = lex[c]
    field = SpectralField(grid, rank, coeffs if rank == VECTOR else coeffs[0])
    state = FlowState(field, float(tau), float(t))
    return state, {"s": float(s), "nu": float(nu), "alpha": float(alpha)}
