"""Pseudospectral second-grade fluid toolkit with Gevrey-radius tracking."""

from .dynamics import (
    DiagnosticsRecord,
    FlowState,
    ModelParams,
    RunContext,
    SimulationResult,
    advance,
    evaluate_rhs,
    nonlinear_rhs,
    run_simulation,
    tau_rhs,
)
from .errors import GevreyflowError
from .gevrey import (
    GevreyNorm,
    RadiusFit,
    XYNorms,
    fit_radius,
    gevrey_norm,
    sup_gradient,
    theorem_floor,
    xy_norms,
)
from .littlewood_paley import (
    CutoffPair,
    DyadicBlockSet,
    bernstein_ratio,
    bony_decompose,
    decompose,
    dyadic_project,
    h1_product_check,
)
from .operators import (
    MultiplierSpec,
    apply_multiplier,
    curl,
    differential_op,
    div,
    grad,
    inner_product,
    leray,
    sobolev_norm,
    velocity_from_vorticity,
    vorticity_from_velocity,
)
from .pairings import (
    PairingReport,
    brute_force_pairing,
    convection_pairing_2d,
    pairings_3d,
    sgn_identity_check,
    t1_t2_pairings_2d,
)
from .snapshots import read_snapshot, write_snapshot
from .spectral import (
    Grid,
    SpectralField,
    dealias,
    from_physical,
    random_divfree_field,
    to_physical,
    transform_roundtrip,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
