"""Vorticity-form dynamics for the three flow models with radius co-evolution.

The linear dissipative term (a diagonal Fourier symbol for every model) is
integrated exactly through an integrating-factor RK4 step; transport and
stretching advance explicitly inside the same stages, and the Gevrey radius
advances alongside them, either stage-coupled (laws A/B), from cached
trajectory functionals (law C), or by closed-form quadrature (law D).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlowUpDetectedError,
    InvalidLawForAlphaError,
    InvalidVorticityError,
    StepRejectedError,
)
from .gevrey import (
    c0_2d,
    c0_3d,
    fit_radius,
    gevrey_norm,
    gevrey_weighted_l2,
    sup_gradient,
    theorem_floor,
    xy_norms,
)
from .operators import (
    advect,
    cross_curl,
    curl,
    sobolev_norm,
    sup_norm,
    velocity_from_vorticity,
)
from .spectral import (
    SCALAR,
    VECTOR,
    SpectralField,
    canonicalize,
    kspace,
    l2_norm,
)

MODELS = ("second_grade", "damped_euler", "navier_stokes")
TAU_LAWS = ("A_2d_big", "B_2d_small", "C_3d_large", "D_small_data",
            "fit_tracking", "frozen")

CFL_LIMIT = 2.8  # RK4 stability radius on the imaginary axis
DIV_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical and calibration parameters for one run."""

    nu: float
    alpha: float = 0.0
    s: float = 1.0
    model: str = "second_grade"
    tau_law: str = "frozen"
    c_cal: float = 1.0
    kappa_cal: float = 1.0
    law_c_running_norm: bool = False
    linear_only: bool = False  # test hook: switch the nonlinearity off

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.tau_law not in TAU_LAWS:
            raise ValueError(f"tau_law must be one of {TAU_LAWS}")
        if self.nu < 0 or self.alpha < 0 or self.s < 1:
            raise ValueError("need nu >= 0, alpha >= 0, s >= 1")

    @property
    def gamma(self) -> float:
        return self.nu / (2.0 + 2.0 * self.alpha**2)

    @property
    def alpha_eff(self) -> float:
        """alpha entering velocity recovery; Euler-type models use alpha=0."""
        return self.alpha if self.model == "second_grade" else 0.0


@dataclass(frozen=True)
class FlowState:
    """Vorticity, current Gevrey radius, and time."""

    omega: SpectralField
    tau: float
    t: float = 0.0

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        grid = self.omega.grid
        if grid.d == 3:
            if self.omega.rank != VECTOR:
                raise InvalidVorticityError("3-d vorticity must be a vector")
            if _div_defect(self.omega) > DIV_TOL:
                raise InvalidVorticityError(
                    f"divergence defect {_div_defect(self.omega):.2e} > {DIV_TOL:g}"
                )
        elif self.omega.rank != SCALAR:
            raise InvalidVorticityError("2-d vorticity must be a scalar")


def _div_defect(omega: SpectralField) -> float:
    ks = kspace(omega.grid)
    dot = sum(ks.k[i] * omega.coeffs[i] for i in range(3))
    mag = float(np.max(omega.mode_magnitude()))
    if mag == 0.0:
        return 0.0
    return float(np.max(np.abs(dot))) / (mag * max(1.0, float(np.max(ks.abs_k))))


@dataclass
class RunContext:
    """Initial-data constants and trajectory accumulators for the tau laws."""

    tau0: float
    m0: float  # Gevrey norm of the initial vorticity at tau0
    omega0_l2: float
    omega0_sup: float
    h1_0: float
    h3_u0: float
    z0: float = math.nan  # d=2: ||L e^{tau0 L^{1/s}} curl u0||^2
    w0: float = math.nan  # d=2: ||e^{tau0 L^{1/s}} Lap curl u0||^2
    x0: float = math.nan  # d=3: componentwise Gevrey norm of omega0
    grad_int: float = 0.0  # int_0^t ||grad u||_inf
    w_int: float = 0.0  # int_0^t W(s) ds
    j_int: float = 0.0  # int_0^t ||w||_H1^2 e^{2 gamma s} / M(s) ds
    last_grad_sup: float = 0.0
    last_w: float = 0.0
    last_j_integrand: float = 0.0
    last_h1: float = 0.0

    def m_growth(self, c_cal: float) -> float:
        """M(t) = exp(c int ||grad u||_inf)."""
        return math.exp(min(c_cal * self.grad_int, 700.0))


def linear_symbol(grid, params: ModelParams) -> np.ndarray:
    """Diagonal symbol of the dissipative term (nonpositive)."""
    ks = kspace(grid)
    if params.model == "second_grade":
        return -params.nu * ks.k_sq / (1.0 + params.alpha**2 * ks.k_sq)
    if params.model == "damped_euler":
        return -params.nu * np.ones_like(ks.k_sq)
    return -params.nu * ks.k_sq


def nonlinear_rhs(omega: SpectralField, params: ModelParams,
                  u: SpectralField | None = None) -> SpectralField:
    """Transport (+ stretching in 3-d), dealiased and mean free.

    In 3-d the combined term is evaluated as curl(u x omega), which equals
    stretching minus transport for divergence-free fields and keeps the
    result divergence free to rounding.
    """
    if params.linear_only:
        return SpectralField.zeros(omega.grid, omega.rank)
    if u is None:
        u = velocity_from_vorticity(omega, params.alpha_eff)
    if omega.grid.d == 2:
        adv = advect(u, omega)
        return adv.with_coeffs(-adv.coeffs)
    return cross_curl(u, omega)


def evaluate_rhs(state: FlowState, params: ModelParams) -> SpectralField:
    """Full time derivative of the vorticity at the given state."""
    omega = state.omega
    if not np.all(np.isfinite(omega.coeffs)):
        raise BlowUpDetectedError(state.t)
    sym = linear_symbol(omega.grid, params)
    nl = nonlinear_rhs(omega, params)
    return omega.with_coeffs(sym * omega.coeffs + nl.coeffs)


def curl_velocity(omega: SpectralField, params: ModelParams) -> SpectralField:
    """curl u = (I - alpha^2 Lap)^{-1} omega (2-d scalar version)."""
    ks = kspace(omega.grid)
    return omega.with_coeffs(
        omega.coeffs / (1.0 + params.alpha_eff**2 * ks.k_sq)
    )


def w_functional(omega: SpectralField, tau: float, params: ModelParams) -> float:
    """W(t) = ||e^{tau L^{1/s}} Lap curl u||^2 for the 2-d law B."""
    g1 = curl_velocity(omega, params)
    return gevrey_weighted_l2(g1, tau, params.s, r=2.0) ** 2


def z_functional(omega: SpectralField, tau: float, params: ModelParams) -> float:
    """Z(t) = ||L e^{tau L^{1/s}} curl u||^2 for the 2-d law B."""
    g1 = curl_velocity(omega, params)
    return gevrey_weighted_l2(g1, tau, params.s, r=1.0) ** 2


def tau_rhs(state: FlowState, params: ModelParams,
            ctx: RunContext | None = None) -> float:
    """Shrink rate of the Gevrey radius under the selected law (<= 0)."""
    law = params.tau_law
    if law in ("frozen", "fit_tracking"):
        return 0.0
    tau = state.tau
    if law == "A_2d_big":
        if params.alpha == 0:
            raise InvalidLawForAlphaError("law A divides by alpha")
        g = gevrey_weighted_l2(state.omega, tau, params.s)
        return -params.c_cal * tau / params.alpha * g
    if law == "B_2d_small":
        if params.nu <= 0:
            raise ValueError("law B needs nu > 0")
        return -params.c_cal * tau**2 / params.nu * w_functional(
            state.omega, tau, params)
    if law == "D_small_data":
        if params.alpha == 0:
            raise InvalidLawForAlphaError("law D divides by alpha")
        m0 = ctx.m0 if ctx is not None else gevrey_weighted_l2(
            state.omega, tau, params.s)
        return (-params.c_cal * params.kappa_cal * m0
                * math.exp(-params.gamma * state.t / 2.0)
                * tau / params.alpha)
    if law == "C_3d_large":
        if params.alpha == 0:
            raise InvalidLawForAlphaError("law C divides by alpha")
        if ctx is None:
            raise ValueError("law C needs a RunContext")
        c = params.c_cal
        a = params.alpha
        m_t = ctx.m_growth(c)
        x_ref = ctx.x0
        if params.law_c_running_norm:
            x_ref = xy_norms(state.omega, tau, params.s).x
        apriori = m_t * math.exp(-2.0 * params.gamma * state.t) * (
            x_ref + c / a * (1.0 + ctx.tau0) * ctx.j_int
        )
        return -(c * tau * ctx.last_grad_sup
                 + c * tau**2 / a * ctx.last_h1
                 + c * tau**2 / a * apriori)
    raise ValueError(f"unknown tau law {law!r}")


def _tau_law_d_closed_form(t: float, params: ModelParams, ctx: RunContext) -> float:
    """tau(t) = tau0 exp(-kappa M0 int_0^t e^{-gamma s / 2} ds / alpha)."""
    gamma = params.gamma
    if gamma > 0:
        integral = 2.0 / gamma * (1.0 - math.exp(-gamma * t / 2.0))
    else:
        integral = t
    rate = params.c_cal * params.kappa_cal * ctx.m0 / params.alpha
    return ctx.tau0 * math.exp(-rate * integral)


def make_context(state: FlowState, params: ModelParams) -> RunContext:
    omega = state.omega
    u0 = velocity_from_vorticity(omega, params.alpha_eff)
    ctx = RunContext(
        tau0=state.tau,
        m0=gevrey_weighted_l2(omega, state.tau, params.s),
        omega0_l2=l2_norm(omega),
        omega0_sup=sup_norm(omega),
        h1_0=sobolev_norm(omega, 1.0),
        h3_u0=sobolev_norm(u0, 3.0),
    )
    ctx.last_grad_sup = sup_gradient(u0)
    ctx.last_h1 = ctx.h1_0
    ctx.last_j_integrand = ctx.h1_0**2
    if omega.grid.d == 2:
        ctx.z0 = z_functional(omega, state.tau, params)
        ctx.w0 = w_functional(omega, state.tau, params)
        ctx.last_w = ctx.w0
    else:
        ctx.x0 = xy_norms(omega, state.tau, params.s).x
    return ctx


def advance(state: FlowState, params: ModelParams, dt: float,
            ctx: RunContext | None = None) -> FlowState:
    """One integrating-factor RK4 step of (omega, tau).

    The dissipative symbol is applied through its exact exponential; the
    explicit part must satisfy dt * max|u| * k_cut <= CFL_LIMIT or the step
    is rejected with a suggested dt.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    omega = state.omega
    grid = omega.grid
    u = velocity_from_vorticity(omega, params.alpha_eff)
    if not params.linear_only:
        umax = sup_norm(u)
        k_cut = grid.dealias_cutoff
        if dt * umax * k_cut > CFL_LIMIT:
            raise StepRejectedError(dt, 0.5 * CFL_LIMIT / (umax * k_cut))

    sym = linear_symbol(grid, params)
    e_half = np.exp(0.5 * dt * sym)
    e_full = e_half * e_half
    w = omega.coeffs

    def nl(coeffs, u_pre=None):
        fld = SpectralField(grid, omega.rank, coeffs)
        return nonlinear_rhs(fld, params, u=u_pre).coeffs

    n1 = nl(w, u_pre=u)
    s2 = e_half * (w + 0.5 * dt * n1)
    n2 = nl(s2)
    s3 = e_half * w + 0.5 * dt * n2
    n3 = nl(s3)
    s4 = e_full * w + dt * e_half * n3
    n4 = nl(s4)
    w_next = e_full * w + dt / 6.0 * (e_full * n1 + 2.0 * e_half * (n2 + n3) + n4)
    w_next = canonicalize(grid, omega.rank, w_next)
    if not np.all(np.isfinite(w_next)):
        raise BlowUpDetectedError(state.t + dt)

    law = params.tau_law
    if law in ("frozen", "fit_tracking"):
        tau_next = state.tau
    elif law == "D_small_data":
        run_ctx = ctx if ctx is not None else make_context(state, params)
        tau_next = _tau_law_d_closed_form(state.t + dt, params, run_ctx)
    else:
        half_t = state.t + 0.5 * dt

        def stage(coeffs, tau, t):
            return FlowState(SpectralField(grid, omega.rank, coeffs),
                             max(tau, 0.0), t)

        l1 = tau_rhs(state, params, ctx)
        l2 = tau_rhs(stage(s2, state.tau + 0.5 * dt * l1, half_t), params, ctx)
        l3 = tau_rhs(stage(s3, state.tau + 0.5 * dt * l2, half_t), params, ctx)
        l4 = tau_rhs(stage(s4, state.tau + dt * l3, state.t + dt), params, ctx)
        tau_next = max(state.tau + dt / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4), 0.0)

    next_field = SpectralField(grid, omega.rank, w_next)
    return FlowState(next_field, tau_next, state.t + dt)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time sample of norms, radii, and theorem floors."""

    t: float
    l2: float
    h1: float
    gevrey_log: float
    gevrey_value: float
    x_norm: float
    y_norm: float
    tau_law: float
    tau_fit: float
    floor: float
    grad_sup: float
    grad_int: float
    z_val: float
    w_val: float
    w_int: float
    tail_frac: float
    under_resolved: bool
    overflow: bool
    flags: tuple[str, ...] = ()


CSV_COLUMNS = (
    "t", "l2", "h1", "gevrey_log", "gevrey_value", "x_norm", "y_norm",
    "tau_law", "tau_fit", "floor", "grad_sup", "grad_int", "z_val", "w_val",
    "w_int", "tail_frac", "under_resolved", "overflow", "flags",
)

TAIL_FRACTION_LIMIT = 1e-3


def tail_fraction(omega: SpectralField) -> float:
    """Energy fraction carried by the top third of resolved shells."""
    ks = kspace(omega.grid)
    cut = omega.grid.dealias_cutoff
    mag_sq = omega.mode_magnitude() ** 2
    total = float(np.sum(mag_sq))
    if total == 0.0:
        return 0.0
    tail = float(np.sum(mag_sq[ks.abs_k > (2.0 / 3.0) * cut]))
    return tail / total


def law_floor(params: ModelParams, ctx: RunContext) -> float:
    """Closed-form floor matching the active tau law, nan if none applies."""
    law = params.tau_law
    try:
        if law == "A_2d_big":
            return theorem_floor("A", tau0=ctx.tau0, m0=ctx.m0,
                                 alpha=params.alpha, nu=params.nu,
                                 c_cal=params.c_cal)
        if law == "B_2d_small":
            c0 = c0_2d(ctx.z0, ctx.w0, ctx.h3_u0, params.nu, params.c_cal)
            return theorem_floor("B", tau0=ctx.tau0, c0=c0)
        if law == "C_3d_large":
            c0 = c0_3d(ctx.h1_0, ctx.x0, ctx.tau0, params.nu, params.alpha,
                       params.c_cal)
            return theorem_floor("C", tau0=ctx.tau0, c0=c0,
                                 grad_int=ctx.grad_int, c_cal=params.c_cal)
        if law == "D_small_data":
            return theorem_floor("D", tau0=ctx.tau0, m0=ctx.m0,
                                 alpha=params.alpha, nu=params.nu,
                                 kappa_cal=params.kappa_cal)
    except (ZeroDivisionError, OverflowError):
        return math.nan
    return math.nan


def build_record(state: FlowState, params: ModelParams,
                 ctx: RunContext) -> DiagnosticsRecord:
    omega = state.omega
    flags: list[str] = []
    gn = gevrey_norm(omega, state.tau, params.s)
    if gn.overflow:
        flags.append("gevrey_overflow")
    if omega.grid.d == 3:
        xy = xy_norms(omega, state.tau, params.s)
        x_norm, y_norm = xy.x, xy.y
        z_val = w_val = math.nan
    else:
        x_norm = y_norm = math.nan
        z_val = z_functional(omega, state.tau, params)
        w_val = w_functional(omega, state.tau, params)
    try:
        tau_fit = fit_radius(omega, params.s).tau_fit
    except Exception:
        tau_fit = math.nan
        flags.append("fit_failed")
    frac = tail_fraction(omega)
    under = frac > TAIL_FRACTION_LIMIT
    if under:
        flags.append("under_resolved")
    u = velocity_from_vorticity(omega, params.alpha_eff)
    return DiagnosticsRecord(
        t=state.t,
        l2=l2_norm(omega),
        h1=sobolev_norm(omega, 1.0),
        gevrey_log=gn.log,
        gevrey_value=gn.value,
        x_norm=x_norm,
        y_norm=y_norm,
        tau_law=state.tau,
        tau_fit=tau_fit,
        floor=law_floor(params, ctx),
        grad_sup=sup_gradient(u),
        grad_int=ctx.grad_int,
        z_val=z_val,
        w_val=w_val,
        w_int=ctx.w_int,
        tail_frac=frac,
        under_resolved=under,
        overflow=gn.overflow or omega.overflow,
        flags=tuple(flags),
    )


@dataclass
class SimulationResult:
    records: list[DiagnosticsRecord]
    final_state: FlowState
    ctx: RunContext
    sampled_states: list[FlowState] | None = None


def default_dt(state: FlowState, params: ModelParams) -> float:
    u = velocity_from_vorticity(state.omega, params.alpha_eff)
    umax = sup_norm(u)
    if umax <= 0:
        return 1e-3
    return min(1e-3, 0.5 / (state.omega.grid.n * umax))


def run_simulation(initial: FlowState, params: ModelParams, t_end: float,
                   dt: float | None = None, sample_every: int = 1,
                   keep_states: bool = False) -> SimulationResult:
    """Uniform-step trajectory with fully populated diagnostics records.

    Diagnostics accumulators (grad, W, and the law-C double integral) are
    advanced by trapezoid per accepted step; records are emitted at t = 0,
    every `sample_every` steps, and at t_end.
    """
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    ctx = make_context(initial, params)
    records = [build_record(initial, params, ctx)]
    states = [initial] if keep_states else None
    if t_end == 0:
        return SimulationResult(records, initial, ctx, states)
    if dt is None:
        dt = default_dt(initial, params)
    n_steps = max(1, round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        n_steps = max(1, math.ceil(t_end / dt - 1e-12))
        dt = t_end / n_steps

    state = initial
    gamma = params.gamma
    for step in range(1, n_steps + 1):
        try:
            state = advance(state, params, dt, ctx)
        except BlowUpDetectedError:
            raise
        u = velocity_from_vorticity(state.omega, params.alpha_eff)
        gs = sup_gradient(u)
        ctx.grad_int += 0.5 * dt * (ctx.last_grad_sup + gs)
        ctx.last_grad_sup = gs
        h1 = sobolev_norm(state.omega, 1.0)
        ctx.last_h1 = h1
        if state.omega.grid.d == 2:
            w_now = w_functional(state.omega, state.tau, params)
            ctx.w_int += 0.5 * dt * (ctx.last_w + w_now)
            ctx.last_w = w_now
        if params.tau_law == "C_3d_large":
            m_t = ctx.m_growth(params.c_cal)
            integrand = h1**2 * math.exp(min(2.0 * gamma * state.t, 700.0)) / m_t
            ctx.j_int += 0.5 * dt * (ctx.last_j_integrand + integrand)
            ctx.last_j_integrand = integrand
        if step % sample_every == 0 or step == n_steps:
            records.append(build_record(state, params, ctx))
            if keep_states:
                states.append(state)
    return SimulationResult(records, state, ctx, states)
