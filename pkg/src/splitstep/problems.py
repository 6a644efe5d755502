"""Model problems split into operators with cheap or closed-form flows.

Two reaction-diffusion systems are built in:

* Gray-Scott:  u_t = c1*Lap(u) - u*v^2 + alpha*(1 - u),
               v_t = c2*Lap(v) + u*v^2 - beta*v.
  Two-operator split: A collects diffusion, the linear decay and the
  constant feed (an affine operator, diagonal in Fourier space except for
  the forced mean mode); B is the pointwise reaction (-u*v^2, u*v^2),
  propagated by classical RK4 substeps.  A three-operator variant splits
  the reaction once more into two pieces with closed-form flows.

* A van der Pol type system:  u_t = du*Lap(u) + v,
               v_t = dv*Lap(v) + ((1 - u^2)*v - u)/eps.
  A couples the components linearly (per-mode 2x2 exponential); B is the
  pointwise damping v <- v*exp(-u^2*t/eps).

A linear diagnostic problem (diffusion plus a multiplicative potential)
provides exact flows for oracle tests; with a constant potential the two
operators commute and every consistent splitting is exact.

All flows take a (possibly complex) time first: ``flow(t, field)``.
Diffusive flows refuse Re(t) < 0, which would amplify high modes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import BlowUpError, RepresentationError, UnstableStepError, UnderResolvedWarning
from .spectral import (
    MODAL,
    NODAL,
    Field,
    TorusGrid,
    _k_sq,
    dealias_23,
    modal_tail_fraction,
    to_modal,
    to_nodal,
)

__all__ = [
    "GrayScottParams",
    "VdpParams",
    "SplitProblem",
    "gray_scott_problem",
    "gray_scott_abc_problem",
    "van_der_pol_problem",
    "linear_problem",
    "gs_commutator",
    "gs_reaction_jacobian",
    "initial_condition",
    "PRESETS",
]

Flow = Callable[[complex, Field], Field]
Rhs = Callable[[Field], Field]


@dataclass(frozen=True)
class GrayScottParams:
    """Feed rate alpha, kill rate beta, diffusivities c1 (u) and c2 (v)."""

    alpha: float = 0.038
    beta: float = 0.114
    c1: float = 0.04
    c2: float = 0.005


@dataclass(frozen=True)
class VdpParams:
    """Stiffness eps and the two diffusivities."""

    eps: float = 1e-3
    du: float = 1.0
    dv: float = 1.0


@dataclass(frozen=True)
class SplitProblem:
    """A right-hand side split into 2 or 3 operators.

    ``flows[i]`` propagates operator i exactly or by an inner method;
    ``rhs[i]`` evaluates the operator itself (used by diagnostics and
    oracle tests).  ``m`` is the component count of admissible states.
    """

    name: str
    flows: tuple
    rhs: tuple
    m: int

    @property
    def arity(self) -> int:
        return len(self.flows)

    def full_rhs(self, f: Field) -> Field:
        total = self.rhs[0](f)
        for r in self.rhs[1:]:
            total = total + r(f)
        return total


def _require_forward(t: complex, what: str):
    if complex(t).real < 0:
        raise UnstableStepError(
            f"{what}: refusing Re(t) = {complex(t).real:g} < 0 (backward diffusion)"
        )


def _check_finite(data: np.ndarray, what: str):
    if not np.all(np.isfinite(data.view(np.float64))):
        raise BlowUpError(f"{what}: state left the finite regime")


# ---------------------------------------------------------------------------
# Gray-Scott
# ---------------------------------------------------------------------------

def _gs_linear_factors(grid: TorusGrid, p: GrayScottParams, t: complex):
    ksq = _k_sq(grid) * (np.pi / grid.a) ** 2
    lam_u = -p.c1 * ksq - p.alpha
    lam_v = -p.c2 * ksq - p.beta
    return np.exp(lam_u * t), np.exp(lam_v * t)


def gs_linear_flow(t: complex, f: Field, p: GrayScottParams) -> Field:
    """Exact flow of A: diffusion + linear decay + constant feed alpha.

    Diagonal per mode; the mean of u relaxes toward 1 along
    u0 <- 1 + (u0 - 1)*exp(-alpha*t).
    """
    _require_forward(t, "gs_linear_flow")
    c = to_modal(f)
    fu, fv = _gs_linear_factors(f.grid, p, t)
    out = np.empty_like(c.data)
    out[0] = c.data[0] * fu
    out[1] = c.data[1] * fv
    zero = (0,) * f.grid.dim
    # affine feed acts on the mean mode only
    out[(0, *zero)] += 1.0 - np.exp(-p.alpha * t)
    return Field(f.grid, out, MODAL)


def _gs_reaction_terms(u, v):
    w = u * v * v  # shared product keeps u+v conservation exact per stage
    return -w, w


def gs_reaction_flow_rk4(
    t: complex, f: Field, substep: float = 0.1, dealias: bool = False
) -> Field:
    """Propagate the pointwise reaction (-u*v^2, u*v^2) by classical RK4.

    Substep count is max(1, ceil(|t|/substep)).  The reaction conserves
    u+v at every node and RK4 inherits that up to roundoff.
    """
    nod = to_nodal(f)
    u = nod.data[0].copy()
    v = nod.data[1].copy()
    steps = max(1, int(np.ceil(abs(t) / substep)))
    dt = t / steps
    # overflow in the cubic terms surfaces as BlowUpError, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            k1u, k1v = _gs_reaction_terms(u, v)
            k2u, k2v = _gs_reaction_terms(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v)
            k3u, k3v = _gs_reaction_terms(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v)
            k4u, k4v = _gs_reaction_terms(u + dt * k3u, v + dt * k3v)
            u = u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            v = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        out = np.stack([u, v])
    _check_finite(out, "gs_reaction_flow_rk4")
    res = Field(f.grid, out, NODAL)
    return dealias_23(res) if dealias else res


def gs_reaction_b_flow(t: complex, f: Field, dealias: bool = False) -> Field:
    """Exact flow of B = (0, u*v^2): v <- v/(1 - u*v*t) with u frozen."""
    nod = to_nodal(f)
    u = nod.data[0]
    v = nod.data[1]
    denom = 1.0 - u * v * t
    if np.min(np.abs(denom)) < 1e-8:
        raise BlowUpError("gs_reaction_b_flow: Riccati pole reached")
    out = np.stack([u, v / denom])
    _check_finite(out, "gs_reaction_b_flow")
    res = Field(f.grid, out, NODAL)
    return dealias_23(res) if dealias else res


def gs_reaction_c_flow(t: complex, f: Field, dealias: bool = False) -> Field:
    """Exact flow of the u-depletion piece: u <- u*exp(-v^2*t), v frozen."""
    nod = to_nodal(f)
    u = nod.data[0]
    v = nod.data[1]
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.stack([u * np.exp(-(v * v) * t), v.copy()])
    _check_finite(out, "gs_reaction_c_flow")
    res = Field(f.grid, out, NODAL)
    return dealias_23(res) if dealias else res


def _gs_rhs_a(f: Field, p: GrayScottParams) -> Field:
    c = to_modal(f)
    ksq = _k_sq(f.grid) * (np.pi / f.grid.a) ** 2
    out = np.empty_like(c.data)
    out[0] = (-p.c1 * ksq - p.alpha) * c.data[0]
    out[1] = (-p.c2 * ksq - p.beta) * c.data[1]
    out[(0, *(0,) * f.grid.dim)] += p.alpha
    return to_nodal(Field(f.grid, out, MODAL))


def _gs_rhs_b(f: Field) -> Field:
    nod = to_nodal(f)
    du, dv = _gs_reaction_terms(nod.data[0], nod.data[1])
    return Field(f.grid, np.stack([du, dv]), NODAL)


def gs_reaction_jacobian(f: Field, w: Field) -> Field:
    """Directional derivative B'(U) W of the reaction at U along W."""
    nod = to_nodal(f)
    wn = to_nodal(w)
    u, v = nod.data[0], nod.data[1]
    w1, w2 = wn.data[0], wn.data[1]
    top = -(v * v) * w1 - 2.0 * u * v * w2
    return Field(f.grid, np.stack([top, -top]), NODAL)


def gs_commutator(f: Field, p: GrayScottParams) -> Field:
    """Commutator [A, B](U) = A(B(U)) - B'(U)(A U) by operator application.

    Both applications of A include the constant feed alpha.  Warns when
    the modal tail above n/4 carries more than 1e-8 of the energy, since
    the pointwise Jacobian is then polluted by aliasing.
    """
    if modal_tail_fraction(f) > 1e-8:
        warnings.warn(
            "gs_commutator: field under-resolved (modal tail > 1e-8 of energy)",
            UnderResolvedWarning,
            stacklevel=2,
        )
    ab = _gs_rhs_a(_gs_rhs_b(f), p)
    ba = gs_reaction_jacobian(f, _gs_rhs_a(f, p))
    return ab - ba


def gray_scott_problem(
    grid: TorusGrid,
    params: GrayScottParams = GrayScottParams(),
    rk4_substep: float = 0.1,
    dealias: bool = False,
) -> SplitProblem:
    """Two-operator Gray-Scott split: A linear/affine, B reaction via RK4."""

    def flow_a(t, f):
        return gs_linear_flow(t, f, params)

    def flow_b(t, f):
        return gs_reaction_flow_rk4(t, f, substep=rk4_substep, dealias=dealias)

    return SplitProblem(
        name="gray_scott",
        flows=(flow_a, flow_b),
        rhs=(lambda f: _gs_rhs_a(f, params), _gs_rhs_b),
        m=2,
    )


def gray_scott_abc_problem(
    grid: TorusGrid,
    params: GrayScottParams = GrayScottParams(),
    dealias: bool = False,
) -> SplitProblem:
    """Three-operator Gray-Scott split with closed-form reaction flows.

    B = (0, u*v^2) and C = (-u*v^2, 0); their sum is the full reaction.
    """

    def flow_a(t, f):
        return gs_linear_flow(t, f, params)

    def flow_b(t, f):
        return gs_reaction_b_flow(t, f, dealias=dealias)

    def flow_c(t, f):
        return gs_reaction_c_flow(t, f, dealias=dealias)

    def rhs_b(f):
        nod = to_nodal(f)
        w = nod.data[0] * nod.data[1] ** 2
        return Field(f.grid, np.stack([np.zeros_like(w), w]), NODAL)

    def rhs_c(f):
        nod = to_nodal(f)
        w = nod.data[0] * nod.data[1] ** 2
        return Field(f.grid, np.stack([-w, np.zeros_like(w)]), NODAL)

    return SplitProblem(
        name="gray_scott_abc",
        flows=(flow_a, flow_b, flow_c),
        rhs=(lambda f: _gs_rhs_a(f, params), rhs_b, rhs_c),
        m=2,
    )


# ---------------------------------------------------------------------------
# Van der Pol system
# ---------------------------------------------------------------------------

def vdp_linear_flow(t: complex, f: Field, p: VdpParams) -> Field:
    """Exact flow of the coupled linear operator, per-mode 2x2 exponential.

    M_k = [[-du*kap2, 1], [-1/eps, -dv*kap2 + 1/eps]],
    kap2 = (pi/a)^2 * sum k_j^2.  The exponential is evaluated through the
    eigenvalue pair tau +/- delta with a series fallback when delta*t is
    tiny (defective or near-defective mode).
    """
    _require_forward(t, "vdp_linear_flow")
    c = to_modal(f)
    kap2 = _k_sq(f.grid) * (np.pi / f.grid.a) ** 2
    m11 = -p.du * kap2
    m12 = 1.0
    m21 = -1.0 / p.eps
    m22 = -p.dv * kap2 + 1.0 / p.eps

    tau = 0.5 * (m11 + m22)
    disc = np.asarray(0.25 * (m11 - m22) ** 2 + m12 * m21, dtype=np.complex128)
    delta = np.sqrt(disc)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ep = np.exp((tau + delta) * t)
        em = np.exp((tau - delta) * t)
        cos_part = 0.5 * (ep + em)
        dt_small = np.abs(delta * t) < 1e-6
        sin_part = np.where(dt_small, 1.0, (ep - em) / (2.0 * delta))
        series = t * np.exp(tau * t) * (1.0 + (delta * t) ** 2 / 6.0)
        sin_part = np.where(dt_small, series, sin_part)

        e11 = cos_part + sin_part * (m11 - tau)
        e12 = sin_part * m12
        e21 = sin_part * m21
        e22 = cos_part + sin_part * (m22 - tau)

        out = np.empty_like(c.data)
        out[0] = e11 * c.data[0] + e12 * c.data[1]
        out[1] = e21 * c.data[0] + e22 * c.data[1]
    _check_finite(out, "vdp_linear_flow")
    return Field(f.grid, out, MODAL)


def vdp_reaction_flow(t: complex, f: Field, p: VdpParams) -> Field:
    """Exact flow of B = (0, -u^2*v/eps): v <- v*exp(-u^2*t/eps)."""
    nod = to_nodal(f)
    u = nod.data[0]
    v = nod.data[1]
    # u^2 need not have nonnegative real part mid-composition (complex
    # stage times); overflow here surfaces as BlowUpError, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.stack([u.copy(), v * np.exp(-(u * u) * t / p.eps)])
    _check_finite(out, "vdp_reaction_flow")
    return Field(f.grid, out, NODAL)


def van_der_pol_problem(grid: TorusGrid, params: VdpParams = VdpParams()) -> SplitProblem:
    """Two-operator split of the van der Pol reaction-diffusion system."""

    def rhs_a(f):
        c = to_modal(f)
        kap2 = _k_sq(f.grid) * (np.pi / f.grid.a) ** 2
        out = np.empty_like(c.data)
        out[0] = -params.du * kap2 * c.data[0] + c.data[1]
        out[1] = -params.dv * kap2 * c.data[1] + (c.data[1] - c.data[0]) / params.eps
        return to_nodal(Field(f.grid, out, MODAL))

    def rhs_b(f):
        nod = to_nodal(f)
        u, v = nod.data[0], nod.data[1]
        bot = -(u * u) * v / params.eps
        return Field(f.grid, np.stack([np.zeros_like(bot), bot]), NODAL)

    return SplitProblem(
        name="van_der_pol",
        flows=(
            lambda t, f: vdp_linear_flow(t, f, params),
            lambda t, f: vdp_reaction_flow(t, f, params),
        ),
        rhs=(rhs_a, rhs_b),
        m=2,
    )


# ---------------------------------------------------------------------------
# Linear diagnostic problem
# ---------------------------------------------------------------------------

def linear_problem(
    grid: TorusGrid,
    diffusion: float = 0.5,
    potential: Optional[Callable] = None,
) -> SplitProblem:
    """u_t = diffusion*Lap(u) + V(x)*u with exact flows for both parts.

    ``potential`` maps the coordinate meshes to V values; None means
    V = 0, in which case A and B commute and any consistent splitting
    reproduces the exact flow of A+B.
    """
    ksq = _k_sq(grid) * (np.pi / grid.a) ** 2
    if potential is None:
        vx = np.zeros(grid.shape)
    else:
        vx = np.asarray(potential(*grid.meshes()), dtype=np.float64)

    def flow_a(t, f):
        _require_forward(t, "linear_problem A-flow")
        c = to_modal(f)
        return Field(f.grid, c.data * np.exp(-diffusion * ksq * t), MODAL)

    def flow_b(t, f):
        nod = to_nodal(f)
        return Field(f.grid, nod.data * np.exp(vx * t), NODAL)

    def rhs_a(f):
        c = to_modal(f)
        return to_nodal(Field(f.grid, -diffusion * ksq * c.data, MODAL))

    def rhs_b(f):
        nod = to_nodal(f)
        return Field(f.grid, nod.data * vx, NODAL)

    return SplitProblem(name="linear", flows=(flow_a, flow_b), rhs=(rhs_a, rhs_b), m=1)


# ---------------------------------------------------------------------------
# Initial condition presets
# ---------------------------------------------------------------------------

def _radius_sq(grid: TorusGrid):
    return sum(x * x for x in grid.meshes())


def gs_bump(grid: TorusGrid) -> Field:
    """Smooth Gaussian bump over the (0.5, 0.1) background state."""
    g = np.exp(-1.0 - _radius_sq(grid))
    return Field(grid, np.stack([0.5 + g, 0.1 + g]), NODAL)


def _rough_profile(grid: TorusGrid, q: float, amp: float, seed: int) -> np.ndarray:
    # power-law modal tail |c_k| ~ (1+|k|)^-q: limited Sobolev regularity
    rng = np.random.default_rng(seed)
    from .spectral import _k_abs1  # local import to keep module namespace tidy

    decay = (1.0 + _k_abs1(grid)) ** (-q)
    coef = decay * np.exp(2j * np.pi * rng.random(grid.shape))
    g = np.fft.ifftn(coef).real
    peak = np.max(np.abs(g))
    return amp * g / peak if peak > 0 else g


def gs_rough(grid: TorusGrid, q: float = 2.5, amp: float = 0.2, seed: int = 11) -> Field:
    """Background state plus a profile of limited smoothness.

    The modal coefficients decay like (1+|k|)^-q, so the field has only
    about q - 1/2 Sobolev derivatives; used to expose order reduction in
    stronger norms.
    """
    g1 = _rough_profile(grid, q, amp, seed)
    g2 = _rough_profile(grid, q, amp, seed + 1)
    return Field(grid, np.stack([0.5 + g1, 0.1 + g2]), NODAL)


def vdp_gaussians(grid: TorusGrid) -> Field:
    """u = exp(-x^2), v = 0.2*exp(-(x+2)^2); one-dimensional profile."""
    if grid.dim != 1:
        raise RepresentationError("vdp_gaussians preset is one-dimensional")
    x = grid.axis()
    return Field(grid, np.stack([np.exp(-(x * x)), 0.2 * np.exp(-((x + 2.0) ** 2))]), NODAL)


def random_smooth(grid: TorusGrid, m: int = 2, seed: int = 0, scale: float = 0.3) -> Field:
    """Random band-limited smooth field, reproducible from the seed."""
    rng = np.random.default_rng(seed)
    from .spectral import _k_abs1

    # hard cutoff at |k| <= n/8 keeps the field fully resolved on its grid
    decay = np.exp(-((_k_abs1(grid) / 4.0) ** 2)) * (_k_abs1(grid) <= grid.n / 8.0)
    data = np.empty((m,) + grid.shape, dtype=np.complex128)
    for i in range(m):
        coef = decay * (rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
        data[i] = np.fft.ifftn(coef).real
        peak = np.max(np.abs(data[i].real))
        if peak > 0:
            data[i] *= scale / peak
    return Field(grid, data, NODAL)


PRESETS = {
    "gs_bump": gs_bump,
    "gs_rough": gs_rough,
    "vdp_gaussians": vdp_gaussians,
    "random_smooth": random_smooth,
}


def initial_condition(name: str, grid: TorusGrid, **kwargs) -> Field:
    """Look up a named preset and evaluate it on the grid."""
    try:
        maker = PRESETS[name]
    except KeyError:
        raise RepresentationError(
            f"unknown initial condition {name!r}; choices: {sorted(PRESETS)}"
        ) from None
    return maker(grid, **kwargs)
