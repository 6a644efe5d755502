"""Convergence, estimator-quality, efficiency and commutator diagnostics.

Error measurement conventions:

* Reference solutions are fixed-step runs of the highest-order
  registered parabolic-safe scheme, with the step halved until two
  consecutive answers agree below the requested floor.  The last halving
  delta is reported as the reference floor.
* Convergence slopes are least-squares fits of log(error) against
  log(h).  Points within 10x of the reference floor are excluded from
  the fit; series whose every point sits at the floor are flagged exact.
* Local errors compare one step S(h, u0) against a reference over
  [t0, t0 + h] whose accuracy is driven down to 1% of the smallest
  quantity being measured (including estimator deviations).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dataclass_field, replace
from typing import Optional

import numpy as np

from .control import (
    StepControlConfig,
    calibrate_initial_step,
    integrate_adaptive,
    integrate_fixed,
)
from .estimators import estimate_step
from .exceptions import ReferenceAccuracyError
from .problems import GrayScottParams, SplitProblem, _gs_rhs_a, _gs_rhs_b, gs_commutator
from .schemes import SchemePair, SchemeRegistry, SplittingScheme, builtin_registry, compose_step
from .spectral import MODAL, Field, sobolev_norm, to_modal, to_nodal

__all__ = [
    "reference_solution",
    "ConvergenceReport",
    "convergence_study",
    "fit_loglog",
    "EfficiencyRow",
    "efficiency_compare",
    "CommutatorReport",
    "commutator_check",
    "write_convergence_csv",
    "write_efficiency_csv",
]


def _same_space(ref: Field, other: Field) -> Field:
    if other.space == ref.space:
        return other
    return to_modal(other) if ref.space == MODAL else to_nodal(other)


def _err(a: Field, b: Field, s: float) -> float:
    return sobolev_norm(a - _same_space(a, b), s)


def reference_solution(
    prob: SplitProblem,
    f0: Field,
    t0: float,
    t_end: float,
    scheme: Optional[SplittingScheme] = None,
    registry: Optional[SchemeRegistry] = None,
    h0: Optional[float] = None,
    target: Optional[dict] = None,
    norms=(0.0,),
    max_halvings: int = 16,
):
    """Fixed-step reference with step halving until self-consistency.

    ``target`` maps Sobolev index s to the acceptable floor; None means
    1e-10 relative to the solution norm.  Returns (state, info) with
    info = {"scheme", "h", "floor": {s: last halving delta}}.
    """
    if scheme is None:
        reg = registry if registry is not None else builtin_registry()
        scheme = reg.highest_order_scheme(arity=prob.arity)
    span = t_end - t0
    if span <= 0:
        return f0, {"scheme": scheme.name, "h": 0.0, "floor": {s: 0.0 for s in norms}}
    h = h0 if h0 is not None else span / 64.0
    prev, _ = integrate_fixed(prob, scheme, f0, t0, t_end, h)
    floor = {}
    for _ in range(max_halvings):
        h *= 0.5
        cur, _ = integrate_fixed(prob, scheme, f0, t0, t_end, h)
        floor = {s: _err(cur, prev, s) for s in norms}
        ok = True
        for s in norms:
            goal = (
                target[s]
                if target is not None and s in target
                else 1e-10 * max(sobolev_norm(cur, s), 1e-30)
            )
            ok = ok and floor[s] <= goal
        if ok:
            return cur, {"scheme": scheme.name, "h": h, "floor": floor}
        prev = cur
    raise ReferenceAccuracyError(
        f"reference with {scheme.name} did not reach the floor after "
        f"{max_halvings} halvings (last delta {floor})"
    )


def fit_loglog(hs, errs):
    """Least-squares slope of log(err) vs log(h); returns (slope, n_used)."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    mask = errs > 0
    if np.count_nonzero(mask) < 2:
        return float("nan"), int(np.count_nonzero(mask))
    slope = np.polyfit(np.log(hs[mask]), np.log(errs[mask]), 1)[0]
    return float(slope), int(np.count_nonzero(mask))


def _fit_above_floor(hs, errs, floor):
    errs = np.asarray(errs, dtype=float)
    keep = errs > 10.0 * floor
    if np.count_nonzero(keep) < 2:
        return float("nan"), int(np.count_nonzero(keep))
    return fit_loglog(np.asarray(hs)[keep], errs[keep])


@dataclass
class ConvergenceReport:
    """Everything a dyadic h-sweep produced for one scheme or pair."""

    name: str
    hs: np.ndarray
    norms: tuple
    local: dict = dataclass_field(default_factory=dict)    # s -> errors
    global_: dict = dataclass_field(default_factory=dict)  # s -> errors
    est: Optional[np.ndarray] = None                       # estimator values
    est_true: Optional[np.ndarray] = None                  # true local L2 errors
    est_deviation: Optional[np.ndarray] = None
    ctrl_local: Optional[np.ndarray] = None                # controller local L2 errors
    local_slopes: dict = dataclass_field(default_factory=dict)
    global_slopes: dict = dataclass_field(default_factory=dict)
    est_deviation_slope: float = float("nan")
    ctrl_local_slope: float = float("nan")
    ref_floor: dict = dataclass_field(default_factory=dict)
    local_floor: dict = dataclass_field(default_factory=dict)
    exact: bool = False
    points_used: dict = dataclass_field(default_factory=dict)

    def slope(self, kind: str, s: float = 0.0) -> float:
        table = self.local_slopes if kind == "local" else self.global_slopes
        return table.get(s, float("nan"))


def convergence_study(
    prob: SplitProblem,
    subject,
    f0: Field,
    t0: float,
    t_end: float,
    hs,
    norms=(0.0,),
    registry: Optional[SchemeRegistry] = None,
    reference=None,
    what=("local", "global"),
) -> ConvergenceReport:
    """Dyadic h-sweep of local/global errors with slope fits.

    ``subject`` is a SplittingScheme or a SchemePair; pairs additionally
    record the estimator value, its deviation from the true local error
    and the controller's own local error.  ``reference`` may carry a
    precomputed (state, info) pair from :func:`reference_solution`.
    """
    pair = subject if isinstance(subject, SchemePair) else None
    scheme = pair.integrator if pair else subject
    reg = registry if registry is not None else builtin_registry()
    ref_scheme = reg.highest_order_scheme(arity=prob.arity)
    hs = np.asarray(sorted(hs, reverse=True), dtype=float)
    norms = tuple(norms)
    rep = ConvergenceReport(name=pair.name if pair else scheme.name, hs=hs, norms=norms)

    if "global" in what:
        if reference is None:
            # bootstrap the accuracy target from a provisional reference;
            # the relative floor keeps exact splittings (error = roundoff)
            # from demanding an unreachable reference
            prov, _ = integrate_fixed(prob, ref_scheme, f0, t0, t_end, min(hs) / 8.0)
            fmin, _ = integrate_fixed(prob, scheme, f0, t0, t_end, min(hs))
            target = {
                s: max(1e-2 * _err(fmin, prov, s), 1e-12 * sobolev_norm(prov, s), 1e-14)
                for s in norms
            }
            reference = reference_solution(
                prob, f0, t0, t_end, scheme=ref_scheme, h0=min(hs) / 8.0,
                target=target, norms=norms,
            )
        ref_state, ref_info = reference
        rep.ref_floor = dict(ref_info["floor"])
        for s in norms:
            rep.global_[s] = np.empty(len(hs))
        for i, h in enumerate(hs):
            fh, _ = integrate_fixed(prob, scheme, f0, t0, t_end, h)
            for s in norms:
                rep.global_[s][i] = _err(fh, ref_state, s)
        for s in norms:
            slope, used = _fit_above_floor(hs, rep.global_[s], rep.ref_floor.get(s, 0.0))
            rep.global_slopes[s] = slope
            rep.points_used[("global", s)] = used

    if "local" in what:
        for s in norms:
            rep.local[s] = np.empty(len(hs))
        if pair is not None:
            rep.est = np.empty(len(hs))
            rep.est_true = np.empty(len(hs))
            rep.est_deviation = np.empty(len(hs))
            rep.ctrl_local = np.empty(len(hs))
        local_floor = {s: 0.0 for s in norms}
        for i, h in enumerate(hs):
            u1 = compose_step(scheme, prob, h, f0)
            res = estimate_step(pair, prob, h, f0) if pair is not None else None
            ref1, deltas = _one_step_reference(prob, ref_scheme, f0, t0, h, norms, u1, res)
            for s in norms:
                local_floor[s] = max(local_floor[s], deltas[s])
                rep.local[s][i] = _err(u1, ref1, s)
            if res is not None:
                true_l2 = _err(res.u_next, ref1, 0.0)
                rep.est[i] = res.est_norm
                rep.est_true[i] = true_l2
                rep.est_deviation[i] = abs(res.est_norm - true_l2)
                rep.ctrl_local[i] = _err(res.u_control, ref1, 0.0)
        rep.local_floor = local_floor
        for s in norms:
            slope, used = _fit_above_floor(hs, rep.local[s], local_floor[s])
            rep.local_slopes[s] = slope
            rep.points_used[("local", s)] = used
        if pair is not None:
            rep.est_deviation_slope, _ = _fit_above_floor(
                hs, rep.est_deviation, local_floor.get(0.0, 0.0)
            )
            rep.ctrl_local_slope, _ = _fit_above_floor(
                hs, rep.ctrl_local, local_floor.get(0.0, 0.0)
            )

    # exact-flow detection: every measured error at the floor
    all_series = list(rep.local.values()) + list(rep.global_.values())
    if all_series:
        floors = {**rep.ref_floor, **rep.local_floor}
        top = max(10.0 * max(floors.values(), default=0.0), 1e-13)
        rep.exact = all(np.all(series <= top) for series in all_series)
    return rep


def _one_step_reference(prob, ref_scheme, f0, t0, h, norms, u1, res, max_halvings=10):
    """Reference over [t0, t0+h], resolved to 1% of the smallest quantity
    under study: the one-step errors per norm, and for pairs also the
    estimator deviation and the controller's local error."""
    substeps = 8
    prev, _ = integrate_fixed(prob, ref_scheme, f0, t0, t0 + h, h / substeps)
    cur, deltas = prev, {s: np.inf for s in norms}
    for _ in range(max_halvings):
        substeps *= 2
        cur, _ = integrate_fixed(prob, ref_scheme, f0, t0, t0 + h, h / substeps)
        deltas = {s: _err(cur, prev, s) for s in norms}
        needs = [_err(u1, cur, s) for s in norms]
        if res is not None:
            true_l2 = _err(res.u_next, cur, 0.0)
            needs.append(abs(res.est_norm - true_l2))
            needs.append(_err(res.u_control, cur, 0.0))
        # same roundoff-aware floor as the global bootstrap
        goal = 1e-2 * max(min(needs), 1e-12 * sobolev_norm(cur, 0.0), 1e-15)
        if max(deltas.values()) <= goal:
            break
        prev = cur
    return cur, deltas


@dataclass(frozen=True)
class EfficiencyRow:
    """Adaptive-vs-equidistant work comparison at one tolerance."""

    method: str
    tol: float
    steps_adaptive: int
    steps_equidist: int
    time_adaptive: float
    time_equidist: float
    h_min: float
    n_rejected: int = 0

    @property
    def step_ratio(self) -> float:
        return self.steps_adaptive / self.steps_equidist


def efficiency_compare(
    prob: SplitProblem,
    pair: SchemePair,
    f0: Field,
    t0: float,
    t_end: float,
    cfg: StepControlConfig,
    calibrate: bool = True,
) -> EfficiencyRow:
    """Adaptive run versus equidistant run at the smallest accepted step.

    With ``calibrate`` (default) the initial step is settled onto the
    tolerance plateau first, so the startup ramp does not dominate the
    minimum.  The final clipped landing step is likewise excluded from
    the minimum.  The equidistant run uses the bare integrator.
    """
    if calibrate and cfg.h_init is None:
        h0 = calibrate_initial_step(
            prob, pair, f0, cfg, h0=(t_end - t0) * cfg.tol ** (1.0 / (pair.order + 1))
        )
        cfg = replace(cfg, h_init=min(h0, t_end - t0))
    _, traj = integrate_adaptive(prob, pair, f0, t0, t_end, cfg)
    acc = traj.accepted_steps()
    body = acc[:-1] if len(acc) > 1 else acc
    h_min = min(r.h for r in body)
    start = time.perf_counter()
    _, traj_eq = integrate_fixed(prob, pair.integrator, f0, t0, t_end, h_min)
    t_eq = time.perf_counter() - start
    return EfficiencyRow(
        method=pair.name,
        tol=cfg.tol,
        steps_adaptive=len(acc),
        steps_equidist=len(traj_eq.records),
        time_adaptive=traj.wall_time,
        time_equidist=t_eq,
        h_min=h_min,
        n_rejected=traj.n_rejected,
    )


# ---------------------------------------------------------------------------
# Commutator check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CommutatorReport:
    value: Field
    fd_value: Field
    rel_difference: float
    eps: float


def commutator_check(f: Field, params: GrayScottParams, eps: float = 1e-3) -> CommutatorReport:
    """Validate the Gray-Scott commutator against finite differences.

    The Jacobian term B'(U)(A U) is replaced by the centered directional
    difference of the reaction along W = A(U), Richardson-extrapolated
    from eps and eps/2 (leaving an O(eps^4) defect); the operator term
    A(B(U)) is evaluated spectrally in both.  Reports the relative L2
    difference against the closed-form commutator.
    """
    com = gs_commutator(f, params)

    def fd_bracket(e: float) -> Field:
        w = _gs_rhs_a(f, params)
        plus = _gs_rhs_b(f + (e * w))
        minus = _gs_rhs_b(f - (e * w))
        jac_fd = (plus - minus) * (0.5 / e)
        return _gs_rhs_a(_gs_rhs_b(f), params) - jac_fd

    c1 = fd_bracket(eps)
    c2 = fd_bracket(eps / 2.0)
    richardson = (4.0 / 3.0) * c2 - (1.0 / 3.0) * c1
    scale = max(sobolev_norm(com, 0.0), 1e-30)
    rel = sobolev_norm(com - _same_space(com, richardson), 0.0) / scale
    return CommutatorReport(value=com, fd_value=richardson, rel_difference=rel, eps=eps)


# ---------------------------------------------------------------------------
# CSV writers
# ---------------------------------------------------------------------------

def write_convergence_csv(report: ConvergenceReport, path, preamble: Optional[dict] = None):
    """series,s,h,value rows with slope summary in trailing comments."""
    lines = []
    for key, val in (preamble or {}).items():
        lines.append(f"# {key}={val}")
    lines.append("series,s,h,value")

    def emit(series, s, values):
        for h, v in zip(report.hs, values):
            lines.append(f"{series},{float(s)!r},{float(h)!r},{float(v)!r}")

    for s, vals in report.local.items():
        emit("local", s, vals)
    for s, vals in report.global_.items():
        emit("global", s, vals)
    if report.est is not None:
        emit("est", 0.0, report.est)
        emit("est_true", 0.0, report.est_true)
        emit("est_deviation", 0.0, report.est_deviation)
        emit("ctrl_local", 0.0, report.ctrl_local)
    for s, v in report.local_slopes.items():
        lines.append(f"# slope series=local s={s!r} value={v!r}")
    for s, v in report.global_slopes.items():
        lines.append(f"# slope series=global s={s!r} value={v!r}")
    if report.est is not None:
        lines.append(f"# slope series=est_deviation s=0.0 value={report.est_deviation_slope!r}")
        lines.append(f"# slope series=ctrl_local s=0.0 value={report.ctrl_local_slope!r}")
    if report.exact:
        lines.append("# exact=1")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_efficiency_csv(rows, path, preamble: Optional[dict] = None):
    lines = []
    for key, val in (preamble or {}).items():
        lines.append(f"# {key}={val}")
    lines.append("method,tol,steps_adaptive,steps_equidist,time_adaptive,time_equidist")
    for r in rows:
        lines.append(
            f"{r.method},{r.tol!r},{r.steps_adaptive},{r.steps_equidist},"
            f"{r.time_adaptive:.6f},{r.time_equidist:.6f}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
