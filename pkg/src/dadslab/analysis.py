"""Trajectory-level verification of the closed-loop guarantees.

Every checker is a pure function of (trajectory, inputs) returning a
BoundReport with the per-sample margin series (bound minus attained value),
so re-evaluation is bit-identical and reports can run concurrently over
independent trajectories. Bound identifiers are short stable tokens shared
with the CLI: "2.20" (quadratic decay), "2.21" (gain ceiling), "2.12"
(transient/gain consequences), "2.14"/"2.22" (tail level / tail radius),
"2.5" (robust decrease), "2.8" (leakage decrease), "deadzone".

Asymptotic statements are evaluated as finite tail-window suprema; every
report records the window it used. Derivative inequalities are checked with
centered finite differences on the stored grid with an h^2-scaled tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .controllers import DadsParams, NoDeadzoneParams, RobustParams, SigmaModParams
from .designs import ClfDesign, GridSpec, LinearDesign, ZetaEnvelope, quad_form, zeta_envelope
from .errors import ConfigurationError
from .sim import Trajectory

DEFAULT_TAIL_FRACTION = 0.4


@dataclass
class BoundReport:
    """Per-inequality verification record.

    margins holds bound-minus-attained per checked sample; passed is
    min_margin >= -tolerance.
    """

    bound_id: str
    margins: np.ndarray
    min_margin: float
    passed: bool
    tolerance: float
    inputs: dict = field(default_factory=dict)
    n_samples: int = 0
    notes: str = ""

    def to_json_dict(self):
        return {
            "bound_id": self.bound_id,
            "min_margin": self.min_margin,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "inputs": self.inputs,
            "n_samples": self.n_samples,
        }


@dataclass
class TailStats:
    """Finite-window stand-in for limsup claims."""

    window: tuple
    sup_abs_x: float
    sup_V: float
    limsup_estimate: float


@dataclass
class EquilibriumSet:
    """Nonzero closed-loop equilibria of the scalar no-deadzone foil."""

    origin_only: bool
    rho_star: Optional[float] = None
    x_star_pair: Optional[tuple] = None
    residual: Optional[float] = None
    lower_bound: Optional[float] = None

    def to_json_dict(self):
        return {
            "origin_only": self.origin_only,
            "rho_star": self.rho_star,
            "x_star_pair": list(self.x_star_pair) if self.x_star_pair else None,
            "residual": self.residual,
            "lower_bound": self.lower_bound,
        }


@dataclass
class WitnessReport:
    """Drift-witness outcome: slope floor on one state component while the
    trajectory sits inside a norm ball."""

    passed: bool
    vacuous: bool
    first_entry_time: Optional[float]
    n_checked: int
    worst_slope: Optional[float]
    component_index: int
    rate: float
    threshold: float


def _report(bound_id, margins, tolerance, inputs, notes="") -> BoundReport:
    margins = np.asarray(margins, dtype=float)
    mmin = float(margins.min()) if margins.size else math.inf
    return BoundReport(bound_id=bound_id, margins=margins, min_margin=mmin,
                       passed=bool(mmin >= -tolerance), tolerance=float(tolerance),
                       inputs=inputs, n_samples=int(margins.size), notes=notes)


def _require_kind(traj: Trajectory, kinds, what: str) -> None:
    if traj.controller_kind not in kinds:
        raise ConfigurationError(
            f"{what} applies to {kinds} trajectories, got '{traj.controller_kind}'")


# ---------------------------------------------------------------------------
# adapted-gain bookkeeping: S, chi and its closed form
# ---------------------------------------------------------------------------

def disturbance_offset(design: LinearDesign, params: DadsParams, z0: float,
                       d_norm: float, theta_norm: float) -> float:
    """The residual offset S in the quadratic decay bound:

        S = (|d|^2 + ((|theta| - lam sqrt(c(1+kappa(e^z0))))^+)^2)
            / (4 eta c (1 + kappa(e^z0)))
    """
    c1k = params.c * (1.0 + params.kappa.of_exp(z0))
    short = max(theta_norm - params.lam * math.sqrt(c1k), 0.0)
    return (d_norm * d_norm + short * short) / (4.0 * design.eta * c1k)


def _chi_feasible(design: LinearDesign, params: DadsParams, eps: float,
                  a: float, b: float, s: float) -> bool:
    lhs = a * a + max(b - params.lam * math.sqrt(params.c * (1.0 + s)), 0.0) ** 2
    rhs = 4.0 * design.eta * params.c * design.lambda_min_P * eps * eps * (1.0 + s)
    return lhs <= rhs


def gain_ceiling_chi(design: LinearDesign, params: DadsParams, z0: float,
                     d_norm: float, theta_norm: float) -> float:
    """chi(z0, a, b) with a = |d| and b = |theta|:

        kappa^{-1}( min{ s >= kappa(e^z0) :
            a^2 + ((b - lam sqrt(c(1+s)))^+)^2 <= 4 eta c lambda_min(P) eps^2 (1+s) } )

    The feasible set is an upper ray (left side non-increasing in s, right
    side strictly increasing), so the minimum is found by bisection.
    """
    eps = params.eps if params.eps is not None else design.eps
    s0 = params.kappa.of_exp(z0)
    a, b = abs(d_norm), abs(theta_norm)
    if _chi_feasible(design, params, eps, a, b, s0):
        return params.kappa.inverse(s0)
    hi = max(s0, 1.0)
    while not _chi_feasible(design, params, eps, a, b, hi):
        hi *= 2.0
        if hi > 1e300:
            raise ConfigurationError("gain ceiling bisection failed to bracket")
    lo = max(s0, hi / 2.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _chi_feasible(design, params, eps, a, b, mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return params.kappa.inverse(hi)


def gain_ceiling_closed_form(design: LinearDesign, params: DadsParams, z0: float,
                             d_norm: float, theta_norm: float) -> float:
    """Closed-form upper bound for the gain ceiling:

        kappa^{-1}( max( kappa(e^z0),
            (a^2 + ((b - lam sqrt(c(1+kappa(e^z0))))^+)^2)
            / (4 eta c lambda_min(P) eps^2) - 1 ) )
    """
    eps = params.eps if params.eps is not None else design.eps
    s0 = params.kappa.of_exp(z0)
    short = max(theta_norm - params.lam * math.sqrt(params.c * (1.0 + s0)), 0.0)
    num = d_norm * d_norm + short * short
    s = max(s0, num / (4.0 * design.eta * params.c * design.lambda_min_P * eps * eps) - 1.0)
    return params.kappa.inverse(s)


# ---------------------------------------------------------------------------
# theorem-bound checks along trajectories
# ---------------------------------------------------------------------------

def check_quadratic_decay(traj: Trajectory, design: LinearDesign, params: DadsParams,
                          theta: Sequence[float], d_norm: float,
                          rel_tol: float = 1e-9) -> BoundReport:
    """Bound "2.20": x(t)'P x(t) <= exp(-eta t) x(0)'P x(0) + S."""
    _require_kind(traj, ("dads_linear",), "the quadratic decay bound")
    z0 = float(traj.adapted[0, 0])
    theta_norm = math.sqrt(sum(v * v for v in theta))
    S = disturbance_offset(design, params, z0, d_norm, theta_norm)
    V0 = float(traj.V_values[0])
    bound = np.exp(-design.eta * traj.times) * V0 + S
    margins = bound - traj.V_values
    tol = rel_tol * max(V0 + S, 1e-300)
    return _report("2.20", margins, tol,
                   {"d_norm": d_norm, "theta_norm": theta_norm, "S": S, "eta": design.eta,
                    "V0": V0})


def check_gain_ceiling(traj: Trajectory, design: LinearDesign, params: DadsParams,
                       theta: Sequence[float], d_norm: float,
                       rel_tol: float = 1e-9) -> BoundReport:
    """Bound "2.21": e^z0 <= e^z(t) <= chi(z0,|d|,|theta|) + (Gamma/eta)(V0 + S),
    plus the looser closed-form variant of the right side."""
    _require_kind(traj, ("dads_linear",), "the gain ceiling bound")
    z = traj.adapted[:, 0]
    z0 = float(z[0])
    theta_norm = math.sqrt(sum(v * v for v in theta))
    S = disturbance_offset(design, params, z0, d_norm, theta_norm)
    V0 = float(traj.V_values[0])
    chi = gain_ceiling_chi(design, params, z0, d_norm, theta_norm)
    chi_loose = gain_ceiling_closed_form(design, params, z0, d_norm, theta_norm)
    head = (params.Gamma / design.eta) * (V0 + S)
    ceiling = chi + head
    ceiling_loose = chi_loose + head
    rho = np.exp(z)
    scale = max(ceiling, 1.0)
    lower = (rho - math.exp(z0)) / scale
    upper = (ceiling - rho) / scale
    upper_loose = (ceiling_loose - rho) / scale
    margins = np.minimum(np.minimum(lower, upper), upper_loose) * scale
    return _report("2.21", margins, rel_tol * scale,
                   {"d_norm": d_norm, "theta_norm": theta_norm, "S": S, "chi": chi,
                    "chi_closed_form": chi_loose, "ceiling": ceiling,
                    "ceiling_closed_form": ceiling_loose, "final_gain": float(rho[-1])})


def check_transient_consequences(traj: Trajectory, design: ClfDesign, params: DadsParams,
                                 theta: Sequence[float], d_norm: float,
                                 envelope: Optional[ZetaEnvelope] = None,
                                 gain_bound: Optional[float] = None,
                                 tol: float = 1e-9) -> BoundReport:
    """Bound "2.12": the implementable consequences of the transient estimate.

    (i)   z is non-decreasing along the trajectory;
    (ii)  z(t) <= gain_bound when a bound is supplied (see adapted_gain_crude_bound);
    (iii) above the residual level implied by the decrease envelope, V does not
          increase between consecutive samples.

    Sub-check (iii) is skipped (noted) when no envelope is supplied or the
    envelope never reaches the perturbation level.
    """
    _require_kind(traj, ("dads", "dads_linear"), "the transient consequence check")
    z = traj.adapted[:, 0]
    margins_i = np.diff(z)
    notes = []
    all_margins = [margins_i]
    if gain_bound is not None:
        all_margins.append(gain_bound - z)
        notes.append(f"gain bound {gain_bound:.6g}")
    else:
        notes.append("sub-check (ii) skipped: no gain bound supplied")
    if envelope is not None:
        z0 = float(z[0])
        theta_norm = math.sqrt(sum(v * v for v in theta))
        c1k = params.c * (1.0 + params.kappa.of_exp(z0))
        short = max(theta_norm - params.lam * math.sqrt(c1k), 0.0)
        perturbation = (d_norm * d_norm + short * short) / (4.0 * c1k)
        level = envelope.level_floor(perturbation * 4.0 / 3.0)
        if level is None:
            notes.append("sub-check (iii) skipped: envelope below perturbation level")
        else:
            V = traj.V_values
            high = V[:-1] >= level
            if np.any(high):
                scale = max(float(np.max(V)), 1.0)
                all_margins.append((V[:-1] - V[1:])[high] / scale)
                notes.append(f"residual level {level:.6g}, {int(high.sum())} samples above")
            else:
                notes.append(f"sub-check (iii) vacuous: V stays below {level:.6g}")
    else:
        notes.append("sub-check (iii) skipped: no envelope supplied")
    margins = np.concatenate([np.atleast_1d(m) for m in all_margins])
    return _report("2.12", margins, tol, {"d_norm": d_norm}, notes="; ".join(notes))


def tail_limsup(traj: Trajectory, window_fraction: float = DEFAULT_TAIL_FRACTION) -> TailStats:
    """Suprema of |x| and V over the trailing window (default final 40%)."""
    if not 0.0 < window_fraction <= 1.0:
        raise ConfigurationError("window_fraction must be in (0, 1]")
    t_end = float(traj.times[-1])
    t_start = t_end * (1.0 - window_fraction)
    mask = traj.times >= t_start
    sup_x = float(traj.abs_x()[mask].max())
    sup_V = float(traj.V_values[mask].max())
    return TailStats(window=(t_start, t_end), sup_abs_x=sup_x, sup_V=sup_V,
                     limsup_estimate=sup_x)


def check_tail_level(traj: Trajectory, r: float,
                     window_fraction: float = DEFAULT_TAIL_FRACTION,
                     tol: float = 0.0) -> BoundReport:
    """Bound "2.14": tail sup of V(x(t)) <= r (+ tol)."""
    stats = tail_limsup(traj, window_fraction)
    margins = np.array([r + tol - stats.sup_V])
    return _report("2.14", margins, 0.0,
                   {"r": r, "window": list(stats.window), "tail_sup_V": stats.sup_V})


def check_tail_state(traj: Trajectory, eps: float,
                     window_fraction: float = DEFAULT_TAIL_FRACTION,
                     tol: float = 0.0) -> BoundReport:
    """Bound "2.22": tail sup of |x(t)| <= eps (+ tol)."""
    stats = tail_limsup(traj, window_fraction)
    margins = np.array([eps + tol - stats.sup_abs_x])
    return _report("2.22", margins, 0.0,
                   {"eps": eps, "window": list(stats.window), "tail_sup_x": stats.sup_abs_x})


def tail_average_excess(traj: Trajectory, r: float,
                        window_fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    """Tail average of (V(x(t)) - r)^+, the integrand whose vanishing tail
    forces the level set V <= r to capture the trajectory."""
    t_end = float(traj.times[-1])
    mask = traj.times >= t_end * (1.0 - window_fraction)
    excess = np.maximum(traj.V_values[mask] - r, 0.0)
    return float(excess.mean())


def deadzone_level(design, params: DadsParams) -> float:
    """The V-level below which adaptation is frozen."""
    if params.r is not None:
        return params.r
    if isinstance(design, LinearDesign):
        return design.lambda_min_P * params.eps * params.eps
    raise ConfigurationError("eps-based deadzone needs a LinearDesign")


def check_deadzone(traj: Trajectory, design, params: DadsParams) -> BoundReport:
    """Inside the deadzone the adapted derivative is exactly zero.

    Recomputes z' from the update law at every stored sample with
    V(x) <= level and requires literal zero (the positive part guarantees it).
    """
    _require_kind(traj, ("dads", "dads_linear"), "the deadzone check")
    level = deadzone_level(design, params)
    if isinstance(design, LinearDesign):
        V_fn = lambda x: quad_form(design.P_t, x)
    else:
        V_fn = design.V_eval
    worst = 0.0
    checked = 0
    for i in range(traj.n_samples):
        x = tuple(traj.states[i])
        if V_fn(x) <= level:
            checked += 1
            z = float(traj.adapted[i, 0])
            excess = V_fn(x) - level
            zdot = params.Gamma * math.exp(-z) * excess if excess > 0.0 else 0.0
            worst = max(worst, abs(zdot))
    margins = np.array([-worst])
    report = _report("deadzone", margins, 0.0,
                     {"level": level, "samples_in_deadzone": checked})
    report.passed = worst == 0.0
    return report


def _centered_derivative(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """(f[i+1] - f[i-1]) / (t[i+1] - t[i-1]) on the interior samples."""
    return (values[2:] - values[:-2]) / (times[2:] - times[:-2])


def check_robust_decrease(traj: Trajectory, design: ClfDesign, params: RobustParams,
                          tol_scale: float = 10.0) -> BoundReport:
    """Bound "2.5": dV/dt <= -(1 - 1/(4c)) Q(x) + d^2/(4c), checked with
    centered differences; tolerance tol_scale * h^2 * (local scale)."""
    _require_kind(traj, ("robust",), "the robust decrease bound")
    if traj.n_samples < 3:
        raise ConfigurationError("need at least three samples for a centered difference")
    Vdot = _centered_derivative(traj.V_values, traj.times)
    h = float(np.max(np.diff(traj.times)))
    Q = np.array([design.Q_eval(tuple(x)) for x in traj.states[1:-1]])
    d = traj.d_values[1:-1]
    rhs = -(1.0 - 1.0 / (4.0 * params.c)) * Q + d * d / (4.0 * params.c)
    margins = rhs - Vdot
    scale = 1.0 + np.max(np.abs(Q)) + np.max(d * d) / (4.0 * params.c) + np.max(np.abs(Vdot))
    return _report("2.5", margins, tol_scale * h * h * scale,
                   {"c": params.c, "h": h})


def check_leakage_decrease(traj: Trajectory, design: ClfDesign, params: SigmaModParams,
                           theta: Sequence[float], lambda_free: float = 0.5,
                           tol_scale: float = 10.0) -> BoundReport:
    """Bound "2.8" for the leakage law, via W = V + (1/2)(th_hat-th)'Gamma^{-1}(th_hat-th):

        dW/dt <= -Q(x) - sigma(1-lam_f)(th_hat-th)'Gamma^{-1}(th_hat-th)
                 + (sigma/(4 lam_f)) th'Gamma^{-1}th + d^2/(4c)

    for any splitting weight lam_f in (0,1).
    """
    _require_kind(traj, ("sigma_mod",), "the leakage decrease bound")
    if not 0.0 < lambda_free < 1.0:
        raise ConfigurationError("lambda_free must lie in (0, 1)")
    th = np.asarray(theta, dtype=float)
    Ginv = np.linalg.inv(params.Gamma)
    err = traj.adapted - th
    werr = 0.5 * np.einsum("ij,jk,ik->i", err, Ginv, err)
    W = traj.V_values + werr
    Wdot = _centered_derivative(W, traj.times)
    h = float(np.max(np.diff(traj.times)))
    Q = np.array([design.Q_eval(tuple(x)) for x in traj.states[1:-1]])
    quad_err = 2.0 * werr[1:-1]
    const = (params.sigma / (4.0 * lambda_free)) * float(th @ Ginv @ th)
    d = traj.d_values[1:-1]
    rhs = -Q - params.sigma * (1.0 - lambda_free) * quad_err + const + d * d / (4.0 * params.c)
    margins = rhs - Wdot
    scale = 1.0 + np.max(np.abs(Q)) + np.max(np.abs(quad_err)) * params.sigma \
        + abs(const) + np.max(np.abs(Wdot))
    return _report("2.8", margins, tol_scale * h * h * scale,
                   {"lambda_free": lambda_free, "sigma": params.sigma, "h": h})


# ---------------------------------------------------------------------------
# no-deadzone foil equilibria
# ---------------------------------------------------------------------------

def nodeadzone_equilibria(params: NoDeadzoneParams, theta: float) -> EquilibriumSet:
    """Nonzero equilibria of the scalar foil for theta > K1.

    rho* is the unique positive root of
        (K4 sigma / M) rho^3 + K2 rho^2 + (K3 sigma / M) rho = theta - K1
    found by bracketed bisection to 1e-12, with x* = +-sqrt(sigma rho*/M).
    The root always satisfies rho* >= min(T, T^(1/3)) with
    T = M(theta-K1) / (K4 sigma + K2 M + K3 sigma).
    """
    if theta <= params.K1:
        return EquilibriumSet(origin_only=True)
    a3 = params.K4 * params.sigma / params.M
    a2 = params.K2
    a1 = params.K3 * params.sigma / params.M
    target = theta - params.K1

    def f(rho):
        return ((a3 * rho + a2) * rho + a1) * rho - target

    lo, hi = 0.0, 1.0
    while f(hi) < 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    rho_star = 0.5 * (lo + hi)
    x_star = math.sqrt(params.sigma * rho_star / params.M)
    # residual of both equilibrium equations at (x*, rho*)
    e1 = (params.K1 - theta + params.K2 * rho_star ** 2) * x_star \
        + (params.K3 + params.K4 * rho_star ** 2) * x_star ** 3
    e2 = params.M * x_star ** 2 - params.sigma * rho_star
    T = params.M * target / (params.K4 * params.sigma + params.K2 * params.M
                             + params.K3 * params.sigma)
    lower = min(T, T ** (1.0 / 3.0))
    return EquilibriumSet(origin_only=False, rho_star=rho_star,
                          x_star_pair=(x_star, -x_star),
                          residual=max(abs(e1), abs(e2)), lower_bound=lower)


# ---------------------------------------------------------------------------
# decrease-rate floor and crude adapted-gain bound
# ---------------------------------------------------------------------------

def decay_rate_floor(design: ClfDesign, level: float, grid: GridSpec) -> float:
    """eta_bar = (3/4) inf{ Q(x)/V(x) : 0 < V(x) <= level } sampled on the grid."""
    if level <= 0.0:
        raise ConfigurationError("level must be positive")
    best = math.inf
    for x in grid.points():
        V = design.V_eval(x)
        if 0.0 < V <= level:
            best = min(best, design.Q_eval(x) / V)
    if not math.isfinite(best):
        raise ConfigurationError("no grid points found in the sublevel set")
    return 0.75 * best


def adapted_gain_crude_bound(design: ClfDesign, params: DadsParams, level_proxy: float,
                             s: float, grid: GridSpec) -> float:
    """Crude ceiling R(s) for the adapted state z:

        R(s) = ln( 1 + kappa^{-1}((s/(4 c r eta_bar) - 1)^+) + e^s
                   + (Gamma/eta_bar) * level_proxy )

    where eta_bar is the decrease-rate floor over the sublevel set
    V <= 1 + level_proxy, and level_proxy stands in for the (non-constructive)
    transient-plus-gain level. Deliberately loose.
    """
    if params.r is None:
        raise ConfigurationError("the crude gain bound needs the deadzone level r")
    eta_bar = decay_rate_floor(design, 1.0 + level_proxy, grid)
    inner = max(s / (4.0 * params.c * params.r * eta_bar) - 1.0, 0.0)
    return math.log(1.0 + params.kappa.inverse(inner) + math.exp(s)
                    + (params.Gamma / eta_bar) * level_proxy)


# ---------------------------------------------------------------------------
# counterexample drift witness
# ---------------------------------------------------------------------------

def drift_witness(traj: Trajectory, component_index: int, rate: float,
                  threshold: float, tol: float = 0.01) -> WitnessReport:
    """Verify that the named component climbs at >= rate*(1-tol) whenever the
    state sits inside the norm ball |x| <= threshold.

    Forward differences over consecutive stored samples are checked when both
    endpoints lie in the ball. A trajectory that never enters the ball passes
    vacuously and is reported as such.
    """
    if not 0 <= component_index < traj.states.shape[1]:
        raise ConfigurationError(f"component index {component_index} out of range")
    norms = traj.abs_x()
    inside = norms <= threshold
    first_entry = None
    if np.any(inside):
        first_entry = float(traj.times[int(np.argmax(inside))])
    comp = traj.states[:, component_index]
    slopes = np.diff(comp) / np.diff(traj.times)
    both = inside[:-1] & inside[1:]
    checked = int(both.sum())
    if checked == 0:
        return WitnessReport(passed=True, vacuous=True, first_entry_time=first_entry,
                             n_checked=0, worst_slope=None,
                             component_index=component_index, rate=rate,
                             threshold=threshold)
    worst = float(slopes[both].min())
    return WitnessReport(passed=bool(worst >= rate * (1.0 - tol)), vacuous=False,
                         first_entry_time=first_entry, n_checked=checked,
                         worst_slope=worst, component_index=component_index,
                         rate=rate, threshold=threshold)
