"""Closed-loop composition and integration.

A Scenario wires a plant, a design, one control law and a disturbance into
an autonomous augmented ODE (plant state plus adapted state) and integrate()
produces a sampled Trajectory. The default solver is classical fixed-step
rk4 at dt = 1e-4: the adapted damping gain makes the loop moderately stiff
near t = 0, and that step is validated by step-halving in the acceptance
tests. The deadzone positive-part makes the right-hand side locally
Lipschitz but not smooth; no event detection is used, the Runge-Kutta
stages step straight through the kink.

integrate() is a pure function of its Scenario: identical scenarios give
bit-identical trajectories, and many scenarios can run concurrently since
nothing here mutates shared state. Blowups do not raise: the trajectory is
returned truncated at the last finite sample, because the counterexample
demos rely on observing divergence.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import controllers as ctrl
from .designs import ClfDesign, LinearDesign, quad_form
from .errors import ConfigurationError, NumericFault
from .plants import MismatchedPlant, PlantSpec, rhs_matched, rhs_mismatched

DEFAULT_DT = 1e-4
DEFAULT_STRIDE = 10
DEFAULT_BLOWUP_GUARD = 1e8

# adapted-state dimension per control law; sigma_mod is the plant's p
_ADAPTED_DIM = {"dads": 1, "dads_linear": 1, "robust": 0, "sigma_mod": None, "no_deadzone": 1}


def default_dt() -> float:
    """Default fixed step; the environment variable DADS_SEED_DT overrides it."""
    raw = os.environ.get("DADS_SEED_DT")
    if raw is None:
        return DEFAULT_DT
    try:
        dt = float(raw)
    except ValueError:
        raise ConfigurationError(f"DADS_SEED_DT={raw!r} is not a number") from None
    if dt <= 0.0:
        raise ConfigurationError("DADS_SEED_DT must be positive")
    return dt


# ---------------------------------------------------------------------------
# disturbances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisturbanceSignal:
    """Parametric scalar disturbance: zero, constant, sinusoid or a sum.

    sup_norm is the analytic essential supremum (for sums, the sum of the
    terms' suprema, an upper bound attained for commensurate phases).
    """

    kind: str = "zero"
    value: float = 0.0
    amplitude: float = 0.0
    angular_frequency: float = 0.0
    phase: float = 0.0
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "sinusoid", "sum"):
            raise ConfigurationError(f"unknown disturbance kind '{self.kind}'")

    @property
    def sup_norm(self) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(self.value)
        if self.kind == "sinusoid":
            return abs(self.amplitude)
        return sum(t.sup_norm for t in self.terms)

    def __call__(self, t: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.value
        if self.kind == "sinusoid":
            return self.amplitude * math.cos(self.angular_frequency * t + self.phase)
        return sum(term(t) for term in self.terms)

    def to_config(self):
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "sinusoid":
            return {"kind": "sinusoid", "amplitude": self.amplitude,
                    "angular_frequency": self.angular_frequency, "phase": self.phase}
        return {"kind": "sum", "terms": [t.to_config() for t in self.terms]}

    @staticmethod
    def from_config(cfg) -> "DisturbanceSignal":
        if not isinstance(cfg, dict) or "kind" not in cfg:
            raise ConfigurationError(f"bad disturbance config {cfg!r}")
        kind = cfg["kind"]
        if kind == "zero":
            return DisturbanceSignal()
        if kind == "constant":
            return DisturbanceSignal(kind="constant", value=float(cfg["value"]))
        if kind == "sinusoid":
            return DisturbanceSignal(kind="sinusoid", amplitude=float(cfg["amplitude"]),
                                     angular_frequency=float(cfg["angular_frequency"]),
                                     phase=float(cfg.get("phase", 0.0)))
        if kind == "sum":
            return DisturbanceSignal(
                kind="sum",
                terms=tuple(DisturbanceSignal.from_config(t) for t in cfg["terms"]))
        raise ConfigurationError(f"unknown disturbance kind '{kind}'")


def eval_disturbance(d: DisturbanceSignal, t: float) -> float:
    """Pointwise disturbance value d(t)."""
    return d(t)


# ---------------------------------------------------------------------------
# scenario and trajectory containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    """Integration settings. rk4_fixed uses dt; rk45_adaptive uses the
    tolerance pair plus dt_max. The blowup guard truncates once the norm
    of the augmented state reaches it."""

    method: str = "rk4_fixed"
    dt: float = DEFAULT_DT
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    dt_max: float = 1e-2
    blowup_guard: float = DEFAULT_BLOWUP_GUARD

    def __post_init__(self):
        if self.method not in ("rk4_fixed", "rk45_adaptive"):
            raise ConfigurationError(f"unknown solver method '{self.method}'")
        if min(self.dt, self.rel_tol, self.abs_tol, self.dt_max, self.blowup_guard) <= 0.0:
            raise ConfigurationError("solver parameters must be positive")


@dataclass(frozen=True, eq=False)
class Scenario:
    """One closed-loop experiment: plant + design + control law + disturbance
    + initial condition + horizon + solver.

    controller_plant is the matched plant the control law was designed for;
    it defaults to the simulated plant and must be given explicitly when the
    simulated plant is mismatched (counterexample demos).
    """

    plant: object                     # PlantSpec or MismatchedPlant
    design: object                    # ClfDesign or LinearDesign
    controller_kind: str
    controller_params: object
    theta: tuple
    disturbance: DisturbanceSignal
    x0: tuple
    adapted0: tuple
    t_end: float
    solver: SolverConfig = field(default_factory=SolverConfig)
    stride: int = DEFAULT_STRIDE
    controller_plant: Optional[PlantSpec] = None
    label: str = "scenario"
    allow_blowup: bool = False
    raw_config: Optional[dict] = None

    def __post_init__(self):
        if self.controller_kind not in _ADAPTED_DIM:
            raise ConfigurationError(f"unknown controller type '{self.controller_kind}'")
        if self.t_end <= 0.0:
            raise ConfigurationError("t_end must be positive")
        if self.stride < 1:
            raise ConfigurationError("output stride must be >= 1")
        plant = self.plant
        if len(self.x0) != plant.n:
            raise ConfigurationError(f"x0 has dim {len(self.x0)}, plant needs {plant.n}")
        if len(self.theta) != plant.p:
            raise ConfigurationError(f"theta has dim {len(self.theta)}, plant needs {plant.p}")
        cp = self.controller_plant
        if isinstance(plant, MismatchedPlant):
            if cp is None:
                raise ConfigurationError(
                    "mismatched plants need an explicit controller_plant (assumed matched model)")
        elif cp is None:
            object.__setattr__(self, "controller_plant", plant)
            cp = plant
        if cp.n != plant.n:
            raise ConfigurationError("controller_plant dimension differs from the simulated plant")
        m = _ADAPTED_DIM[self.controller_kind]
        if m is None:  # sigma_mod adapts one estimate per regressor component
            m = cp.p
        if len(self.adapted0) != m:
            raise ConfigurationError(
                f"adapted0 has dim {len(self.adapted0)}, controller needs {m}")
        if self.controller_kind == "no_deadzone" and plant.n != 1:
            raise ConfigurationError("the no-deadzone foil is defined for scalar plants only")
        kind_design = {"dads": ClfDesign, "robust": ClfDesign, "sigma_mod": ClfDesign,
                       "no_deadzone": ClfDesign, "dads_linear": LinearDesign}
        if not isinstance(self.design, kind_design[self.controller_kind]):
            raise ConfigurationError(
                f"controller '{self.controller_kind}' needs a "
                f"{kind_design[self.controller_kind].__name__}")

    @property
    def adapted_dim(self) -> int:
        return len(self.adapted0)

    def V_of(self, x) -> float:
        if isinstance(self.design, LinearDesign):
            return quad_form(self.design.P_t, x)
        return self.design.V_eval(x)


@dataclass(eq=False)
class Trajectory:
    """Sampled closed-loop solution on a strictly increasing time grid.

    adapted holds z for the deadzone laws, the parameter estimates for the
    leakage law, rho for the no-deadzone foil, and is empty for the static
    robust law. A truncated trajectory ends at the last finite sample and
    carries the truncation index in place of raising.
    """

    times: np.ndarray
    states: np.ndarray
    adapted: np.ndarray
    controls: np.ndarray
    V_values: np.ndarray
    d_values: np.ndarray
    controller_kind: str
    metadata: dict = field(default_factory=dict)
    truncated: bool = False
    truncation_index: Optional[int] = None

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def rho(self) -> np.ndarray:
        """exp(z) for the deadzone-adapted laws, rho itself for the foil."""
        if self.controller_kind in ("dads", "dads_linear"):
            return np.exp(self.adapted[:, 0])
        if self.controller_kind == "no_deadzone":
            return self.adapted[:, 0].copy()
        raise ConfigurationError(f"no adapted gain for controller '{self.controller_kind}'")

    def abs_x(self) -> np.ndarray:
        return np.sqrt(np.sum(self.states * self.states, axis=1))


# ---------------------------------------------------------------------------
# right-hand side composition
# ---------------------------------------------------------------------------

def _control_fn(scenario: Scenario) -> Callable:
    """(x, adapted) -> u for the scenario's control law."""
    design = scenario.design
    cp = scenario.controller_plant
    params = scenario.controller_params
    kind = scenario.controller_kind
    if kind == "dads":
        return lambda x, a: ctrl.dads_u(design, cp, params, x, a[0])
    if kind == "dads_linear":
        return lambda x, a: ctrl.dads_linear_u(design, cp, params, x, a[0])
    if kind == "robust":
        return lambda x, a: ctrl.robust_u(design, cp, params, x)
    if kind == "sigma_mod":
        return lambda x, a: ctrl.sigma_u(design, cp, params, x, a)
    if kind == "no_deadzone":
        return lambda x, a: ctrl.nodeadzone_u(params, x[0], a[0])
    raise ConfigurationError(f"unknown controller type '{kind}'")


def _adapted_dot_fn(scenario: Scenario) -> Callable:
    """(x, adapted) -> adapted-state derivative tuple."""
    design = scenario.design
    cp = scenario.controller_plant
    params = scenario.controller_params
    kind = scenario.controller_kind
    if kind == "dads":
        return lambda x, a: (ctrl.dads_zdot(design, params, x, a[0]),)
    if kind == "dads_linear":
        return lambda x, a: (ctrl.dads_linear_zdot(design, params, x, a[0]),)
    if kind == "robust":
        return lambda x, a: ()
    if kind == "sigma_mod":
        return lambda x, a: ctrl.sigma_thetahat_dot(design, cp, params, x, a)
    if kind == "no_deadzone":
        return lambda x, a: (ctrl.nodeadzone_rhodot(params, x[0], a[0]),)
    raise ConfigurationError(f"unknown controller type '{kind}'")


def _make_rhs(scenario: Scenario) -> Callable:
    plant = scenario.plant
    theta = scenario.theta
    dist = scenario.disturbance
    n = plant.n
    u_fn = _control_fn(scenario)
    a_fn = _adapted_dot_fn(scenario)
    mismatched = isinstance(plant, MismatchedPlant)

    def rhs(t, y):
        x = y[:n]
        a = y[n:]
        d = dist(t)
        u = u_fn(x, a)
        if mismatched:
            dx = rhs_mismatched(plant, x, u, theta, d)
        else:
            dx = rhs_matched(plant, x, u, theta, d)
        da = a_fn(x, a)
        out = dx + da
        for v in out:
            if not math.isfinite(v):
                raise NumericFault("non-finite closed-loop derivative", t=t, state=tuple(y))
        return out

    return rhs


def closed_loop_rhs(scenario: Scenario, t: float, augmented_state: Sequence[float]) -> tuple:
    """Derivative of the augmented state (x, adapted) at time t."""
    y = tuple(augmented_state)
    if len(y) != scenario.plant.n + scenario.adapted_dim:
        raise ConfigurationError(
            f"augmented state has dim {len(y)}, expected "
            f"{scenario.plant.n + scenario.adapted_dim}")
    return _make_rhs(scenario)(t, y)


# ---------------------------------------------------------------------------
# integrators
# ---------------------------------------------------------------------------

def _norm(y) -> float:
    return math.sqrt(sum(v * v for v in y))


def _finite(y) -> bool:
    return all(math.isfinite(v) for v in y)


def _rk4_samples(rhs, y0, t_end, dt, stride, guard):
    """Fixed-step classical rk4. Returns (samples, truncated, steps_done)."""
    y = tuple(y0)
    m = len(y)
    n_steps = max(1, round(t_end / dt))
    samples = [(0.0, y)]
    truncated = False
    steps_done = 0
    for i in range(n_steps):
        t = i * dt
        try:
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * dt, tuple(y[j] + 0.5 * dt * k1[j] for j in range(m)))
            k3 = rhs(t + 0.5 * dt, tuple(y[j] + 0.5 * dt * k2[j] for j in range(m)))
            k4 = rhs(t + dt, tuple(y[j] + dt * k3[j] for j in range(m)))
        except NumericFault:
            truncated = True
            break
        y_new = tuple(y[j] + (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                      for j in range(m))
        if not _finite(y_new) or _norm(y_new) >= guard:
            truncated = True
            break
        y = y_new
        steps_done = i + 1
        if steps_done % stride == 0:
            samples.append((steps_done * dt, y))
    if steps_done % stride != 0:
        samples.append((steps_done * dt, y))
    return samples, truncated, steps_done


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_DP_B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0)
_DP_B4 = (5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0,
          187.0 / 2100.0, 1.0 / 40.0)


def _rk45_samples(rhs, y0, t_end, cfg: SolverConfig, stride):
    """Embedded Dormand-Prince 5(4) with elementary step control."""
    y = tuple(y0)
    m = len(y)
    t = 0.0
    h = min(cfg.dt_max, t_end / 10.0)
    samples = [(0.0, y)]
    truncated = False
    accepted = 0
    rejected = 0
    while t < t_end:
        h = min(h, t_end - t)
        try:
            ks = []
            for s in range(7):
                ys = tuple(y[j] + h * sum(_DP_A[s][r] * ks[r][j] for r in range(s))
                           for j in range(m))
                ks.append(rhs(t + _DP_C[s] * h, ys))
        except NumericFault:
            truncated = True
            break
        y5 = tuple(y[j] + h * sum(_DP_B5[s] * ks[s][j] for s in range(7)) for j in range(m))
        y4 = tuple(y[j] + h * sum(_DP_B4[s] * ks[s][j] for s in range(7)) for j in range(m))
        if not _finite(y5):
            truncated = True
            break
        err = 0.0
        for j in range(m):
            scale = cfg.abs_tol + cfg.rel_tol * max(abs(y[j]), abs(y5[j]))
            err += ((y5[j] - y4[j]) / scale) ** 2
        err = math.sqrt(err / m)
        if err <= 1.0:
            if _norm(y5) >= cfg.blowup_guard:
                truncated = True
                break
            t += h
            y = y5
            accepted += 1
            if accepted % stride == 0 or t >= t_end:
                samples.append((t, y))
        else:
            rejected += 1
        factor = 0.9 * (err ** -0.2) if err > 0.0 else 5.0
        h = min(cfg.dt_max, h * min(5.0, max(0.2, factor)))
        if h <= 1e-15:
            truncated = True
            break
    if samples[-1][0] < t:
        samples.append((t, y))
    return samples, truncated, accepted, rejected


def integrate(scenario: Scenario) -> Trajectory:
    """Integrate the closed loop and sample it at the output stride."""
    rhs = _make_rhs(scenario)
    y0 = tuple(scenario.x0) + tuple(scenario.adapted0)
    if not _finite(y0):
        raise ConfigurationError("non-finite initial condition")
    cfg = scenario.solver
    stats = {"method": cfg.method, "label": scenario.label}
    if cfg.method == "rk4_fixed":
        samples, truncated, steps = _rk4_samples(
            rhs, y0, scenario.t_end, cfg.dt, scenario.stride, cfg.blowup_guard)
        stats.update(dt=cfg.dt, steps=steps)
    else:
        samples, truncated, accepted, rejected = _rk45_samples(
            rhs, y0, scenario.t_end, cfg, scenario.stride)
        stats.update(accepted_steps=accepted, rejected_steps=rejected,
                     rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)

    n = scenario.plant.n
    u_fn = _control_fn(scenario)
    times = np.array([t for t, _ in samples])
    states = np.array([y[:n] for _, y in samples])
    adapted = np.array([y[n:] for _, y in samples]).reshape(len(samples), -1)
    controls = np.empty(len(samples))
    V_values = np.empty(len(samples))
    d_values = np.empty(len(samples))
    for i, (t, y) in enumerate(samples):
        x, a = y[:n], y[n:]
        try:
            controls[i] = u_fn(x, a)
        except (OverflowError, NumericFault):
            controls[i] = math.nan
        V_values[i] = scenario.V_of(x)
        d_values[i] = scenario.disturbance(t)
    if truncated:
        stats["truncated_at_t"] = float(times[-1])
    return Trajectory(times=times, states=states, adapted=adapted, controls=controls,
                      V_values=V_values, d_values=d_values,
                      controller_kind=scenario.controller_kind, metadata=stats,
                      truncated=truncated,
                      truncation_index=(len(samples) - 1) if truncated else None)


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

def trajectory_columns(traj: Trajectory):
    n = traj.states.shape[1]
    m = traj.adapted.shape[1]
    names = ["t"] + [f"x{i+1}" for i in range(n)] + [f"adapted{i+1}" for i in range(m)]
    with_rho = traj.controller_kind in ("dads", "dads_linear")
    if with_rho:
        names.append("rho")
    names += ["u", "V", "d"]
    return names, with_rho


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """One row per stored sample, floats at 17 significant digits."""
    names, with_rho = trajectory_columns(traj)
    cols = [traj.times, *traj.states.T, *traj.adapted.T]
    if with_rho:
        cols.append(np.exp(traj.adapted[:, 0]))
    cols += [traj.controls, traj.V_values, traj.d_values]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(traj.n_samples):
            fh.write(",".join("%.17g" % col[i] for col in cols) + "\n")


def read_trajectory_csv(path, controller_kind: str) -> Trajectory:
    """Read back a trajectory written by write_trajectory_csv."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ConfigurationError(f"malformed trajectory CSV {path}")
    idx = {name: j for j, name in enumerate(header)}
    n = sum(1 for name in header if name.startswith("x") and name[1:].isdigit())
    m = sum(1 for name in header if name.startswith("adapted"))
    return Trajectory(
        times=data[:, idx["t"]],
        states=data[:, [idx[f"x{i+1}"] for i in range(n)]],
        adapted=data[:, [idx[f"adapted{i+1}"] for i in range(m)]].reshape(data.shape[0], m),
        controls=data[:, idx["u"]],
        V_values=data[:, idx["V"]],
        d_values=data[:, idx["d"]],
        controller_kind=controller_kind,
        metadata={"source": str(path)},
    )
