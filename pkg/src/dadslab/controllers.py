"""The five control laws as pure evaluators.

Each operation maps (design, plant, parameters, state, adapted state) to a
control value or an adapted-state derivative. Nothing here owns state: the
adapted variable lives in the integrator's augmented state vector, and
identical inputs always give bit-identical outputs.

The deadzone-adapted laws ("dads") combine nonlinear damping with a single
monotone gain: the damping factor c*(1 + kappa(exp(z))) grows while the
Lyapunov level sits above the deadzone, and the update law freezes (exactly)
once the state enters the target sublevel set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .designs import ClfDesign, LinearDesign, quad_form
from .errors import ConfigurationError
from .plants import PlantSpec


@dataclass(frozen=True)
class KappaFn:
    """Smooth class-Kinf gain shape: power(q) means kappa(s) = s**q.

    of_exp computes kappa(exp(z)) through the exponent (exp(q*z) for the
    power kind), which avoids forming exp(z) first and overflowing for
    fractional powers.
    """

    kind: str = "power"
    q: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "identity"):
            raise ConfigurationError(f"unknown kappa kind '{self.kind}'")
        if self.kind == "power" and self.q <= 0.0:
            raise ConfigurationError("power kappa needs q > 0")

    def __call__(self, s: float) -> float:
        return s ** self.q if self.kind == "power" else s

    def inverse(self, s: float) -> float:
        return s ** (1.0 / self.q) if self.kind == "power" else s

    def of_exp(self, z: float) -> float:
        """kappa(exp(z))."""
        return math.exp(self.q * z) if self.kind == "power" else math.exp(z)

    def to_config(self):
        return {"kind": self.kind, "q": self.q} if self.kind == "power" else {"kind": "identity"}

    @staticmethod
    def from_config(cfg) -> "KappaFn":
        if not isinstance(cfg, dict) or "kind" not in cfg:
            raise ConfigurationError(f"bad kappa config {cfg!r}")
        if cfg["kind"] == "identity":
            return KappaFn(kind="identity")
        if cfg["kind"] == "power":
            return KappaFn(kind="power", q=float(cfg.get("q", 1.0)))
        raise ConfigurationError(f"unknown kappa kind '{cfg['kind']}'")


@dataclass(frozen=True)
class DadsParams:
    """Deadzone-adapted damping parameters.

    The deadzone level is given either as r (directly on V, nonlinear form)
    or as eps (target state radius, linear form with threshold
    lambda_min(P)*eps^2). Gamma is the adaptation rate, c the damping gain,
    lam the regulation weight (lam = 0 disables the mu term).
    """

    Gamma: float
    c: float
    lam: float = 0.0
    kappa: KappaFn = field(default_factory=lambda: KappaFn("power", 2.0))
    r: Optional[float] = None
    eps: Optional[float] = None

    def __post_init__(self):
        if self.Gamma <= 0.0 or self.c <= 0.0 or self.lam < 0.0:
            raise ConfigurationError("need Gamma > 0, c > 0, lam >= 0")
        if self.r is None and self.eps is None:
            raise ConfigurationError("one of r (deadzone level) or eps (target radius) is required")
        if self.r is not None and self.r <= 0.0:
            raise ConfigurationError("deadzone level r must be positive")
        if self.eps is not None and self.eps <= 0.0:
            raise ConfigurationError("target radius eps must be positive")


@dataclass(frozen=True)
class SigmaModParams:
    """Leakage-adaptation parameters: damping gain c, leakage sigma,
    symmetric positive definite adaptation matrix Gamma (p x p)."""

    c: float
    sigma: float
    Gamma: np.ndarray

    def __post_init__(self):
        if self.c <= 0.0 or self.sigma < 0.0:
            raise ConfigurationError("need c > 0 and sigma >= 0")
        G = np.atleast_2d(np.asarray(self.Gamma, dtype=float))
        if G.shape[0] != G.shape[1]:
            raise ConfigurationError("adaptation matrix Gamma must be square")
        if not np.allclose(G, G.T, atol=1e-12):
            raise ConfigurationError("adaptation matrix Gamma must be symmetric")
        if np.linalg.eigvalsh(G)[0] <= 0.0:
            raise ConfigurationError("adaptation matrix Gamma must be positive definite")
        object.__setattr__(self, "Gamma", G)

    @property
    def p(self) -> int:
        return self.Gamma.shape[0]

    @staticmethod
    def diagonal(c: float, sigma: float, gains: Sequence[float]) -> "SigmaModParams":
        return SigmaModParams(c=c, sigma=sigma, Gamma=np.diag([float(g) for g in gains]))


@dataclass(frozen=True)
class RobustParams:
    """Static nonlinear-damping parameters: gain c > 1/4 and the assumed
    parameter-norm bound rho_bound."""

    c: float
    rho_bound: float

    def __post_init__(self):
        if self.c <= 0.25:
            raise ConfigurationError("robust damping needs c > 1/4")
        if self.rho_bound < 0.0:
            raise ConfigurationError("rho_bound must be >= 0")


@dataclass(frozen=True)
class NoDeadzoneParams:
    """Scalar foil without a deadzone: u = -(K1+K2 rho^2)x - (K3+K4 rho^2)x^3,
    rho' = M x^2 - sigma rho. All constants positive."""

    K1: float
    K2: float
    K3: float
    K4: float
    M: float
    sigma: float

    def __post_init__(self):
        for name in ("K1", "K2", "K3", "K4", "M", "sigma"):
            if getattr(self, name) <= 0.0:
                raise ConfigurationError(f"no-deadzone parameter {name} must be positive")


# ---------------------------------------------------------------------------
# control laws
# ---------------------------------------------------------------------------

def _grad_dot_g(design: ClfDesign, plant: PlantSpec, x) -> float:
    grad = design.gradV_eval(x)
    g = plant.g_eval(x)
    return sum(gr * gg for gr, gg in zip(grad, g))


def _damping_weight(plant: PlantSpec, mu_eval, lam: float, x) -> float:
    """|phi(x)|^2 + lam^2 mu(x) + a(x)^2."""
    phi = plant.phi_eval(x)
    a = plant.a_eval(x)
    w = sum(p * p for p in phi) + a * a
    if lam:
        w += lam * lam * mu_eval(x)
    return w


def dads_u(design: ClfDesign, plant: PlantSpec, params: DadsParams, x, z: float) -> float:
    """u = k(x) - c(1 + kappa(e^z))(|phi|^2 + lam^2 mu + a^2) gradV(x).g(x)."""
    gain = params.c * (1.0 + params.kappa.of_exp(z))
    return design.k_eval(x) - gain * _damping_weight(plant, design.mu_eval, params.lam, x) \
        * _grad_dot_g(design, plant, x)


def dads_zdot(design: ClfDesign, params: DadsParams, x, z: float) -> float:
    """z' = Gamma exp(-z) (V(x) - r)^+; zero inside the deadzone, never negative."""
    if params.r is None:
        raise ConfigurationError("dads_zdot needs the deadzone level r")
    excess = design.V_eval(x) - params.r
    return params.Gamma * math.exp(-z) * excess if excess > 0.0 else 0.0


def dads_linear_u(design: LinearDesign, plant: PlantSpec, params: DadsParams,
                  x, z: float) -> float:
    """u = -k'x - 2c(1 + kappa(e^z))(|phi|^2 + lam^2 mu + a^2) B'Px."""
    gain = 2.0 * params.c * (1.0 + params.kappa.of_exp(z))
    kx = sum(ki * xi for ki, xi in zip(design.k_t, x))
    return -kx - gain * _damping_weight(plant, design.mu_eval, params.lam, x) * design.bPx(x)


def dads_linear_zdot(design: LinearDesign, params: DadsParams, x, z: float) -> float:
    """z' = Gamma exp(-z) (x'Px - lambda_min(P) eps^2)^+."""
    if params.eps is None:
        raise ConfigurationError("dads_linear_zdot needs the target radius eps")
    excess = quad_form(design.P_t, x) - design.lambda_min_P * params.eps * params.eps
    return params.Gamma * math.exp(-z) * excess if excess > 0.0 else 0.0


def robust_u(design: ClfDesign, plant: PlantSpec, params: RobustParams, x) -> float:
    """u = k(x) - c(rho^2 mu(x) + a^2(x)) gradV(x).g(x)."""
    a = plant.a_eval(x)
    w = params.rho_bound * params.rho_bound * design.mu_eval(x) + a * a
    return design.k_eval(x) - params.c * w * _grad_dot_g(design, plant, x)


def sigma_u(design: ClfDesign, plant: PlantSpec, params: SigmaModParams,
            x, theta_hat) -> float:
    """u = k(x) - phi(x)'theta_hat - c a^2(x) gradV(x).g(x)."""
    if len(theta_hat) != plant.p:
        raise ConfigurationError(f"theta_hat has dim {len(theta_hat)}, expected {plant.p}")
    phi = plant.phi_eval(x)
    a = plant.a_eval(x)
    u = design.k_eval(x) - params.c * a * a * _grad_dot_g(design, plant, x)
    for k in range(plant.p):
        u -= phi[k] * theta_hat[k]
    return u


def sigma_thetahat_dot(design: ClfDesign, plant: PlantSpec, params: SigmaModParams,
                       x, theta_hat) -> tuple:
    """theta_hat' = (gradV.g) Gamma phi(x) - sigma theta_hat."""
    if len(theta_hat) != plant.p:
        raise ConfigurationError(f"theta_hat has dim {len(theta_hat)}, expected {plant.p}")
    phi = plant.phi_eval(x)
    gv = _grad_dot_g(design, plant, x)
    G = params.Gamma
    p = plant.p
    return tuple(gv * sum(G[i, j] * phi[j] for j in range(p)) - params.sigma * theta_hat[i]
                 for i in range(p))


def nodeadzone_u(params: NoDeadzoneParams, x: float, rho: float) -> float:
    """u = -(K1 + K2 rho^2) x - (K3 + K4 rho^2) x^3 (scalar plant only)."""
    r2 = rho * rho
    return -(params.K1 + params.K2 * r2) * x - (params.K3 + params.K4 * r2) * x ** 3


def nodeadzone_rhodot(params: NoDeadzoneParams, x: float, rho: float) -> float:
    """rho' = M x^2 - sigma rho."""
    return params.M * x * x - params.sigma * rho


def regulation_threshold(params: DadsParams, theta_norm: float):
    """Gain level beyond which the damping fully dominates the parameter term:
    kappa(e^z) >= (|theta|^2 - c lam^2) / (c lam^2).

    Once the adapted gain crosses this value the loop regulates to zero in the
    disturbance-free case instead of just practically. Undefined for lam = 0
    (returns None).
    """
    if params.lam == 0.0:
        return None
    clam2 = params.c * params.lam * params.lam
    return (theta_norm * theta_norm - clam2) / clam2
