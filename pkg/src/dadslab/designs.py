"""Control-Lyapunov design data and grid certification.

A nonlinear design bundles (V, gradV, Q, k, mu): V a positive definite
radially unbounded function, k a nominal stabilizer with decrease rate Q
(gradV*(f+g*k) <= -Q), and mu >= 1 the damping weight that dominates the
regressor (|phi|^2 <= mu*Q). The linear design is the quadratic special
case around a stabilizable (A, B) pair: V = x'Px with
Q = -(A-Bk')'P - P(A-Bk') and a margin constant eta for x'Qx >= eta*x'Px.

All certification here is compact-set sampling on explicit boxes: the
design conditions are global statements, but a desk-scale check can only
sample, so every report records the box and resolution it used.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .errors import ConfigurationError, NumericFault

_ORIGIN_TOL = 1e-12
_MATRIX_TOL = 1e-10


# ---------------------------------------------------------------------------
# design containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClfDesign:
    """Nonlinear design quintuple (V, gradV, Q, k, mu).

    V(0) = Q(0) = k(0) = 0 is checked at construction (tolerance 1e-12) and
    mu(0) >= 1; mu >= 1 elsewhere is only checked where the design is sampled.
    """

    V_eval: Callable[[Sequence[float]], float]
    gradV_eval: Callable[[Sequence[float]], tuple]
    Q_eval: Callable[[Sequence[float]], float]
    k_eval: Callable[[Sequence[float]], float]
    mu_eval: Callable[[Sequence[float]], float]
    n: int
    label: str = "clf_design"

    def __post_init__(self):
        origin = (0.0,) * self.n
        for name, value in (("V", self.V_eval(origin)),
                            ("Q", self.Q_eval(origin)),
                            ("k", self.k_eval(origin))):
            if not math.isfinite(value):
                raise NumericFault(f"{self.label}: {name}(0) is not finite")
            if abs(value) > _ORIGIN_TOL:
                raise ConfigurationError(f"{self.label}: {name}(0) = {value} != 0")
        if self.mu_eval(origin) < 1.0:
            raise ConfigurationError(f"{self.label}: mu(0) < 1")
        if len(self.gradV_eval(origin)) != self.n:
            raise ConfigurationError(f"{self.label}: gradV must return {self.n}-vectors")


def _sym_tuple(M: np.ndarray) -> tuple:
    return tuple(tuple(float(v) for v in row) for row in M)


def quad_form(M: Sequence[Sequence[float]], x: Sequence[float]) -> float:
    """x'Mx for a small dense matrix given as nested sequences."""
    s = 0.0
    for i, row in enumerate(M):
        xi = x[i]
        for j, mij in enumerate(row):
            s += xi * mij * x[j]
    return s


@dataclass(frozen=True, eq=False)
class LinearDesign:
    """Quadratic design for x' = Ax + B(u + phi'theta + a*d).

    Validated at construction: P symmetric positive definite, A - Bk'
    Hurwitz, Q equal to -(A-Bk')'P - P(A-Bk') entrywise to 1e-10, and
    lambda_min_P equal to the smallest  eigenvalue of P to 1e-10.
    """

    A: np.ndarray
    B: np.ndarray
    k: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    eta: float
    mu_eval: Callable[[Sequence[float]], float]
    eps: float
    lambda_min_P: float
    label: str = "linear_design"
    # tuple mirrors of the matrices, used on the scalar fast paths
    P_t: tuple = field(init=False)
    Q_t: tuple = field(init=False)
    k_t: tuple = field(init=False)
    pB_t: tuple = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float).reshape(-1)
        k = np.asarray(self.k, dtype=float).reshape(-1)
        P = np.asarray(self.P, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        n = B.size
        if A.shape != (n, n) or P.shape != (n, n) or Q.shape != (n, n) or k.size != n:
            raise ConfigurationError(f"{self.label}: inconsistent matrix shapes")
        if not np.allclose(P, P.T, atol=_MATRIX_TOL):
            raise ConfigurationError(f"{self.label}: P is not symmetric")
        evP = np.linalg.eigvalsh(P)
        if evP[0] <= 0.0:
            raise ConfigurationError(f"{self.label}: P is not positive definite")
        if abs(self.lambda_min_P - evP[0]) > _MATRIX_TOL:
            raise ConfigurationError(
                f"{self.label}: lambda_min_P={self.lambda_min_P} but eig gives {evP[0]}")
        Acl = A - np.outer(B, k)
        if np.max(np.real(np.linalg.eigvals(Acl))) >= 0.0:
            raise ConfigurationError(f"{self.label}: A - Bk' is not Hurwitz")
        Qref = -(Acl.T @ P + P @ Acl)
        if np.max(np.abs(Q - Qref)) > _MATRIX_TOL:
            raise ConfigurationError(f"{self.label}: Q does not match -(A-Bk')'P - P(A-Bk')")
        if self.eta <= 0.0 or self.eps <= 0.0:
            raise ConfigurationError(f"{self.label}: eta and eps must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P_t", _sym_tuple(P))
        object.__setattr__(self, "Q_t", _sym_tuple(Q))
        object.__setattr__(self, "k_t", tuple(float(v) for v in k))
        object.__setattr__(self, "pB_t", tuple(float(v) for v in (P @ B)))

    @property
    def n(self) -> int:
        return self.B.size

    def V(self, x: Sequence[float]) -> float:
        return quad_form(self.P_t, x)

    def bPx(self, x: Sequence[float]) -> float:
        """B'Px, the control-channel component of the Lyapunov gradient."""
        return sum(pb * xi for pb, xi in zip(self.pB_t, x))

    def clf_view(self) -> ClfDesign:
        """The generic nonlinear view: V = x'Px, gradV = 2x'P, Q = x'Qx, k = -k'x."""
        P_t, Q_t, k_t, n = self.P_t, self.Q_t, self.k_t, self.n

        def grad(x, _P=P_t, _n=n):
            return tuple(2.0 * sum(_P[i][j] * x[j] for j in range(_n)) for i in range(_n))

        return ClfDesign(
            V_eval=lambda x, _P=P_t: quad_form(_P, x),
            gradV_eval=grad,
            Q_eval=lambda x, _Q=Q_t: quad_form(_Q, x),
            k_eval=lambda x, _k=k_t: -sum(ki * xi for ki, xi in zip(_k, x)),
            mu_eval=self.mu_eval,
            n=n,
            label=self.label + "_clf",
        )


# ---------------------------------------------------------------------------
# grids and certification reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Uniform sampling grid: one (lo, hi) interval per axis, shared resolution."""

    box: tuple
    resolution: int = 201

    def __post_init__(self):
        if self.resolution < 2:
            raise ConfigurationError("grid resolution must be >= 2")
        for lo, hi in self.box:
            if not lo < hi:
                raise ConfigurationError(f"bad grid interval ({lo}, {hi})")

    @property
    def n(self) -> int:
        return len(self.box)

    def contains_origin(self) -> bool:
        return all(lo <= 0.0 <= hi for lo, hi in self.box)

    def axes(self):
        return [np.linspace(lo, hi, self.resolution).tolist() for lo, hi in self.box]

    def points(self):
        """Iterate all grid points as tuples of floats."""
        return itertools.product(*self.axes())

    def radius(self) -> float:
        return max(max(abs(lo), abs(hi)) for lo, hi in self.box)

    def to_json_dict(self):
        return {"box": [[lo, hi] for lo, hi in self.box], "resolution": self.resolution}


@dataclass
class CertReport:
    """Outcome of one sampled certification: worst margin over the grid.

    passed is worst_margin >= -tolerance; tolerance defaults to 0 and is only
    loosened for identities that hold exactly up to rounding.
    """

    assumption: str
    grid: GridSpec
    worst_margin: float
    worst_point: tuple
    passed: bool
    tolerance: float = 0.0
    n_points: int = 0
    zeta_estimate: Optional["ZetaEnvelope"] = None

    def to_json_dict(self):
        return {
            "assumption": self.assumption,
            "box": [[lo, hi] for lo, hi in self.grid.box],
            "resolution": self.grid.resolution,
            "worst_margin": self.worst_margin,
            "worst_point": list(self.worst_point),
            "passed": self.passed,
        }


def _scan(grid: GridSpec, margin_fn, point_filter=None) -> CertReport:
    worst = math.inf
    worst_point = None
    count = 0
    for x in grid.points():
        if point_filter is not None and not point_filter(x):
            continue
        m = margin_fn(x)
        if not math.isfinite(m):
            raise NumericFault(f"non-finite certification margin at {x}", state=x)
        count += 1
        if m < worst:
            worst = m
            worst_point = x
    if count == 0:
        raise ConfigurationError("certification grid selected no points")
    return CertReport(assumption="", grid=grid, worst_margin=worst,
                      worst_point=worst_point, passed=False, n_points=count)


def certify_assumption(design: ClfDesign, plant, which: str, grid: GridSpec,
                       delta: float = None, eta: float = None,
                       tolerance: float = 0.0) -> CertReport:
    """Grid-check one of the design conditions A, B or C.

    A: gradV(x)*(f(x)+g(x)k(x)) <= -Q(x)        margin = -gradV*(f+gk) - Q
    B: |phi(x)|^2 <= mu(x)*Q(x)                 margin = mu*Q - |phi|^2
    C: Q(x) >= eta*V(x) on |x| <= delta         margin = Q - eta*V

    For C, delta defaults to the grid box radius and eta to 0.9 times the
    sampled infimum of Q/V near the origin.
    """
    if not grid.contains_origin():
        raise ConfigurationError("certification grid must contain the origin")
    if which == "A":
        def margin(x):
            grad = design.gradV_eval(x)
            f = plant.f_eval(x)
            g = plant.g_eval(x)
            kx = design.k_eval(x)
            drift = sum(gi * (fi + gg * kx) for gi, fi, gg in zip(grad, f, g))
            return -drift - design.Q_eval(x)
        report = _scan(grid, margin)
    elif which == "B":
        def margin(x):
            phi = plant.phi_eval(x)
            return design.mu_eval(x) * design.Q_eval(x) - sum(p * p for p in phi)
        report = _scan(grid, margin)
    elif which == "C":
        if delta is None:
            delta = grid.radius()
        if eta is None:
            eta = 0.9 * _inf_ratio_near_origin(design, grid, delta)
        def margin(x, _eta=eta):
            return design.Q_eval(x) - _eta * design.V_eval(x)
        def inside(x, _d=delta):
            return math.sqrt(sum(v * v for v in x)) <= _d
        report = _scan(grid, margin, point_filter=inside)
    else:
        raise ConfigurationError(f"unknown assumption '{which}' (expected A, B or C)")
    report.assumption = which
    report.tolerance = tolerance
    report.passed = report.worst_margin >= -tolerance
    return report


def _inf_ratio_near_origin(design: ClfDesign, grid: GridSpec, delta: float) -> float:
    """Sampled inf of Q/V over grid points with 0 < |x| <= delta/10 (fallback delta)."""
    for radius in (delta / 10.0, delta):
        best = math.inf
        for x in grid.points():
            r = math.sqrt(sum(v * v for v in x))
            if 0.0 < r <= radius:
                V = design.V_eval(x)
                if V > 0.0:
                    best = min(best, design.Q_eval(x) / V)
        if math.isfinite(best):
            return best
    raise ConfigurationError("no nonzero grid points available to estimate eta")


def certify_linear_margin(design: LinearDesign, grid: GridSpec,
                          eta: float = None, mu_eval=None, phi_eval=None,
                          tolerance: float = 0.0) -> CertReport:
    """Grid-check the linear-design margin condition (assumption id "2.17"):

        x'Qx >= eta*x'Px + |phi(x)|^2 / (4*mu(x))

    margin = x'Qx - eta*x'Px - |phi|^2/(4 mu). phi defaults to none (zero
    regressor); pass the plant's phi_eval to include it.
    """
    if not grid.contains_origin():
        raise ConfigurationError("certification grid must contain the origin")
    eta = design.eta if eta is None else float(eta)
    mu = design.mu_eval if mu_eval is None else mu_eval

    def margin(x):
        m = quad_form(design.Q_t, x) - eta * quad_form(design.P_t, x)
        if phi_eval is not None:
            phi = phi_eval(x)
            m -= sum(p * p for p in phi) / (4.0 * mu(x))
        return m

    report = _scan(grid, margin)
    report.assumption = "2.17"
    report.tolerance = tolerance
    report.passed = report.worst_margin >= -tolerance
    return report


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------

def lyapunov_Q_from(A, B, k, P) -> np.ndarray:
    """Q = -(A - Bk')'P - P(A - Bk')."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float).reshape(-1)
    k = np.asarray(k, dtype=float).reshape(-1)
    P = np.asarray(P, dtype=float)
    n = B.size
    if A.shape != (n, n) or P.shape != (n, n) or k.size != n:
        raise ConfigurationError("lyapunov_Q_from: inconsistent shapes")
    if not np.allclose(P, P.T, atol=_MATRIX_TOL):
        raise ConfigurationError("lyapunov_Q_from: P must be symmetric")
    Acl = A - np.outer(B, k)
    return -(Acl.T @ P + P @ Acl)


def mu_offset_plus_x1sq(offset: float):
    """mu(x) = offset + x1^2 (the damping-weight family used by the builtins)."""
    if offset < 1.0:
        raise ConfigurationError("mu offset must be >= 1")
    def mu(x, _c=float(offset)):
        return _c + x[0] * x[0]
    return mu


def make_example1_design() -> LinearDesign:
    """The planar benchmark design: double integrator with k = (5, 4),
    P = [[5,2],[2,1]]/2, Q = 4P, eta = 3, mu(x) = 2 + x1^2, eps = 0.2."""
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([0.0, 1.0])
    k = np.array([5.0, 4.0])
    P = 0.5 * np.array([[5.0, 2.0], [2.0, 1.0]])
    Q = lyapunov_Q_from(A, B, k, P)
    return LinearDesign(A=A, B=B, k=k, P=P, Q=Q, eta=3.0,
                        mu_eval=mu_offset_plus_x1sq(2.0), eps=0.2,
                        lambda_min_P=(3.0 - 2.0 * math.sqrt(2.0)) / 2.0,
                        label="example1")


def make_chain_design(n: int, poles=None, eps: float = 0.2) -> LinearDesign:
    """Pole-placement design for the n-integrator chain.

    Default poles -1..-n; P solves the Lyapunov equation for Q0 = I and eta
    is set to 0.9/lambda_max(P), which keeps x'Qx >= eta*x'Px with margin.
    """
    if poles is None:
        poles = [-(i + 1) for i in range(n)]
    coeffs = np.poly(np.asarray(poles, dtype=float))  # s^n + c1 s^{n-1} + ... + cn
    k = np.array([coeffs[n - i] for i in range(n)], dtype=float)
    A = np.zeros((n, n))
    for i in range(n - 1):
        A[i, i + 1] = 1.0
    B = np.zeros(n)
    B[-1] = 1.0
    Acl = A - np.outer(B, k)
    P = solve_continuous_lyapunov(Acl.T, -np.eye(n))
    P = 0.5 * (P + P.T)
    Q = lyapunov_Q_from(A, B, k, P)
    evP = np.linalg.eigvalsh(P)
    return LinearDesign(A=A, B=B, k=k, P=P, Q=Q, eta=0.9 / float(evP[-1]),
                        mu_eval=lambda x: 1.0, eps=eps,
                        lambda_min_P=float(evP[0]), label=f"chain{n}")


def make_scalar_design() -> ClfDesign:
    """Scalar design V = x^2/2, k(x) = -x, Q = x^2, mu = 1."""
    return ClfDesign(
        V_eval=lambda x: 0.5 * x[0] * x[0],
        gradV_eval=lambda x: (x[0],),
        Q_eval=lambda x: x[0] * x[0],
        k_eval=lambda x: -x[0],
        mu_eval=lambda x: 1.0,
        n=1,
        label="scalar",
    )


def builtin_design(name: str):
    """Designs referencable by name from scenario files."""
    if name == "example1":
        return make_example1_design()
    if name == "example1_clf":
        return make_example1_design().clf_view()
    if name == "scalar":
        return make_scalar_design()
    if name.startswith("chain"):
        try:
            n = int(name[len("chain"):])
        except ValueError:
            raise ConfigurationError(f"unknown design '{name}'") from None
        return make_chain_design(n)
    raise ConfigurationError(f"unknown design '{name}'")


# ---------------------------------------------------------------------------
# decrease-rate envelope over level sets
# ---------------------------------------------------------------------------

@dataclass
class ZetaEnvelope:
    """Sampled lower envelope of Q over V-level sets.

    raw[k] estimates inf{Q(x) : V(x) = levels[k]} as
    levels[k] * inf{Q(x)/V(x) : |V(x) - levels[k]| <= band}; the level-
    normalized form is exact for proportional (Q, V) pairs and first-order
    accurate otherwise. Empty bands are NaN markers. hull is the largest
    non-decreasing minorant of raw, which is the usable class-Kinf estimate.
    """

    levels: np.ndarray
    raw: np.ndarray
    hull: np.ndarray
    band: float

    def level_floor(self, target: float):
        """Smallest level L with hull(L) >= target, linearly interpolated.

        Returns None when the envelope never reaches the target.
        """
        ok = np.where(np.isfinite(self.hull) & (self.hull >= target))[0]
        if ok.size == 0:
            return None
        j = int(ok[0])
        if j == 0 or not math.isfinite(self.hull[j - 1]):
            return float(self.levels[j])
        lo_v, hi_v = self.hull[j - 1], self.hull[j]
        lo_l, hi_l = self.levels[j - 1], self.levels[j]
        if hi_v <= lo_v:
            return float(self.levels[j])
        w = (target - lo_v) / (hi_v - lo_v)
        return float(lo_l + w * (hi_l - lo_l))


def zeta_envelope(design: ClfDesign, grid: GridSpec, level_max: float,
                  n_levels: int = 64) -> ZetaEnvelope:
    """Sample inf Q over V-level sets on a ladder of levels in [0, level_max]."""
    if level_max <= 0.0:
        raise ConfigurationError("level_max must be positive")
    if n_levels < 2:
        raise ConfigurationError("need at least two levels")
    levels = np.linspace(0.0, level_max, n_levels)
    spacing = levels[1] - levels[0]
    band = 0.5 * spacing
    best_ratio = np.full(n_levels, np.inf)
    for x in grid.points():
        V = design.V_eval(x)
        if not 0.0 < V <= level_max + band:
            continue
        kk = int(round(V / spacing))
        if kk <= 0 or kk >= n_levels:
            continue
        ratio = design.Q_eval(x) / V
        if ratio < best_ratio[kk]:
            best_ratio[kk] = ratio
    raw = levels * best_ratio
    raw[0] = 0.0  # V and Q both vanish at the origin
    raw[np.isinf(raw)] = np.nan
    hull = raw.copy()
    running = np.nan
    for kk in range(n_levels - 1, -1, -1):
        if math.isfinite(hull[kk]):
            running = hull[kk] if not math.isfinite(running) else min(running, hull[kk])
        hull[kk] = running
    return ZetaEnvelope(levels=levels, raw=raw, hull=hull, band=float(band))
