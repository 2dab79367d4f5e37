"""Open-loop plant families and their right-hand sides.

Matched plants have the form

    x' = f(x) + g(x) * (u + phi(x)'theta + a(x) * d)

so the unknown parameter vector theta and the scalar disturbance d enter
through the same channel as the control u. Mismatched plants (used only for
counterexample demos) carry an arbitrary rhs(x, u, theta, d).

Evaluators take any float sequence for x and return plain tuples/floats;
they must be pure, which makes every plant object safe to share across
concurrently running scenarios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ConfigurationError, NumericFault

Vec = Sequence[float]

_ORIGIN_TOL = 1e-12


def _all_finite(values) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class PlantSpec:
    """Matched plant: evaluators for f, g, phi, a plus dimension metadata.

    Invariants checked at construction: f(0) = 0 and phi(0) = 0 (tolerance
    1e-12), and all evaluators return finite values at the origin.
    """

    n: int
    p: int
    f_eval: Callable[[Vec], tuple]
    g_eval: Callable[[Vec], tuple]
    phi_eval: Callable[[Vec], tuple]
    a_eval: Callable[[Vec], float]
    label: str = "plant"

    def __post_init__(self):
        if self.n <= 0 or self.p < 0:
            raise ConfigurationError(f"bad dimensions n={self.n}, p={self.p}")
        origin = (0.0,) * self.n
        f0 = self.f_eval(origin)
        phi0 = self.phi_eval(origin)
        g0 = self.g_eval(origin)
        a0 = self.a_eval(origin)
        if len(f0) != self.n or len(g0) != self.n:
            raise ConfigurationError(f"{self.label}: f/g must return {self.n}-vectors")
        if len(phi0) != self.p:
            raise ConfigurationError(f"{self.label}: phi must return {self.p}-vectors")
        if not (_all_finite(f0) and _all_finite(g0) and _all_finite(phi0) and math.isfinite(a0)):
            raise NumericFault(f"{self.label}: non-finite evaluator output at the origin")
        if any(abs(v) > _ORIGIN_TOL for v in f0):
            raise ConfigurationError(f"{self.label}: f(0) = {f0} != 0")
        if any(abs(v) > _ORIGIN_TOL for v in phi0):
            raise ConfigurationError(f"{self.label}: phi(0) = {phi0} != 0")


@dataclass(frozen=True)
class LinearMatchedPlant:
    """Matched plant with linear drift, x' = Ax + B(u + phi'theta + a*d)."""

    A: tuple  # n rows, each an n-tuple
    B: tuple  # n-tuple
    phi_eval: Callable[[Vec], tuple]
    a_eval: Callable[[Vec], float]
    p: int
    label: str = "linear_plant"

    @property
    def n(self) -> int:
        return len(self.B)

    def to_plant_spec(self) -> PlantSpec:
        A, B = self.A, self.B
        n = len(B)

        def f_eval(x, _A=A, _n=n):
            return tuple(sum(_A[i][j] * x[j] for j in range(_n)) for i in range(_n))

        def g_eval(x, _B=B):
            return _B

        return PlantSpec(n=n, p=self.p, f_eval=f_eval, g_eval=g_eval,
                         phi_eval=self.phi_eval, a_eval=self.a_eval, label=self.label)


@dataclass(frozen=True)
class MismatchedPlant:
    """Counterexample-only plant: rhs(x, u, theta, d) with no matched structure."""

    n: int
    p: int
    rhs_eval: Callable[[Vec, float, Vec, float], tuple]
    label: str = "mismatched_plant"


def rhs_matched(plant: PlantSpec, x: Vec, u: float, theta: Vec, d: float) -> tuple:
    """x' = f(x) + g(x) * (u + phi(x)'theta + a(x)*d) for a matched plant."""
    if len(x) != plant.n:
        raise ConfigurationError(f"{plant.label}: state has dim {len(x)}, expected {plant.n}")
    if len(theta) != plant.p:
        raise ConfigurationError(f"{plant.label}: theta has dim {len(theta)}, expected {plant.p}")
    phi = plant.phi_eval(x)
    s = u + d * plant.a_eval(x)
    for k in range(plant.p):
        s += phi[k] * theta[k]
    f = plant.f_eval(x)
    g = plant.g_eval(x)
    out = tuple(f[i] + g[i] * s for i in range(plant.n))
    if not _all_finite(out):
        raise NumericFault(f"{plant.label}: non-finite rhs", state=tuple(x))
    return out


def rhs_mismatched(plant: MismatchedPlant, x: Vec, u: float, theta: Vec, d: float) -> tuple:
    """Right-hand side of a mismatched (counterexample) plant."""
    if len(x) != plant.n:
        raise ConfigurationError(f"{plant.label}: state has dim {len(x)}, expected {plant.n}")
    out = plant.rhs_eval(x, u, theta, d)
    if not _all_finite(out):
        raise NumericFault(f"{plant.label}: non-finite rhs", state=tuple(x))
    return out


# ---------------------------------------------------------------------------
# builtin catalog
# ---------------------------------------------------------------------------

def monomial_fn(terms):
    """Compile [{'coef': c, 'powers': [p1..pn]}, ...] into phi: x -> tuple.

    Each entry is one component phi_k(x) = coef * prod_i x_i^powers[i]. Every
    component must vanish at the origin (total power >= 1).
    """
    compiled = []
    for term in terms:
        coef = float(term["coef"])
        powers = tuple(int(pw) for pw in term["powers"])
        if any(pw < 0 for pw in powers):
            raise ConfigurationError(f"negative power in monomial {term}")
        if sum(powers) < 1:
            raise ConfigurationError(f"monomial {term} does not vanish at the origin")
        compiled.append((coef, powers))

    def phi(x, _terms=tuple(compiled)):
        out = []
        for coef, powers in _terms:
            v = coef
            for i, pw in enumerate(powers):
                if pw == 1:
                    v *= x[i]
                elif pw:
                    v *= x[i] ** pw
            out.append(v)
        return tuple(out)

    return phi


def _const_a(value: float):
    def a_eval(x, _v=float(value)):
        return _v
    return a_eval


def make_planar() -> PlantSpec:
    """Planar matched plant: x1' = x2, x2' = th1 x1 + th2 x2 + th3 x1^2 + u + d."""
    lin = LinearMatchedPlant(
        A=((0.0, 1.0), (0.0, 0.0)),
        B=(0.0, 1.0),
        phi_eval=lambda x: (x[0], x[1], x[0] * x[0]),
        a_eval=_const_a(1.0),
        p=3,
        label="planar_3_1",
    )
    return lin.to_plant_spec()


def make_scalar() -> PlantSpec:
    """Scalar matched plant x' = theta*x + u + d."""
    return PlantSpec(
        n=1, p=1,
        f_eval=lambda x: (0.0,),
        g_eval=lambda x: (1.0,),
        phi_eval=lambda x: (x[0],),
        a_eval=_const_a(1.0),
        label="scalar_3_7",
    )


def make_chain(n: int, phi_terms=(), a: float = 1.0) -> PlantSpec:
    """Chain of integrators: x_i' = x_{i+1}, x_n' = u + sum_k phi_k(x) th_k + a*d."""
    if n < 1:
        raise ConfigurationError("chain needs n >= 1")
    A = tuple(tuple(1.0 if j == i + 1 else 0.0 for j in range(n)) for i in range(n))
    B = tuple(0.0 if i < n - 1 else 1.0 for i in range(n))
    phi = monomial_fn(phi_terms) if phi_terms else (lambda x: ())
    lin = LinearMatchedPlant(A=A, B=B, phi_eval=phi, a_eval=_const_a(a),
                             p=len(phi_terms), label=f"chain{n}")
    return lin.to_plant_spec()


def make_double_mismatched() -> MismatchedPlant:
    """Counterexample plant: x1' = x2 + d, x2' = u (disturbance off the control channel)."""
    def rhs(x, u, theta, d):
        return (x[1] + d, u)
    return MismatchedPlant(n=2, p=0, rhs_eval=rhs, label="double_3_10")


def make_triple_mismatched() -> MismatchedPlant:
    """Counterexample plant: x1' = -x1 + d, x2' = theta*x1 + x3, x3' = u.

    Shipped with the sign-consistent demo d = +1, x1(0) = 1, which keeps
    x1(t) = 1 exactly.
    """
    def rhs(x, u, theta, d):
        th = theta[0] if len(theta) else 0.0
        return (-x[0] + d, th * x[0] + x[2], u)
    return MismatchedPlant(n=3, p=1, rhs_eval=rhs, label="triple_3_11")


_BUILTINS = {
    "planar_3_1": make_planar,
    "scalar_3_7": make_scalar,
    "double_3_10": make_double_mismatched,
    "triple_3_11": make_triple_mismatched,
}


def make_builtin(name: str, **kwargs):
    """Return a builtin plant by its scenario-file identifier.

    Known names: planar_3_1, scalar_3_7, double_3_10, triple_3_11, and
    chain (which takes n, phi (monomial list) and a).
    """
    if name == "chain":
        return make_chain(kwargs.get("n", 2), kwargs.get("phi", ()), kwargs.get("a", 1.0))
    if kwargs:
        raise ConfigurationError(f"plant '{name}' takes no extra arguments")
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ConfigurationError(f"unknown plant '{name}'") from None
    return factory()
