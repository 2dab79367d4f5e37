"""Scenario files: validation, canonical hashing, and object building.

A scenario file is a single JSON document with exactly the keys

    plant, design, controller, theta, disturbance, x0, adapted0,
    t_end, solver, outputs

plus the optional keys label and allow_blowup. Unknown keys are rejected
before any numeric work. The scenario hash is the sha256 of the document's
canonical JSON form (sorted keys, minimal separators), so it is stable under
key reordering and drives deterministic artifact names.
"""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

import numpy as np

from . import controllers as ctrl
from . import designs, plants, sim
from .errors import ConfigurationError

REQUIRED_KEYS = ("plant", "design", "controller", "theta", "disturbance",
                 "x0", "adapted0", "t_end", "solver", "outputs")
OPTIONAL_KEYS = ("label", "allow_blowup")

_CONTROLLER_KINDS = ("dads", "dads_linear", "robust", "sigma_mod", "no_deadzone")


def canonical_hash(obj) -> str:
    """sha256 of the canonical JSON form; stable under key reordering."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _expect(cond, message):
    if not cond:
        raise ConfigurationError(message)


def _number(value, key):
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
            f"scenario key '{key}' must be a number, got {value!r}")
    return float(value)


def _number_list(value, key):
    _expect(isinstance(value, list), f"scenario key '{key}' must be a list")
    return [_number(v, key) for v in value]


def validate_scenario(cfg: dict) -> dict:
    """Schema-check a scenario document; returns it unchanged on success."""
    _expect(isinstance(cfg, dict), "scenario file must hold a JSON object")
    unknown = set(cfg) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS)
    _expect(not unknown, f"unknown scenario keys: {sorted(unknown)}")
    missing = [k for k in REQUIRED_KEYS if k not in cfg]
    _expect(not missing, f"missing scenario keys: {missing}")

    plant = cfg["plant"]
    _expect(isinstance(plant, (str, dict)), "plant must be a name or an object")
    if isinstance(plant, dict):
        _expect(plant.get("name") == "chain", "inline plants must be chain plants")

    _expect(isinstance(cfg["design"], str), "design must be a builtin name")

    controller = cfg["controller"]
    _expect(isinstance(controller, dict) and "type" in controller,
            "controller must be an object with a 'type'")
    _expect(controller["type"] in _CONTROLLER_KINDS,
            f"controller type must be one of {_CONTROLLER_KINDS}")

    _number_list(cfg["theta"], "theta")
    _number_list(cfg["x0"], "x0")
    adapted0 = cfg["adapted0"]
    _expect(isinstance(adapted0, (list, int, float)) and not isinstance(adapted0, bool),
            "adapted0 must be a number or a list of numbers")
    _number(cfg["t_end"], "t_end")
    _expect(isinstance(cfg["disturbance"], dict), "disturbance must be an object")
    _expect(isinstance(cfg["solver"], dict), "solver must be an object")
    _expect(isinstance(cfg["outputs"], dict), "outputs must be an object")
    if "allow_blowup" in cfg:
        _expect(isinstance(cfg["allow_blowup"], bool), "allow_blowup must be a boolean")
    if "label" in cfg:
        _expect(isinstance(cfg["label"], str), "label must be a string")
    return cfg


def _build_plant(spec):
    if isinstance(spec, str):
        return plants.make_builtin(spec)
    kwargs = {k: v for k, v in spec.items() if k != "name"}
    return plants.make_builtin("chain", **kwargs)


def _build_controller(cfg, design, plant_p):
    """Returns (kind, params, controller_plant_or_None)."""
    kind = cfg["type"]
    extra = dict(cfg)
    extra.pop("type")
    assumed = extra.pop("assumed_plant", None)
    controller_plant = _build_plant(assumed) if assumed is not None else None

    def take(key, default=None, required=False):
        if key in extra:
            return extra.pop(key)
        if required:
            raise ConfigurationError(f"controller '{kind}' needs parameter '{key}'")
        return default

    if kind in ("dads", "dads_linear"):
        kappa = ctrl.KappaFn.from_config(take("kappa", {"kind": "power", "q": 2}))
        params = ctrl.DadsParams(
            Gamma=_number(take("Gamma", required=True), "Gamma"),
            c=_number(take("c", required=True), "c"),
            lam=_number(take("lambda", 0.0), "lambda"),
            kappa=kappa,
            r=(None if (r := take("r")) is None else _number(r, "r")),
            eps=(None if (e := take("eps")) is None else _number(e, "eps")),
        )
        if kind == "dads" and params.r is None:
            raise ConfigurationError("controller 'dads' needs the deadzone level r")
        if kind == "dads_linear" and params.eps is None:
            raise ConfigurationError("controller 'dads_linear' needs the target radius eps")
    elif kind == "robust":
        params = ctrl.RobustParams(c=_number(take("c", required=True), "c"),
                                   rho_bound=_number(take("rho_bound", required=True),
                                                     "rho_bound"))
    elif kind == "sigma_mod":
        gains = take("Gamma", required=True)
        if isinstance(gains, list) and gains and isinstance(gains[0], list):
            G = np.array([[_number(v, "Gamma") for v in row] for row in gains])
        else:
            G = np.diag(_number_list(gains, "Gamma"))
        params = ctrl.SigmaModParams(c=_number(take("c", required=True), "c"),
                                     sigma=_number(take("sigma", required=True), "sigma"),
                                     Gamma=G)
        if params.p != plant_p:
            raise ConfigurationError(
                f"adaptation matrix is {params.p}x{params.p}, plant has p={plant_p}")
    elif kind == "no_deadzone":
        params = ctrl.NoDeadzoneParams(
            K1=_number(take("K1", required=True), "K1"),
            K2=_number(take("K2", required=True), "K2"),
            K3=_number(take("K3", required=True), "K3"),
            K4=_number(take("K4", required=True), "K4"),
            M=_number(take("M", required=True), "M"),
            sigma=_number(take("sigma", required=True), "sigma"))
    else:
        raise ConfigurationError(f"unknown controller type '{kind}'")
    if extra:
        raise ConfigurationError(f"unknown controller keys: {sorted(extra)}")
    return kind, params, controller_plant


def _build_solver(cfg) -> sim.SolverConfig:
    allowed = {"method", "dt", "rel_tol", "abs_tol", "dt_max", "blowup_guard"}
    unknown = set(cfg) - allowed
    _expect(not unknown, f"unknown solver keys: {sorted(unknown)}")
    kwargs = dict(cfg)
    kwargs.setdefault("method", "rk4_fixed")
    kwargs.setdefault("dt", sim.default_dt())
    return sim.SolverConfig(**kwargs)


def build_scenario(cfg: dict) -> sim.Scenario:
    """Validate a scenario document and resolve it into a Scenario."""
    validate_scenario(cfg)
    plant = _build_plant(cfg["plant"])
    design = designs.builtin_design(cfg["design"])
    kind, params, controller_plant = _build_controller(cfg["controller"], design, plant.p)
    if kind in ("dads", "robust", "sigma_mod", "no_deadzone") \
            and isinstance(design, designs.LinearDesign):
        design = design.clf_view()
    adapted0 = cfg["adapted0"]
    if isinstance(adapted0, (int, float)):
        adapted0 = (float(adapted0),)
    else:
        adapted0 = tuple(float(v) for v in adapted0)
    outputs = dict(cfg["outputs"])
    stride = int(outputs.pop("stride", sim.DEFAULT_STRIDE))
    _expect(not outputs, f"unknown output keys: {sorted(outputs)}")
    return sim.Scenario(
        plant=plant,
        design=design,
        controller_kind=kind,
        controller_params=params,
        theta=tuple(float(v) for v in cfg["theta"]),
        disturbance=sim.DisturbanceSignal.from_config(cfg["disturbance"]),
        x0=tuple(float(v) for v in cfg["x0"]),
        adapted0=adapted0,
        t_end=float(cfg["t_end"]),
        solver=_build_solver(cfg["solver"]),
        stride=stride,
        controller_plant=controller_plant,
        label=cfg.get("label", "scenario"),
        allow_blowup=bool(cfg.get("allow_blowup", False)),
        raw_config=cfg,
    )


def load_scenario_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"scenario file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"scenario file {path} is not valid JSON: {exc}") from None


def load_scenario(path) -> sim.Scenario:
    return build_scenario(load_scenario_file(path))


def scenario_hash(cfg: dict) -> str:
    return canonical_hash(cfg)


# ---------------------------------------------------------------------------
# bundled scenarios
# ---------------------------------------------------------------------------

def bundled_scenario_names():
    pkg = resources.files(__package__) / "scenarios"
    return sorted(p.name[:-5] for p in pkg.iterdir() if p.name.endswith(".json"))


def bundled_scenario_path(name: str) -> Path:
    pkg = resources.files(__package__) / "scenarios" / f"{name}.json"
    path = Path(str(pkg))
    if not path.exists():
        raise ConfigurationError(
            f"unknown bundled scenario '{name}' (have: {bundled_scenario_names()})")
    return path


def resolve_scenario_arg(arg: str) -> Path:
    """A CLI scenario argument is a filesystem path first, a bundled name second."""
    path = Path(arg)
    if path.exists():
        return path
    if "/" not in arg and not arg.endswith(".json"):
        return bundled_scenario_path(arg)
    raise ConfigurationError(f"scenario file not found: {arg}")
