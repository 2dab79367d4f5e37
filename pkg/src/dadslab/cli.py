"""Command-line entry point.

Subcommands: simulate, verify, certify, compare, sweep, equilibria.
Exit codes form a stable contract: 0 success, 2 bound or certificate
failure, 3 numeric blowup (when the scenario did not declare
allow_blowup), 4 configuration error.

All artifacts are named from the sha256 of the canonical scenario JSON, so
identical inputs always produce identical file names, and every command
writes a manifest listing what it produced.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, designs, plants, scenario_io, sim
from .controllers import NoDeadzoneParams
from .errors import ConfigurationError, NumericFault

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_BLOWUP = 3
EXIT_CONFIG = 4


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: Path, base: str, payload: dict) -> Path:
    path = out_dir / f"{base}_manifest.json"
    _write_json(path, payload)
    return path


def _run_and_write(cfg: dict, out_dir: Path):
    """Simulate one scenario config and write trajectory + meta. Returns
    (scenario, trajectory, base name, artifact paths)."""
    h = scenario_io.scenario_hash(cfg)
    scenario = scenario_io.build_scenario(cfg)
    traj = sim.integrate(scenario)
    base = f"{scenario.label}_{h[:8]}"
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{base}_trajectory.csv"
    meta_path = out_dir / f"{base}_meta.json"
    sim.write_trajectory_csv(traj, csv_path)
    _write_json(meta_path, {
        "scenario_hash": h,
        "label": scenario.label,
        "controller_kind": scenario.controller_kind,
        "truncated": traj.truncated,
        "truncation_index": traj.truncation_index,
        "solver_stats": traj.metadata,
    })
    return scenario, traj, base, [csv_path, meta_path]


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(scenario_arg: str, out_dir: str) -> int:
    cfg = scenario_io.load_scenario_file(scenario_io.resolve_scenario_arg(scenario_arg))
    out = Path(out_dir)
    scenario, traj, base, artifacts = _run_and_write(cfg, out)
    status = EXIT_OK
    if traj.truncated and not scenario.allow_blowup:
        status = EXIT_BLOWUP
    manifest = _write_manifest(out, base, {
        "command": "simulate",
        "scenario_hash": scenario_io.scenario_hash(cfg),
        "artifacts": [str(p) for p in artifacts],
        "checks": None,
        "exit_status": status,
    })
    print(f"wrote {manifest}")
    if traj.truncated:
        print(f"trajectory truncated at t={traj.metadata.get('truncated_at_t')}"
              f" (allow_blowup={scenario.allow_blowup})")
    return status


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _meta_path_for(traj_path: Path) -> Path:
    name = traj_path.name
    if name.endswith("_trajectory.csv"):
        return traj_path.with_name(name[:-len("_trajectory.csv")] + "_meta.json")
    return traj_path.with_suffix(".meta.json")


def _auto_envelope(scenario: sim.Scenario, traj: sim.Trajectory):
    """Deterministic default envelope grid for the transient-consequence check."""
    design = scenario.design
    clf = design.clf_view() if isinstance(design, designs.LinearDesign) else design
    reach = float(np.max(np.abs(traj.states))) + 1.0
    grid = designs.GridSpec(box=tuple((-reach, reach) for _ in range(clf.n)), resolution=41)
    level_max = max(float(np.max(traj.V_values)) * 1.2, 1e-6)
    return designs.zeta_envelope(clf, grid, level_max), clf, grid


def _run_bound(token: str, scenario: sim.Scenario, traj: sim.Trajectory):
    design = scenario.design
    params = scenario.controller_params
    theta = scenario.theta
    d_norm = scenario.disturbance.sup_norm
    if token == "2.20":
        return analysis.check_quadratic_decay(traj, design, params, theta, d_norm)
    if token == "2.21":
        return analysis.check_gain_ceiling(traj, design, params, theta, d_norm)
    if token in ("2.12", "2.13"):
        envelope, clf, grid = _auto_envelope(scenario, traj)
        z0 = float(traj.adapted[0, 0])
        theta_norm = math.sqrt(sum(v * v for v in theta))
        s = d_norm ** 2 + theta_norm ** 2 + float(traj.V_values[0]) + abs(z0)
        r = analysis.deadzone_level(design, params)
        params_r = params if params.r is not None else \
            type(params)(Gamma=params.Gamma, c=params.c, lam=params.lam,
                         kappa=params.kappa, r=r, eps=params.eps)
        gain_bound = analysis.adapted_gain_crude_bound(clf, params_r, level_proxy=s,
                                                       s=s, grid=grid)
        return analysis.check_transient_consequences(traj, clf, params, theta, d_norm,
                                                     envelope=envelope,
                                                     gain_bound=gain_bound)
    if token == "2.14":
        return analysis.check_tail_level(traj, analysis.deadzone_level(design, params))
    if token == "2.22":
        eps = getattr(params, "eps", None)
        if eps is None:
            raise ConfigurationError("bound 2.22 needs a controller with a target radius eps")
        return analysis.check_tail_state(traj, eps, tol=0.1 * eps)
    if token == "deadzone":
        return analysis.check_deadzone(traj, design, params)
    if token == "2.5":
        return analysis.check_robust_decrease(traj, design, params)
    if token == "2.8":
        return analysis.check_leakage_decrease(traj, design, params, theta)
    raise ConfigurationError(f"unknown bound id '{token}'")


def cmd_verify(scenario_arg: str, traj_path: str, bounds, out_dir: str,
               dump_margins: bool = False) -> int:
    if not bounds:
        raise ConfigurationError("no bounds requested; nothing to verify")
    cfg = scenario_io.load_scenario_file(scenario_io.resolve_scenario_arg(scenario_arg))
    h = scenario_io.scenario_hash(cfg)
    traj_path = Path(traj_path)
    if not traj_path.exists():
        raise ConfigurationError(f"trajectory file not found: {traj_path}")
    meta_path = _meta_path_for(traj_path)
    if not meta_path.exists():
        raise ConfigurationError(f"trajectory meta sidecar not found: {meta_path}")
    with open(meta_path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("scenario_hash") != h:
        raise ConfigurationError(
            "trajectory was produced from a different scenario "
            f"(hash {meta.get('scenario_hash', 'missing')[:8]} != {h[:8]})")
    scenario = scenario_io.build_scenario(cfg)
    traj = sim.read_trajectory_csv(traj_path, meta["controller_kind"])

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = f"{scenario.label}_{h[:8]}"
    reports = {}
    artifacts = []
    for token in bounds:
        report = _run_bound(token, scenario, traj)
        reports[token] = report
        if dump_margins:
            mpath = out / f"{base}_margins_{token.replace('.', '_')}.csv"
            with open(mpath, "w", encoding="utf-8") as fh:
                aligned = report.margins.size == traj.n_samples
                fh.write("t,margin\n" if aligned else "index,margin\n")
                for i, m in enumerate(report.margins):
                    key = traj.times[i] if aligned else i
                    fh.write("%.17g,%.17g\n" % (key, m))
            artifacts.append(mpath)
    summary = {tok: rep.to_json_dict() for tok, rep in reports.items()}
    report_path = out / f"{base}_bounds.json"
    _write_json(report_path, summary)
    artifacts.append(report_path)
    all_passed = all(rep.passed for rep in reports.values())
    status = EXIT_OK if all_passed else EXIT_CHECK_FAILED
    _write_manifest(out, base + "_verify", {
        "command": "verify",
        "scenario_hash": h,
        "artifacts": [str(p) for p in artifacts],
        "checks": {tok: rep.passed for tok, rep in reports.items()},
        "exit_status": status,
    })
    for tok, rep in reports.items():
        print(f"bound {tok}: {'pass' if rep.passed else 'FAIL'} "
              f"(min margin {rep.min_margin:.6g})")
    return status


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------

def _load_design_file(path: str):
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"design file not found: {p}")
    with open(p, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"design file {p} is not valid JSON: {exc}") from None
    allowed = {"builtin", "plant", "eta", "mu", "tolerance"}
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigurationError(f"unknown design keys: {sorted(unknown)}")
    if "builtin" not in cfg:
        raise ConfigurationError("design file needs a 'builtin' name")
    design = designs.builtin_design(cfg["builtin"])
    plant = plants.make_builtin(cfg["plant"]) if "plant" in cfg else None
    eta = float(cfg["eta"]) if "eta" in cfg else None
    mu_eval = None
    if "mu" in cfg:
        mu_cfg = cfg["mu"]
        if not (isinstance(mu_cfg, dict) and mu_cfg.get("kind") == "offset_plus_x1_squared"):
            raise ConfigurationError("mu must be {'kind': 'offset_plus_x1_squared', 'offset': c}")
        mu_eval = designs.mu_offset_plus_x1sq(float(mu_cfg["offset"]))
    tolerance = float(cfg.get("tolerance", 0.0))
    return design, plant, eta, mu_eval, tolerance


def _parse_box(box_arg: str, n: int):
    if box_arg is None:
        return tuple((-5.0, 5.0) for _ in range(n))
    vals = [float(v) for v in box_arg.split(",")]
    if len(vals) == 2:
        return tuple((vals[0], vals[1]) for _ in range(n))
    if len(vals) == 2 * n:
        return tuple((vals[2 * i], vals[2 * i + 1]) for i in range(n))
    raise ConfigurationError(f"--box needs 2 or {2 * n} comma-separated numbers")


def cmd_certify(design_path: str, assumption: str, box_arg, res: int,
                out_dir, eta_flag, delta_flag) -> int:
    design, plant, eta_file, mu_eval, tolerance = _load_design_file(design_path)
    eta = eta_flag if eta_flag is not None else eta_file
    if assumption == "2.17":
        if not isinstance(design, designs.LinearDesign):
            raise ConfigurationError("assumption 2.17 needs a linear design")
        grid = designs.GridSpec(box=_parse_box(box_arg, design.n), resolution=res)
        report = designs.certify_linear_margin(
            design, grid, eta=eta, mu_eval=mu_eval,
            phi_eval=plant.phi_eval if plant is not None else None,
            tolerance=tolerance)
    elif assumption in ("A", "B", "C"):
        if plant is None:
            raise ConfigurationError(f"assumption {assumption} needs a plant in the design file")
        clf = design.clf_view() if isinstance(design, designs.LinearDesign) else design
        if mu_eval is not None:
            clf = designs.ClfDesign(V_eval=clf.V_eval, gradV_eval=clf.gradV_eval,
                                    Q_eval=clf.Q_eval, k_eval=clf.k_eval,
                                    mu_eval=mu_eval, n=clf.n, label=clf.label)
        grid = designs.GridSpec(box=_parse_box(box_arg, clf.n), resolution=res)
        report = designs.certify_assumption(clf, plant, assumption, grid,
                                            delta=delta_flag, eta=eta, tolerance=tolerance)
    else:
        raise ConfigurationError(f"unknown assumption '{assumption}' (A, B, C or 2.17)")
    payload = report.to_json_dict()
    print(json.dumps(payload, indent=2, sort_keys=True))
    status = EXIT_OK if report.passed else EXIT_CHECK_FAILED
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        h = scenario_io.canonical_hash(payload)
        cert_path = out / f"certificate_{assumption.replace('.', '_')}_{h[:8]}.json"
        _write_json(cert_path, payload)
        _write_manifest(out, f"certify_{assumption.replace('.', '_')}_{h[:8]}", {
            "command": "certify",
            "scenario_hash": h,
            "artifacts": [str(cert_path)],
            "checks": {assumption: report.passed},
            "exit_status": status,
        })
    return status


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def cmd_compare(scenario_a: str, scenario_b: str, out_dir: str) -> int:
    cfg_a = scenario_io.load_scenario_file(scenario_io.resolve_scenario_arg(scenario_a))
    cfg_b = scenario_io.load_scenario_file(scenario_io.resolve_scenario_arg(scenario_b))
    out = Path(out_dir)
    scen_a, traj_a, base_a, arts_a = _run_and_write(cfg_a, out)
    scen_b, traj_b, base_b, arts_b = _run_and_write(cfg_b, out)
    if traj_a.n_samples != traj_b.n_samples or not np.array_equal(traj_a.times, traj_b.times):
        raise ConfigurationError("compare needs scenarios with identical time grids")
    ha = scenario_io.scenario_hash(cfg_a)[:8]
    hb = scenario_io.scenario_hash(cfg_b)[:8]
    base = f"compare_{ha}_{hb}"
    csv_path = out / f"{base}.csv"
    abs_a, abs_b = traj_a.abs_x(), traj_b.abs_x()
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("t,abs_x_a,abs_x_b\n")
        for i in range(traj_a.n_samples):
            fh.write("%.17g,%.17g,%.17g\n" % (traj_a.times[i], abs_a[i], abs_b[i]))
    tail_a = analysis.tail_limsup(traj_a)
    tail_b = analysis.tail_limsup(traj_b)
    summary = {
        "a": {"label": scen_a.label, "tail_sup_x": tail_a.sup_abs_x},
        "b": {"label": scen_b.label, "tail_sup_x": tail_b.sup_abs_x},
        "window": list(tail_a.window),
    }
    summary_path = out / f"{base}_summary.json"
    _write_json(summary_path, summary)
    truncated_bad = (traj_a.truncated and not scen_a.allow_blowup) or \
                    (traj_b.truncated and not scen_b.allow_blowup)
    status = EXIT_BLOWUP if truncated_bad else EXIT_OK
    _write_manifest(out, base, {
        "command": "compare",
        "scenario_hash": f"{ha}:{hb}",
        "artifacts": [str(p) for p in arts_a + arts_b + [csv_path, summary_path]],
        "checks": None,
        "exit_status": status,
    })
    print(f"tail sup |x|: a={tail_a.sup_abs_x:.6g} b={tail_b.sup_abs_x:.6g}")
    return status


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _set_path(cfg: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = cfg
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigurationError(f"sweep axis '{dotted}' does not resolve to an object")
        node = node[key]
    node[keys[-1]] = value


def _fmt_cell_value(value) -> str:
    return str(value).replace(".", "p").replace("-", "m")


def _sweep_cell(args):
    """Run one sweep cell; returns (row dict, artifact paths, status)."""
    cfg, bounds, out_dir = args
    out = Path(out_dir)
    scenario, traj, base, artifacts = _run_and_write(cfg, out)
    row = {"label": scenario.label}
    status = EXIT_OK
    if traj.truncated and not scenario.allow_blowup:
        status = EXIT_BLOWUP
    tail = analysis.tail_limsup(traj)
    row["tail_sup_x"] = tail.sup_abs_x
    if scenario.controller_kind in ("dads", "dads_linear", "no_deadzone"):
        row["final_rho"] = float(traj.rho[-1])
    else:
        row["final_rho"] = ""
    row["regulation_threshold"] = ""
    if scenario.controller_kind in ("dads", "dads_linear"):
        from .controllers import regulation_threshold
        theta_norm = math.sqrt(sum(v * v for v in scenario.theta))
        thr = regulation_threshold(scenario.controller_params, theta_norm)
        if thr is not None:
            row["regulation_threshold"] = thr
    checks = {}
    for token in bounds:
        report = _run_bound(token, scenario, traj)
        checks[token] = report.passed
        if not report.passed and status == EXIT_OK:
            status = EXIT_CHECK_FAILED
    row["bounds_passed"] = all(checks.values()) if checks else ""
    return row, [str(p) for p in artifacts], status, checks


def cmd_sweep(spec_path: str, out_dir: str, jobs: int) -> int:
    spec_file = scenario_io.resolve_scenario_arg(spec_path)
    with open(spec_file, "r", encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"sweep spec is not valid JSON: {exc}") from None
    allowed = {"label", "base_scenario", "base", "axes", "bounds"}
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigurationError(f"unknown sweep keys: {sorted(unknown)}")
    if "base" in spec:
        base_cfg = spec["base"]
    elif "base_scenario" in spec:
        base_cfg = scenario_io.load_scenario_file(
            scenario_io.resolve_scenario_arg(spec["base_scenario"]))
    else:
        raise ConfigurationError("sweep spec needs 'base' or 'base_scenario'")
    axes = spec.get("axes", {})
    if not axes:
        raise ConfigurationError("sweep spec has no axes")
    for path, values in axes.items():
        if not isinstance(values, list) or not values:
            raise ConfigurationError(f"sweep axis '{path}' must be a non-empty list")
    bounds = spec.get("bounds", [])

    paths = list(axes.keys())
    cells = []
    for combo in itertools.product(*(axes[p] for p in paths)):
        cfg = copy.deepcopy(base_cfg)
        for path, value in zip(paths, combo):
            _set_path(cfg, path, value)
        tag = "__".join(f"{p.split('.')[-1]}_{_fmt_cell_value(v)}"
                        for p, v in zip(paths, combo))
        cfg["label"] = f"{cfg.get('label', 'cell')}__{tag}"
        scenario_io.validate_scenario(cfg)
        cells.append((cfg, dict(zip(paths, combo))))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    work = [(cfg, bounds, str(out)) for cfg, _ in cells]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_cell, work))
    else:
        results = [_sweep_cell(w) for w in work]

    agg_path = out / f"sweep_{spec.get('label', 'sweep')}_aggregate.csv"
    columns = paths + ["tail_sup_x", "final_rho", "regulation_threshold", "bounds_passed"]
    artifacts = []
    status = EXIT_OK
    with open(agg_path, "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for (row, arts, cell_status, _checks), (_cfg, combo) in zip(results, cells):
            artifacts.extend(arts)
            status = max(status, cell_status)
            vals = [repr(combo[p]) for p in paths]
            vals += [str(row["tail_sup_x"]), str(row["final_rho"]),
                     str(row["regulation_threshold"]), str(row["bounds_passed"])]
            fh.write(",".join(vals) + "\n")
    artifacts.append(str(agg_path))
    _write_manifest(out, f"sweep_{spec.get('label', 'sweep')}", {
        "command": "sweep",
        "scenario_hash": scenario_io.canonical_hash(spec),
        "artifacts": artifacts,
        "checks": {r[0]["label"]: r[3] for r in results},
        "exit_status": status,
    })
    print(f"wrote {agg_path} ({len(results)} cells)")
    return status


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------

def cmd_equilibria(k1, k2, k3, k4, m, sigma, theta, out_dir) -> int:
    params = NoDeadzoneParams(K1=k1, K2=k2, K3=k3, K4=k4, M=m, sigma=sigma)
    eq = analysis.nodeadzone_equilibria(params, theta)
    payload = eq.to_json_dict()
    payload["theta"] = theta
    print(json.dumps(payload, indent=2, sort_keys=True))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        h = scenario_io.canonical_hash(payload)
        path = out / f"equilibria_{h[:8]}.json"
        _write_json(path, payload)
        _write_manifest(out, f"equilibria_{h[:8]}", {
            "command": "equilibria",
            "scenario_hash": h,
            "artifacts": [str(path)],
            "checks": None,
            "exit_status": EXIT_OK,
        })
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dadslab",
        description="Simulate, verify and certify deadzone-adapted disturbance "
                    "suppression control loops.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and write its trajectory CSV")
    p.add_argument("--scenario", required=True, help="scenario file or bundled name")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("verify", help="check bounds along a stored trajectory")
    p.add_argument("--scenario", required=True)
    p.add_argument("--traj", required=True, help="trajectory CSV written by simulate")
    p.add_argument("--bounds", required=True,
                   help="comma-separated bound ids, e.g. 2.20,2.21,2.22,deadzone")
    p.add_argument("--out", default=".", help="directory for bound reports")
    p.add_argument("--dump-margins", action="store_true")

    p = sub.add_parser("certify", help="grid-certify a design condition")
    p.add_argument("--design", required=True, help="design file (JSON)")
    p.add_argument("--assumption", required=True, help="A, B, C or 2.17")
    p.add_argument("--box", default=None, help="lo,hi or per-axis lo1,hi1,lo2,hi2,...")
    p.add_argument("--res", type=int, default=201, help="grid points per axis")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--out", default=None, help="optional certificate output directory")

    p = sub.add_parser("compare", help="run two scenarios on one time grid")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="cartesian parameter sweep")
    p.add_argument("--spec", required=True, help="sweep spec file")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("equilibria", help="nonzero equilibria of the no-deadzone foil")
    p.add_argument("--k1", type=float, required=True)
    p.add_argument("--k2", type=float, required=True)
    p.add_argument("--k3", type=float, required=True)
    p.add_argument("--k4", type=float, required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.scenario, args.out)
        if args.command == "verify":
            bounds = [tok.strip() for tok in args.bounds.split(",") if tok.strip()]
            return cmd_verify(args.scenario, args.traj, bounds, args.out, args.dump_margins)
        if args.command == "certify":
            return cmd_certify(args.design, args.assumption, args.box, args.res,
                               args.out, args.eta, args.delta)
        if args.command == "compare":
            return cmd_compare(args.a, args.b, args.out)
        if args.command == "sweep":
            return cmd_sweep(args.spec, args.out, args.jobs)
        if args.command == "equilibria":
            return cmd_equilibria(args.k1, args.k2, args.k3, args.k4, args.m,
                                  args.sigma, args.theta, args.out)
        raise ConfigurationError(f"unknown command {args.command}")
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFault as exc:
        print(f"numeric fault: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
