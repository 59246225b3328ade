"""Command-line front end.

Five subcommands: simulate (run a scripted scenario, emit trace + ledger),
plan (route query on a terrain grid), analyze (static feasibility reports),
calibrate (fit ground power coefficients), design (headline sizing metrics).

Exit status: 0 success, 1 a validation threshold failed, 2 bad input.
Outputs are plain JSON and CSV under --out; payloads carry no timestamps so
reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources

from . import statics
from .defaults import (
    USABLE_PROPULSION_ENERGY_WH,
    default_batteries,
    default_mass_budget,
    default_params,
    default_power_model,
    default_rotor,
)
from .dynamics import Mode
from .energy import calibrate_ground_power, usable_propulsion_energy_wh
from .planner import NoPathError, plan as plan_route, validate_plan
from .scenario import (
    Scenario,
    ScenarioError,
    evaluate_simulation,
    initial_state_for,
    load_scenario,
    run_scenario,
)
from .terrain import TerrainError
from .vehicle import RotorTableError, design_metrics, load_rotor_table_file

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INPUT = 2


def bundled_scenarios() -> dict:
    """Name -> path for the scenarios shipped inside the package."""
    root = resources.files("flydrive.data").joinpath("scenarios")
    found = {}
    for entry in root.iterdir():
        if entry.name.endswith(".json"):
            found[entry.name[:-5]] = os.fspath(entry)
    return dict(sorted(found.items()))


def _resolve_scenario(ref: str) -> str:
    if os.path.exists(ref):
        return ref
    bundled = bundled_scenarios()
    if ref in bundled:
        return bundled[ref]
    names = ", ".join(bundled)
    raise ScenarioError(f"{ref}: not a file and not a bundled scenario ({names})")


def _write_json(out_dir: str, name: str, payload) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _state_dict(state) -> dict:
    return {
        "time_s": state.time_s,
        "position_m": list(state.position),
        "velocity_mps": list(state.velocity),
        "speed_mps": state.speed,
        "tilt_front_deg": state.tilt_front_deg,
        "tilt_rear_deg": state.tilt_rear_deg,
        "mode": state.mode.value,
        "contact": state.contact,
    }


def _cmd_simulate(args) -> int:
    scenario = load_scenario(_resolve_scenario(args.scenario))
    if scenario.is_planning:
        raise ScenarioError(
            f"{scenario.source}: scenario defines a planner query; use the plan subcommand"
        )
    result = run_scenario(scenario, dt_s=args.dt_s, trace_decimation=args.decimation)
    ok, checks = evaluate_simulation(scenario, result)
    seed = args.seed if args.seed is not None else scenario.seed

    os.makedirs(args.out, exist_ok=True)
    trace_path = os.path.join(args.out, "trace.csv")
    result.write_trace(trace_path)
    ledger_path = _write_json(args.out, "ledger.json", result.ledger.to_dict())

    payload = {
        "scenario": scenario.name,
        "seed": seed,
        "ok": ok,
        "faulted": result.faulted,
        "fault_reason": result.fault_reason,
        "checks": checks,
        "events": result.events,
        "final_state": _state_dict(result.final_state),
        "energy_total_wh": result.ledger.total_wh,
    }
    if scenario.initial.mode == Mode.WALL:
        wall = statics.wall_climb_analysis(
            scenario.params,
            scenario.initial.tilt_deg,
            climbing=True,
            rotor=scenario.rotor,
            payload=scenario.payload_kg,
        )
        payload["wall_climb"] = statics.analysis_record(
            "wall_climb",
            {"tilt_deg": scenario.initial.tilt_deg, "payload_kg": scenario.payload_kg},
            wall,
        )
    result_path = _write_json(args.out, "result.json", payload)

    for path in (trace_path, ledger_path, result_path):
        print(f"wrote {path}")
    for check in checks:
        print(f"[{'pass' if check['ok'] else 'FAIL'}] {check['name']}: {check['detail']}")
    return EXIT_OK if ok else EXIT_VALIDATION


def _cmd_plan(args) -> int:
    scenario = load_scenario(_resolve_scenario(args.scenario))
    query = scenario.planner_query
    if query is None:
        raise ScenarioError(
            f"{scenario.source}: scenario has no planner query; use the simulate subcommand"
        )
    seed = args.seed if args.seed is not None else scenario.seed
    batteries = list(scenario.batteries)
    try:
        mission = plan_route(
            query.terrain, query.start, query.goal, query.config,
            scenario.power_model, batteries=batteries, payload=scenario.payload_kg,
        )
    except NoPathError as exc:
        print(f"no feasible route: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    payload = mission.to_json_dict()
    payload["scenario"] = scenario.name
    payload["seed"] = seed
    plan_path = _write_json(args.out, "plan.json", payload)
    print(f"wrote {plan_path}")
    n_fly = sum(1 for leg in mission.legs if leg.mode == "fly")
    print(
        f"route: {len(mission.legs)} legs ({n_fly} fly), "
        f"{mission.total_energy_wh:.4f} Wh, feasible={mission.feasible}"
    )

    ok = mission.feasible
    expected_fly = scenario.validation.expect_fly_legs
    if expected_fly is not None and n_fly != expected_fly:
        print(f"[FAIL] expected {expected_fly} fly leg(s), got {n_fly}")
        ok = False

    if args.validate:
        report = validate_plan(
            mission, query.terrain, scenario.power_model, query.config,
            batteries=batteries, payload=scenario.payload_kg,
            max_deviation=scenario.validation.max_leg_deviation_frac,
        )
        report_payload = report.to_json_dict()
        report_payload["scenario"] = scenario.name
        report_payload["seed"] = seed
        report_path = _write_json(args.out, "validation.json", report_payload)
        print(f"wrote {report_path}")
        for leg in report.legs:
            status = "pass" if leg.ok else "FAIL"
            print(
                f"[{status}] leg {leg.index} ({leg.mode}): predicted "
                f"{leg.predicted_wh:.4f} Wh, simulated {leg.simulated_wh:.4f} Wh"
            )
        if not report.ok:
            ok = False
    return EXIT_OK if ok else EXIT_VALIDATION


def _cmd_analyze(args) -> int:
    params = default_params()
    rotor = default_rotor()
    payload = args.payload_kg
    sections = []
    if args.tipping:
        angle = statics.tipping_slope(params)
        sections.append({
            "analysis": "tipping_slope",
            "inputs": {
                "com_height_m": params.com_height,
                "wheel_half_spacing_m": params.wheel_contact_half_spacing_long,
            },
            "result": {"tipping_slope_deg": angle},
        })
    if args.incline is not None:
        analysis = statics.incline_equilibrium(
            params, args.incline, moving=not args.static, rotor=rotor, payload=payload,
        )
        sections.append(statics.analysis_record(
            "incline_equilibrium",
            {"slope_deg": args.incline, "moving": not args.static, "payload_kg": payload},
            analysis,
        ))
    if args.wall is not None:
        analysis = statics.wall_climb_analysis(
            params, args.wall, climbing=not args.static, rotor=rotor, payload=payload,
        )
        sections.append(statics.analysis_record(
            "wall_climb",
            {"tilt_deg": args.wall, "climbing": not args.static, "payload_kg": payload},
            analysis,
        ))
    if args.optimal_tilt:
        best = statics.optimal_wall_tilt(params, rotor, payload=payload)
        at_best = statics.wall_climb_analysis(
            params, best, climbing=True, rotor=rotor, payload=payload,
        )
        sections.append({
            "analysis": "optimal_wall_tilt",
            "inputs": {"payload_kg": payload, "step_deg": 0.1},
            "result": {
                "optimal_tilt_deg": best,
                "required_thrust_n": at_best.required_thrust,
            },
        })
    if args.decompose is not None:
        thrust, pitch = args.decompose
        decomp = statics.decompose_thrust(thrust, pitch)
        sections.append(statics.analysis_record(
            "thrust_decomposition", {"total_thrust_n": thrust, "pitch_deg": pitch}, decomp,
        ))
    if not sections:
        raise ScenarioError(
            "nothing to analyze: pass --tipping, --incline, --wall, "
            "--optimal-tilt, or --decompose"
        )
    report = {"seed": args.seed, "sections": sections}
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.out is not None:
        path = _write_json(args.out, "analysis.json", report)
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _parse_point(text: str) -> tuple:
    try:
        speed, power = text.split("=")
        return float(speed), float(power)
    except ValueError:
        raise ScenarioError(
            f"bad --points entry {text!r}: expected SPEED_MPS=POWER_W"
        ) from None


def _cmd_calibrate(args) -> int:
    if args.points:
        points = [_parse_point(p) for p in args.points]
    elif args.points_file is not None:
        try:
            with open(args.points_file, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
            points = [(float(v), float(p)) for v, p in raw]
        except FileNotFoundError:
            raise ScenarioError(f"{args.points_file}: no such file") from None
        except json.JSONDecodeError as exc:
            raise ScenarioError(
                f"{args.points_file}:{exc.lineno}:{exc.colno}: {exc.msg}"
            ) from None
        except (TypeError, ValueError):
            raise ScenarioError(
                f"{args.points_file}: expected [[speed_mps, power_w], ...]"
            ) from None
    else:
        raise ScenarioError("calibrate needs --points or --points-file")
    try:
        c1, c3 = calibrate_ground_power(points)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    fitted = {
        "c1_w_per_mps": c1,
        "c3_w_per_mps3": c3,
        "points": [{"speed_mps": v, "power_w": p} for v, p in points],
        "fit_power_w": {
            str(v): c1 * v + c3 * v ** 3 for v, _ in points
        },
        "seed": args.seed,
    }
    print(json.dumps(fitted, indent=2, sort_keys=True))
    if args.out is not None:
        path = _write_json(args.out, "calibration.json", fitted)
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_design(args) -> int:
    params = default_params()
    if args.rotor_table is not None:
        if not os.path.exists(args.rotor_table):
            raise ScenarioError(f"{args.rotor_table}: no such file")
        rotor = load_rotor_table_file(args.rotor_table)
    else:
        rotor = default_rotor()
    usable = args.usable_wh
    if usable is None:
        usable = usable_propulsion_energy_wh(default_batteries())
    metrics = design_metrics(params, rotor, usable)
    budget = default_mass_budget()
    try:
        budget.validate_against(params)
        budget_ok, budget_note = True, "consistent with vehicle parameters"
    except ValueError as exc:
        budget_ok, budget_note = False, str(exc)
    report = {
        "tw_ratio": metrics.tw_ratio,
        "payload_capacity_kg": metrics.payload_capacity,
        "gam_mass_fraction": metrics.gam_mass_fraction,
        "gam_mass_fraction_pct": 100.0 * metrics.gam_mass_fraction,
        "hover_power_estimate_w": metrics.hover_power_estimate,
        "hover_endurance_estimate_s": metrics.hover_endurance_estimate,
        "empty_mass_kg": params.empty_mass,
        "mtom_kg": params.mtom,
        "usable_energy_wh": usable,
        "mass_budget_ok": budget_ok,
        "mass_budget_note": budget_note,
        "rotor_table": rotor.name,
        "seed": args.seed,
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.out is not None:
        path = _write_json(args.out, "design.json", report)
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK if budget_ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flydrive",
        description="Simulation and analysis toolkit for a tilt-axle flying-driving vehicle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scripted scenario")
    p_sim.add_argument("scenario", help="scenario file or bundled scenario name")
    p_sim.add_argument("--out", default="out", help="output directory")
    p_sim.add_argument("--dt-s", type=float, default=0.001, help="integrator step")
    p_sim.add_argument("--decimation", type=int, default=10,
                       help="trace every Nth step")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_plan = sub.add_parser("plan", help="plan a route on a terrain grid")
    p_plan.add_argument("scenario", help="scenario file or bundled scenario name")
    p_plan.add_argument("--out", default="out", help="output directory")
    p_plan.add_argument("--validate", action="store_true",
                        help="re-simulate each leg and compare energies")
    p_plan.add_argument("--seed", type=int, default=None)
    p_plan.set_defaults(func=_cmd_plan)

    p_an = sub.add_parser("analyze", help="static feasibility reports")
    p_an.add_argument("--tipping", action="store_true",
                      help="tipping slope of the default geometry")
    p_an.add_argument("--incline", type=float, default=None, metavar="SLOPE_DEG")
    p_an.add_argument("--wall", type=float, default=None, metavar="TILT_DEG")
    p_an.add_argument("--optimal-tilt", action="store_true")
    p_an.add_argument("--decompose", type=float, nargs=2, default=None,
                      metavar=("THRUST_N", "PITCH_DEG"))
    p_an.add_argument("--payload-kg", type=float, default=0.0)
    p_an.add_argument("--static", action="store_true",
                      help="analyze holding instead of moving")
    p_an.add_argument("--out", default=None, help="also write analysis.json here")
    p_an.add_argument("--seed", type=int, default=None)
    p_an.set_defaults(func=_cmd_analyze)

    p_cal = sub.add_parser("calibrate", help="fit ground power coefficients")
    p_cal.add_argument("--points", action="append", default=[],
                       metavar="SPEED_MPS=POWER_W")
    p_cal.add_argument("--points-file", default=None,
                       help="JSON [[speed_mps, power_w], ...]")
    p_cal.add_argument("--out", default=None, help="also write calibration.json here")
    p_cal.add_argument("--seed", type=int, default=None)
    p_cal.set_defaults(func=_cmd_calibrate)

    p_des = sub.add_parser("design", help="headline sizing metrics")
    p_des.add_argument("--rotor-table", default=None, help="CSV performance table")
    p_des.add_argument("--usable-wh", type=float, default=None,
                       help="usable propulsion energy override")
    p_des.add_argument("--out", default=None, help="also write design.json here")
    p_des.add_argument("--seed", type=int, default=None)
    p_des.set_defaults(func=_cmd_design)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, TerrainError, RotorTableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
