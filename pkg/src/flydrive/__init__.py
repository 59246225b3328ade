"""flydrive: simulation and analysis toolkit for a four-wheeled tilt-axle
vehicle that drives, climbs inclines and walls, and flies.

The public surface groups into five layers:

- vehicle: physical parameters, rotor performance tables, mass budget
- statics: force decomposition, tipping, incline and wall feasibility
- energy: batteries, calibrated per-mode power, endurance and range
- dynamics + simulator: mode controllers, rigid-body stepping, traces
- terrain + planner: grid worlds and least-energy multi-modal routing
"""

from .defaults import (
    default_batteries,
    default_mass_budget,
    default_params,
    default_power_model,
    default_rotor,
)
from .dynamics import (
    ControlSetpoint,
    ControllerGains,
    DetachEvent,
    Mode,
    SimState,
    SimulationFault,
    SurfaceModel,
    TipEvent,
    initial_flight_state,
    initial_ground_state,
    initial_wall_state,
    mode_transition,
    step,
)
from .energy import (
    Battery,
    BatteryProtectionError,
    EnergyLedger,
    PowerModel,
    calibrate_ground_power,
    drain,
    endurance_ratio,
    mode_power,
    range_estimate,
    usable_propulsion_energy_wh,
)
from .planner import (
    MissionLeg,
    MissionPlan,
    NoPathError,
    PlannerConfig,
    classify_traversability,
    plan,
    validate_plan,
)
from .scenario import Scenario, ScenarioError, load_scenario, run_scenario
from .simulator import ScriptEvent, SimResult, Simulator, instantaneous_power
from .statics import (
    InfeasibleTiltError,
    decompose_thrust,
    incline_equilibrium,
    optimal_wall_tilt,
    tipping_slope,
    wall_climb_analysis,
)
from .terrain import TerrainGrid, load_terrain_file, terrain_from_ascii
from .vehicle import (
    MassBudget,
    RotorModel,
    VehicleParams,
    design_metrics,
    load_mass_budget_file,
    load_rotor_table,
    load_rotor_table_file,
)

__version__ = "0.1.0"

__all__ = [
    "Battery",
    "BatteryProtectionError",
    "ControlSetpoint",
    "ControllerGains",
    "DetachEvent",
    "EnergyLedger",
    "InfeasibleTiltError",
    "MassBudget",
    "MissionLeg",
    "MissionPlan",
    "Mode",
    "NoPathError",
    "PlannerConfig",
    "PowerModel",
    "RotorModel",
    "Scenario",
    "ScenarioError",
    "ScriptEvent",
    "SimResult",
    "SimState",
    "SimulationFault",
    "Simulator",
    "SurfaceModel",
    "TerrainGrid",
    "TipEvent",
    "VehicleParams",
    "calibrate_ground_power",
    "classify_traversability",
    "decompose_thrust",
    "default_batteries",
    "default_mass_budget",
    "default_params",
    "default_power_model",
    "default_rotor",
    "design_metrics",
    "drain",
    "endurance_ratio",
    "incline_equilibrium",
    "initial_flight_state",
    "initial_ground_state",
    "initial_wall_state",
    "instantaneous_power",
    "load_mass_budget_file",
    "load_rotor_table",
    "load_rotor_table_file",
    "load_scenario",
    "load_terrain_file",
    "mode_power",
    "mode_transition",
    "optimal_wall_tilt",
    "plan",
    "range_estimate",
    "run_scenario",
    "step",
    "terrain_from_ascii",
    "tipping_slope",
    "usable_propulsion_energy_wh",
    "validate_plan",
    "wall_climb_analysis",
]
