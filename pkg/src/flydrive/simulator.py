"""Script-driven simulation runs: timed setpoints and mode changes in, a
trajectory trace plus an energy ledger out.

Power accounting uses the calibrated per-mode model rather than summing the
rotor curve, so a simulated mission can be compared one-to-one with planner
predictions. Traces are written with repr() floats; two runs of the same
script produce byte-identical files.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace

from . import dynamics
from .dynamics import (
    ControlSetpoint,
    ControllerGains,
    Mode,
    SimState,
    SurfaceModel,
    TiltSchedule,
)
from .energy import (
    Battery,
    BatteryProtectionError,
    EnergyLedger,
    PowerModel,
    drain,
)
from .vehicle import RotorModel, VehicleParams

TRACE_HEADER = (
    "time_s", "x_m", "y_m", "z_m", "vx_mps", "vy_mps", "vz_mps",
    "qw", "qx", "qy", "qz", "tilt_front_deg", "tilt_rear_deg",
    "cmd_fl", "cmd_fr", "cmd_rl", "cmd_rr", "mode", "power_w",
)

HOVER_SPEED_THRESHOLD_MPS = 0.5  # below this, flight power is hover power


@dataclass(frozen=True)
class ScriptEvent:
    """One timed command: change the setpoint and/or request a transition."""

    t_s: float
    setpoint: ControlSetpoint | None = None
    transition_to: Mode | None = None


@dataclass
class SimResult:
    final_state: SimState
    rows: list
    ledger: EnergyLedger
    events: list
    faulted: bool = False
    fault_reason: str | None = None

    def trace_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(TRACE_HEADER) + "\n")
        for row in self.rows:
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def write_trace(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.trace_csv())


def instantaneous_power(
    model: PowerModel,
    state: SimState,
    surface: SurfaceModel,
    payload: float = 0.0,
    schedule: TiltSchedule | None = None,
) -> float:
    """Electrical propulsion power for the current state, W."""
    mode = state.mode
    if mode == Mode.GROUND:
        return model.ground_power(abs(dynamics.along_track_speed(state, surface)), payload)
    if mode == Mode.INCLINE:
        v = abs(dynamics.along_track_speed(state, surface))
        return model.incline_power(surface.slope_deg, v, payload)
    if mode == Mode.WALL:
        tilt = 0.5 * (state.tilt_front_deg + state.tilt_rear_deg)
        return model.wall_power(tilt, payload)
    if mode == Mode.FLIGHT:
        vx, vy, vz = state.velocity
        horizontal = math.hypot(vx, vy)
        if horizontal < HOVER_SPEED_THRESHOLD_MPS:
            base = model.hover_power_w
        else:
            base = model.flight_power(payload)
        climb = model.params.total_mass(payload) * model.params.gravity * max(0.0, vz)
        return base + climb
    if mode == Mode.TRANSITION:
        # tilting through a flight configuration means the rotors carry the
        # vehicle; a tilt swap on the ground is nearly free
        airborne = schedule is not None and (
            schedule.target_mode == Mode.FLIGHT or not any(state.contact)
        )
        return model.hover_power_w if airborne else 0.0
    raise ValueError(f"unknown mode {mode}")


class Simulator:
    """Owns the physical context and marches scripts through time."""

    def __init__(
        self,
        params: VehicleParams,
        rotor: RotorModel,
        power_model: PowerModel,
        batteries: list[Battery] | None = None,
        gains: ControllerGains | None = None,
        payload: float = 0.0,
        avionics_power_w: float = 5.0,
        dt_s: float = 0.001,
        trace_decimation: int = 10,
    ):
        if trace_decimation < 1:
            raise ValueError("trace_decimation must be >= 1")
        self.params = params
        self.rotor = rotor
        self.power_model = power_model
        self.batteries = batteries if batteries is not None else []
        self.gains = gains or ControllerGains()
        self.payload = payload
        self.avionics_power_w = avionics_power_w
        self.dt_s = dt_s
        self.trace_decimation = trace_decimation

    def _propulsion_packs(self) -> list[Battery]:
        return [b for b in self.batteries if b.is_propulsion]

    def _electronics_pack(self) -> Battery | None:
        for b in self.batteries:
            if not b.is_propulsion:
                return b
        return None

    def run(
        self,
        initial_state: SimState,
        surface: SurfaceModel,
        script: list[ScriptEvent],
        duration_s: float,
    ) -> SimResult:
        if duration_s < 0:
            raise ValueError("duration must be >= 0")
        script = sorted(script, key=lambda ev: ev.t_s)
        state = initial_state
        setpoint = ControlSetpoint(mode=state.mode)
        schedule: TiltSchedule | None = None
        ledger = EnergyLedger()
        events: list[dict] = []
        rows = [_trace_row(state, instantaneous_power(
            self.power_model, state, surface, self.payload, schedule))]
        n_steps = int(round(duration_s / self.dt_s))
        next_event = 0
        faulted = False
        fault_reason = None
        packs = self._propulsion_packs()
        electronics = self._electronics_pack()

        for i in range(n_steps):
            while next_event < len(script) and script[next_event].t_s <= state.time_s + 1e-12:
                ev = script[next_event]
                next_event += 1
                if ev.setpoint is not None:
                    setpoint = ev.setpoint
                if ev.transition_to is not None:
                    try:
                        schedule = dynamics.mode_transition(
                            state, ev.transition_to, surface=surface, params=self.params
                        )
                        state = dynamics.begin_transition(state)
                        events.append({
                            "t_s": state.time_s,
                            "kind": "transition_started",
                            "detail": ev.transition_to.value,
                        })
                    except dynamics.TransitionEnvelopeError as exc:
                        events.append({
                            "t_s": state.time_s,
                            "kind": "transition_rejected",
                            "detail": str(exc),
                        })
            was_transition = state.mode == Mode.TRANSITION
            try:
                state = dynamics.step(
                    state, setpoint, surface, self.dt_s,
                    params=self.params, rotor=self.rotor, gains=self.gains,
                    payload=self.payload, schedule=schedule,
                )
            except (dynamics.TipEvent, dynamics.DetachEvent, dynamics.SimulationFault) as exc:
                faulted = True
                fault_reason = str(exc)
                events.append({
                    "t_s": state.time_s,
                    "kind": type(exc).__name__.lower(),
                    "detail": fault_reason,
                })
                break
            if was_transition and state.mode != Mode.TRANSITION:
                events.append({
                    "t_s": state.time_s,
                    "kind": "transition_complete",
                    "detail": state.mode.value,
                })
                setpoint = replace(setpoint, mode=state.mode)
                schedule = None

            power = instantaneous_power(
                self.power_model, state, surface, self.payload, schedule
            )
            ledger.record(state.time_s, self.dt_s, power,
                          state.mode.value, battery=None)
            power_per_pack = power / max(1, len(packs))
            for pack in packs:
                try:
                    pack_events = drain(pack, power_per_pack, self.dt_s)
                except BatteryProtectionError as exc:
                    faulted = True
                    fault_reason = str(exc)
                    break
                ledger.per_battery_ah[pack.battery_id] = (
                    ledger.per_battery_ah.get(pack.battery_id, 0.0)
                    + power_per_pack * self.dt_s / (pack.nominal_voltage * 3600.0)
                )
                for pe in pack_events:
                    events.append({
                        "t_s": state.time_s,
                        "kind": "battery_protection",
                        "detail": pe.battery_id,
                    })
                    faulted = True
                    fault_reason = f"battery {pe.battery_id} protection tripped"
            if electronics is not None and not electronics.tripped:
                try:
                    elec_events = drain(electronics, self.avionics_power_w, self.dt_s)
                except BatteryProtectionError:
                    elec_events = None
                if elec_events is not None:
                    ledger.record(state.time_s, self.dt_s, self.avionics_power_w,
                                  "avionics", battery=electronics)
                    for pe in elec_events:
                        events.append({
                            "t_s": state.time_s,
                            "kind": "battery_protection",
                            "detail": pe.battery_id,
                        })
            if faulted:
                break
            if (i + 1) % self.trace_decimation == 0:
                rows.append(_trace_row(state, power))
        return SimResult(
            final_state=state,
            rows=rows,
            ledger=ledger,
            events=events,
            faulted=faulted,
            fault_reason=fault_reason,
        )


def _trace_row(state: SimState, power_w: float) -> tuple:
    values = (
        state.time_s, *state.position, *state.velocity, *state.quaternion,
        state.tilt_front_deg, state.tilt_rear_deg, *state.rotor_commands,
    )
    return tuple(repr(v) for v in values) + (state.mode.value, repr(power_w))
