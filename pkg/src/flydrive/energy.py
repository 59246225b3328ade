"""Battery state-of-charge bookkeeping with over-discharge protection and the
calibrated per-mode power model behind every range and endurance figure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import statics
from .vehicle import RotorModel, VehicleParams

PROPULSION_A = "prop_a"
PROPULSION_B = "prop_b"
ELECTRONICS = "electronics"
BATTERY_IDS = (PROPULSION_A, PROPULSION_B, ELECTRONICS)

POWER_MODES = ("ground", "incline", "wall", "flight", "hover")


class BatteryProtectionError(RuntimeError):
    """Drain attempted on a battery whose protection already tripped."""


class UnknownPayloadError(ValueError):
    """No calibration exists for the requested payload configuration."""


class CalibrationError(ValueError):
    """Calibration points cannot determine the power coefficients."""


@dataclass
class Battery:
    """One pack with SoC tracking; protection trips at the usable floor.

    Mutable and confined to a single simulation context; transfer, don't
    share. The protection threshold is the state of charge equivalent to the
    per-cell cutoff voltage, expressed through usable_fraction.
    """

    battery_id: str
    cells_series: int
    capacity_ah: float
    nominal_cell_voltage: float = 3.7
    cutoff_cell_voltage: float = 3.3
    soc: float = 1.0
    usable_fraction: float = 1.0
    tripped: bool = field(default=False, init=False)

    def __post_init__(self):
        if self.battery_id not in BATTERY_IDS:
            raise ValueError(f"battery_id must be one of {BATTERY_IDS}")
        if self.cells_series < 1 or self.capacity_ah <= 0:
            raise ValueError("cells_series >= 1 and capacity_ah > 0 required")
        if self.cutoff_cell_voltage >= self.nominal_cell_voltage:
            raise ValueError("cutoff voltage must be below nominal")
        if not 0.0 <= self.soc <= 1.0:
            raise ValueError("soc must be in [0, 1]")
        if not 0.0 < self.usable_fraction <= 1.0:
            raise ValueError("usable_fraction must be in (0, 1]")

    @property
    def is_propulsion(self) -> bool:
        return self.battery_id in (PROPULSION_A, PROPULSION_B)

    @property
    def nominal_voltage(self) -> float:
        return self.cells_series * self.nominal_cell_voltage

    @property
    def pack_energy_wh(self) -> float:
        return self.capacity_ah * self.nominal_voltage

    @property
    def usable_energy_wh(self) -> float:
        return self.pack_energy_wh * self.usable_fraction

    @property
    def protection_soc(self) -> float:
        """SoC floor below which the over-discharge protection cuts power."""
        return 1.0 - self.usable_fraction

    @property
    def remaining_usable_wh(self) -> float:
        return max(0.0, (self.soc - self.protection_soc)) * self.pack_energy_wh


@dataclass(frozen=True)
class ProtectionEvent:
    battery_id: str
    soc: float


def drain(battery: Battery, power_w: float, dt_s: float) -> list[ProtectionEvent]:
    """Discharge a battery by power_w over dt_s seconds.

    Returns the protection events raised by this call (at most one). Draining
    an already-tripped battery is refused.
    """
    if power_w < 0:
        raise ValueError("power must be >= 0")
    if dt_s < 0:
        raise ValueError("dt must be >= 0")
    if battery.tripped and power_w > 0:
        raise BatteryProtectionError(
            f"battery {battery.battery_id} is below its protection threshold"
        )
    if power_w == 0 or dt_s == 0:
        return []
    delta = power_w * dt_s / (battery.pack_energy_wh * 3600.0)
    new_soc = battery.soc - delta
    events = []
    if new_soc <= battery.protection_soc:
        new_soc = battery.protection_soc
        battery.tripped = True
        events.append(ProtectionEvent(battery.battery_id, new_soc))
    battery.soc = new_soc
    return events


@dataclass
class EnergyLedger:
    """Per-mode and per-battery energy accounting plus a (t, power) timeline."""

    per_mode_wh: dict = field(default_factory=dict)
    per_battery_ah: dict = field(default_factory=dict)
    timeline: list = field(default_factory=list)

    def record(self, t_s: float, dt_s: float, power_w: float, mode: str,
               battery: Battery | None = None) -> None:
        wh = power_w * dt_s / 3600.0
        self.per_mode_wh[mode] = self.per_mode_wh.get(mode, 0.0) + wh
        self.timeline.append((t_s, power_w))
        if battery is not None and power_w > 0:
            ah = power_w * dt_s / (battery.nominal_voltage * 3600.0)
            key = battery.battery_id
            self.per_battery_ah[key] = self.per_battery_ah.get(key, 0.0) + ah

    @property
    def total_wh(self) -> float:
        return sum(self.per_mode_wh.values())

    def to_dict(self) -> dict:
        return {
            "total_wh": self.total_wh,
            "per_mode_wh": dict(sorted(self.per_mode_wh.items())),
            "per_battery_ah": dict(sorted(self.per_battery_ah.items())),
        }


def calibrate_ground_power(points: list[tuple[float, float]]) -> tuple[float, float]:
    """Fit P(v) = c1 v + c3 v^3 to (speed, power) samples.

    Exact solve with two points, least squares beyond; the zero-power-at-rest
    constraint is built into the functional form.
    """
    if len(points) < 2:
        raise CalibrationError("need at least 2 calibration points")
    speeds = [p[0] for p in points]
    if any(v <= 0 for v in speeds):
        raise CalibrationError("calibration speeds must be > 0")
    if len(set(speeds)) != len(speeds):
        raise CalibrationError("duplicate calibration speeds make the system singular")
    a = np.array([[v, v**3] for v, _ in points], dtype=float)
    b = np.array([p for _, p in points], dtype=float)
    if len(points) == 2:
        try:
            c1, c3 = np.linalg.solve(a, b)
        except np.linalg.LinAlgError as exc:
            raise CalibrationError(str(exc)) from None
    else:
        (c1, c3), *_ = np.linalg.lstsq(a, b, rcond=None)
    return float(c1), float(c3)


@dataclass(frozen=True)
class PowerModel:
    """Calibrated per-mode electrical power. Immutable after construction.

    Ground power is c1 v + c3 v^3 per payload configuration; incline adds the
    rotor power to hold m g sin(psi); wall applies the rotor curve to the
    climb thrust times a wake residual factor; flight and hover are calibrated
    constants.
    """

    params: VehicleParams
    rotor: RotorModel
    ground_coeffs: dict  # payload kg -> (c1, c3)
    flight_power_w: dict  # payload kg -> W at the reference speed
    hover_power_w: float
    wall_wake_factor: float = 1.8

    def _lookup(self, table: dict, payload: float, what: str) -> float:
        for key, value in table.items():
            if abs(key - payload) <= 1e-6:
                return value
        raise UnknownPayloadError(
            f"no {what} calibration for payload {payload} kg "
            f"(known: {sorted(table)})"
        )

    def ground_power(self, speed: float, payload: float = 0.0) -> float:
        c1, c3 = self._lookup(self.ground_coeffs, payload, "ground")
        return c1 * speed + c3 * speed**3

    def incline_power(self, slope_deg: float, speed: float, payload: float = 0.0) -> float:
        m = self.params.total_mass(payload)
        hold_thrust = m * self.params.gravity * math.sin(math.radians(slope_deg))
        rotor_power = 4.0 * self.rotor.power_at_thrust(hold_thrust / 4.0)
        return self.ground_power(speed, payload) + rotor_power

    def wall_power(self, tilt_deg: float, payload: float = 0.0) -> float:
        analysis = statics.wall_climb_analysis(
            self.params, tilt_deg, climbing=True, rotor=self.rotor, payload=payload
        )
        if math.isinf(analysis.required_thrust):
            raise ValueError(f"wall climb not feasible at tilt {tilt_deg} deg")
        per_rotor = analysis.required_thrust / 4.0
        return self.wall_wake_factor * 4.0 * self.rotor.power_at_thrust(per_rotor)

    def flight_power(self, payload: float = 0.0) -> float:
        return self._lookup(self.flight_power_w, payload, "flight")

    def hover_power(self, payload: float = 0.0) -> float:
        if abs(payload) > 1e-6:
            raise UnknownPayloadError("hover power is calibrated for zero payload only")
        return self.hover_power_w


def mode_power(
    model: PowerModel,
    mode: str,
    speed: float = 0.0,
    payload: float = 0.0,
    slope_deg: float | None = None,
    tilt_deg: float | None = None,
) -> float:
    """Electrical power (W) to maintain an operating state."""
    if speed < 0:
        raise ValueError("speed must be >= 0")
    if mode == "ground":
        return model.ground_power(speed, payload)
    if mode == "incline":
        if slope_deg is None:
            raise ValueError("incline mode needs slope_deg")
        return model.incline_power(slope_deg, speed, payload)
    if mode == "wall":
        if tilt_deg is None:
            raise ValueError("wall mode needs tilt_deg")
        return model.wall_power(tilt_deg, payload)
    if mode == "flight":
        return model.flight_power(payload)
    if mode == "hover":
        return model.hover_power(payload)
    raise ValueError(f"unknown mode {mode!r}; expected one of {POWER_MODES}")


def endurance_ratio(model: PowerModel, payload: float, speed: float) -> float:
    """Flight power over ground power at the same speed."""
    ground = model.ground_power(speed, payload)
    if ground <= 0:
        raise ValueError("endurance ratio undefined at zero ground power (v = 0)")
    return model.flight_power(payload) / ground


def usable_propulsion_energy_wh(batteries: list[Battery]) -> float:
    return sum(b.usable_energy_wh for b in batteries if b.is_propulsion)


def range_estimate(
    model: PowerModel,
    batteries: list[Battery],
    mode: str,
    speed: float,
    payload: float = 0.0,
    slope_deg: float | None = None,
    tilt_deg: float | None = None,
) -> float:
    """Distance (m) the propulsion packs sustain a mode at constant speed."""
    if speed <= 0:
        raise ValueError("range needs speed > 0")
    power = mode_power(model, mode, speed, payload, slope_deg, tilt_deg)
    energy = usable_propulsion_energy_wh(batteries)
    if power <= 0:
        return math.inf
    return energy / power * 3600.0 * speed
