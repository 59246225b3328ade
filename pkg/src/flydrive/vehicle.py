"""Physical parameterization of the vehicle: geometry, masses, rotor
performance curves built from ingested test-stand tables, and the headline
design metrics (thrust-to-weight, payload, hover sizing, servo torque)."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

GRAVITY = 9.81  # m/s^2, used for all kgf <-> N conversions

MASS_CATEGORIES = ("structure", "propulsion", "energy", "gam", "electronics", "payload")


class RotorTableError(ValueError):
    """Malformed or non-physical rotor performance table."""


class ThrustSaturationError(ValueError):
    """Requested thrust exceeds the rotor's maximum."""


@dataclass(frozen=True)
class VehicleParams:
    """Single source of physical truth for the vehicle.

    All masses in kg, lengths in m, angles handled in degrees at the API
    boundary. Frozen: safe to share between threads.
    """

    empty_mass: float = 2.7
    payload_mass: float = 1.3
    mtom: float = 4.0
    body_dims: tuple[float, float, float] = (0.695, 0.6935, 0.302)  # L, W, H
    # half-spacing between wheel contact lines, longitudinal / lateral
    wheel_contact_half_spacing_long: float = 0.270
    wheel_contact_half_spacing_lat: float = 0.270
    # center of mass height above the wheel contact plane; together with the
    # longitudinal half-spacing this fixes the 60.93 deg tip angle
    com_height: float = 0.1501
    wheel_ground_clearance: float = 0.050
    # rotor hub lever arms in body frame (x fwd, y left, z up from the wheel
    # contact plane); must be symmetric about both body axes
    rotor_positions: tuple[tuple[float, float, float], ...] = (
        (0.248, 0.248, 0.1501),
        (0.248, -0.248, 0.1501),
        (-0.248, 0.248, 0.1501),
        (-0.248, -0.248, 0.1501),
    )
    tilt_axle_count: int = 2
    gravity: float = GRAVITY
    rolling_resistance_coeff: float = 0.03
    wall_friction_coeff: float = 0.6  # static, rubber on concrete
    # skid-steer lateral Coulomb friction for the fixed wheels
    lateral_friction_coeff: float = 0.6
    # body inertia diagonal (kg m^2), box estimate from dims and empty mass
    inertia: tuple[float, float, float] = (0.130, 0.132, 0.217)
    # rotor drag torque per newton of thrust (m), for flight-mode yaw authority
    rotor_torque_coeff: float = 0.016

    def __post_init__(self):
        if self.empty_mass + 1e-12 < 0 or self.payload_mass < 0:
            raise ValueError("masses must be non-negative")
        if self.empty_mass + self.payload_mass > self.mtom + 1e-9:
            raise ValueError(
                f"empty_mass + payload_mass = {self.empty_mass + self.payload_mass} "
                f"exceeds mtom = {self.mtom}"
            )
        for name in ("wheel_contact_half_spacing_long", "wheel_contact_half_spacing_lat",
                     "com_height", "wheel_ground_clearance", "gravity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if any(d <= 0 for d in self.body_dims):
            raise ValueError("body dimensions must be > 0")
        if self.com_height >= self.body_dims[2]:
            raise ValueError("com_height must be below the body height")
        if len(self.rotor_positions) != 4:
            raise ValueError("exactly four rotor positions required")
        xs = sorted(p[0] for p in self.rotor_positions)
        ys = sorted(p[1] for p in self.rotor_positions)
        if abs(xs[0] + xs[3]) > 1e-9 or abs(xs[1] + xs[2]) > 1e-9:
            raise ValueError("rotor positions must be symmetric about the lateral axis")
        if abs(ys[0] + ys[3]) > 1e-9 or abs(ys[1] + ys[2]) > 1e-9:
            raise ValueError("rotor positions must be symmetric about the longitudinal axis")

    @property
    def operating_mass(self) -> float:
        """Vehicle mass without payload (the as-built platform)."""
        return self.empty_mass

    def total_mass(self, payload: float = 0.0) -> float:
        if payload < 0:
            raise ValueError("payload must be >= 0")
        m = self.empty_mass + payload
        if m > self.mtom + 1e-9:
            raise ValueError(f"mass {m} kg exceeds MTOM {self.mtom} kg")
        return m


@dataclass(frozen=True)
class RotorModel:
    """Monotone thrust<->power<->command maps from a performance table.

    Piecewise-linear between samples; exact at sample points. Thrust in
    newtons, electrical power in watts, command normalized to [0, 1].
    """

    commands: tuple[float, ...]
    thrusts: tuple[float, ...]
    powers: tuple[float, ...]
    name: str = "rotor"

    def __post_init__(self):
        n = len(self.commands)
        if n < 2 or len(self.thrusts) != n or len(self.powers) != n:
            raise RotorTableError("need at least two aligned (command, thrust, power) samples")
        if abs(self.commands[0]) > 1e-12 or abs(self.commands[-1] - 1.0) > 1e-12:
            raise RotorTableError("command samples must span [0, 1]")
        if abs(self.thrusts[0]) > 1e-12:
            raise RotorTableError("thrust at zero command must be 0")
        if self.powers[0] < 0:
            raise RotorTableError("idle power must be >= 0")
        bad = [i for i in range(1, n) if self.commands[i] <= self.commands[i - 1]]
        if bad:
            raise RotorTableError(f"commands not strictly increasing at rows {bad}")
        bad = [i for i in range(1, n) if self.thrusts[i] <= self.thrusts[i - 1]]
        if bad:
            raise RotorTableError(f"thrust not strictly increasing at rows {bad}")
        bad = [i for i in range(1, n) if self.powers[i] <= self.powers[i - 1]]
        if bad:
            raise RotorTableError(f"power not strictly increasing at rows {bad}")

    @property
    def max_thrust(self) -> float:
        """Thrust at full command, N."""
        return self.thrusts[-1]

    def thrust_at(self, command: float) -> float:
        """Interpolated thrust (N) for a normalized command in [0, 1]."""
        if not 0.0 <= command <= 1.0:
            raise ValueError(f"command {command} outside [0, 1]")
        return float(np.interp(command, self.commands, self.thrusts))

    def power_at_thrust(self, thrust: float) -> float:
        """Interpolated electrical power (W) to produce `thrust` newtons."""
        if thrust < 0:
            raise ValueError(f"thrust {thrust} must be >= 0")
        if thrust > self.max_thrust * (1 + 1e-12):
            raise ThrustSaturationError(
                f"thrust {thrust:.3f} N exceeds max {self.max_thrust:.3f} N"
            )
        return float(np.interp(thrust, self.thrusts, self.powers))

    def command_at(self, thrust: float) -> float:
        """Inverse of thrust_at (monotone curves make this well-defined)."""
        if thrust < 0:
            raise ValueError(f"thrust {thrust} must be >= 0")
        if thrust > self.max_thrust * (1 + 1e-12):
            raise ThrustSaturationError(
                f"thrust {thrust:.3f} N exceeds max {self.max_thrust:.3f} N"
            )
        return float(np.interp(thrust, self.thrusts, self.commands))

    def efficiency_at(self, thrust: float) -> float:
        """Thrust-specific efficiency in g/W (the usual test-stand figure)."""
        power = self.power_at_thrust(thrust)
        if power <= 0:
            return math.inf if thrust > 0 else 0.0
        return thrust / GRAVITY * 1000.0 / power


def load_rotor_table(table_source: str, name: str = "rotor") -> RotorModel:
    """Parse a performance table into a RotorModel.

    Expected CSV layout: header ``command,thrust_n,power_w``, lines starting
    with ``#`` ignored. Raises RotorTableError with the offending line number
    on malformed rows and names offending rows on non-monotone data.
    """
    commands, thrusts, powers = [], [], []
    header_seen = False
    for lineno, raw in enumerate(io.StringIO(table_source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            cols = [c.strip().lower() for c in line.split(",")]
            if cols != ["command", "thrust_n", "power_w"]:
                raise RotorTableError(
                    f"line {lineno}: expected header 'command,thrust_n,power_w', got {line!r}"
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise RotorTableError(f"line {lineno}: expected 3 columns, got {len(parts)}")
        try:
            c, t, p = (float(x) for x in parts)
        except ValueError as exc:
            raise RotorTableError(f"line {lineno}: {exc}") from None
        if not 0.0 <= c <= 1.0:
            raise RotorTableError(f"line {lineno}: command {c} outside [0, 1]")
        if commands and (c <= commands[-1] or t <= thrusts[-1] or p <= powers[-1]):
            raise RotorTableError(
                f"line {lineno}: table must be strictly increasing in every column"
            )
        commands.append(c)
        thrusts.append(t)
        powers.append(p)
    if not header_seen:
        raise RotorTableError("empty table: missing header")
    if len(commands) < 2:
        raise RotorTableError(f"need at least 2 data rows, got {len(commands)}")
    return RotorModel(tuple(commands), tuple(thrusts), tuple(powers), name=name)


def load_rotor_table_file(path, name: str | None = None) -> RotorModel:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    import os

    return load_rotor_table(text, name=name or os.path.splitext(os.path.basename(path))[0])


@dataclass(frozen=True)
class MassComponent:
    name: str
    mass_kg: float
    category: str

    def __post_init__(self):
        if self.category not in MASS_CATEGORIES:
            raise ValueError(f"unknown mass category {self.category!r}")
        if self.mass_kg < 0:
            raise ValueError(f"component {self.name}: mass must be >= 0")


@dataclass(frozen=True)
class MassBudget:
    """Component-level mass breakdown; categories must sum to empty mass."""

    components: tuple[MassComponent, ...]

    def category_total(self, category: str) -> float:
        if category not in MASS_CATEGORIES:
            raise ValueError(f"unknown mass category {category!r}")
        return sum(c.mass_kg for c in self.components if c.category == category)

    @property
    def empty_mass(self) -> float:
        """Sum of everything that is not payload."""
        return sum(c.mass_kg for c in self.components if c.category != "payload")

    @property
    def gam_mass(self) -> float:
        return self.category_total("gam")

    def validate_against(self, params: VehicleParams, tol: float = 1e-9) -> None:
        if abs(self.empty_mass - params.empty_mass) > tol:
            raise ValueError(
                f"budget sums to {self.empty_mass!r} kg, params declare "
                f"{params.empty_mass!r} kg empty mass"
            )


def load_mass_budget(csv_text: str) -> MassBudget:
    """Parse a ``name,mass_kg,category`` CSV (``#`` comments allowed)."""
    components = []
    header_seen = False
    for lineno, raw in enumerate(io.StringIO(csv_text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            cols = [c.strip().lower() for c in line.split(",")]
            if cols != ["name", "mass_kg", "category"]:
                raise ValueError(f"line {lineno}: expected header 'name,mass_kg,category'")
            header_seen = True
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 3 columns")
        try:
            mass = float(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: bad mass {parts[1]!r}") from None
        try:
            components.append(MassComponent(parts[0], mass, parts[2]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not components:
        raise ValueError("empty mass budget")
    return MassBudget(tuple(components))


def load_mass_budget_file(path) -> MassBudget:
    with open(path, "r", encoding="utf-8") as fh:
        return load_mass_budget(fh.read())


@dataclass(frozen=True)
class DesignMetrics:
    tw_ratio: float
    payload_capacity: float  # kg
    gam_mass_fraction: float
    hover_power_estimate: float  # W
    hover_endurance_estimate: float  # s


def design_metrics(
    params: VehicleParams,
    rotor: RotorModel,
    usable_energy_wh: float,
    gam_mass_kg: float | None = None,
) -> DesignMetrics:
    """Headline sizing numbers for a four-rotor build.

    tw_ratio is total maximum thrust over MTOM weight; hover power comes from
    the rotor curve at the per-rotor hover thrust; endurance is usable energy
    over hover power. gam_mass_kg defaults to the bundled budget's total.
    """
    if usable_energy_wh <= 0:
        raise ValueError("usable_energy_wh must be > 0")
    if gam_mass_kg is None:
        from .defaults import DEFAULT_GAM_MASS_KG

        gam_mass_kg = DEFAULT_GAM_MASS_KG
    tw = 4.0 * rotor.max_thrust / (params.mtom * params.gravity)
    hover_thrust_per_rotor = params.mtom * params.gravity / 4.0
    hover_power = 4.0 * rotor.power_at_thrust(hover_thrust_per_rotor)
    endurance = usable_energy_wh * 3600.0 / hover_power if hover_power > 0 else math.inf
    fraction = gam_mass_kg / params.mtom
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"GAM mass fraction {fraction} outside (0, 1)")
    return DesignMetrics(
        tw_ratio=tw,
        payload_capacity=params.mtom - params.empty_mass,
        gam_mass_fraction=fraction,
        hover_power_estimate=hover_power,
        hover_endurance_estimate=endurance,
    )


@dataclass(frozen=True)
class ServoTorqueCheck:
    passed: bool
    required_torque: float  # N m, safety factor included
    gyroscopic_moment: float  # N m
    margin: float  # servo torque minus required


def servo_torque_check(
    rotor_inertia: float,
    spin_rate: float,
    tilt_rate: float,
    servo_torque: float,
    safety_factor: float = 2.0,
) -> ServoTorqueCheck:
    """Check the tilt servo against the gyroscopic moment of a spinning rotor.

    A rotor with spin inertia I at rate w precessed at tilt rate wt produces a
    moment I*w*wt; the servo must beat it with the given safety factor.
    """
    if rotor_inertia < 0 or spin_rate < 0 or tilt_rate < 0:
        raise ValueError("inertia and rates must be >= 0")
    if servo_torque <= 0 or safety_factor <= 0:
        raise ValueError("servo_torque and safety_factor must be > 0")
    moment = rotor_inertia * spin_rate * tilt_rate
    required = safety_factor * moment
    return ServoTorqueCheck(
        passed=servo_torque >= required,
        required_torque=required,
        gyroscopic_moment=moment,
        margin=servo_torque - required,
    )
