import math

import pytest
from hypothesis import given, strategies as st

from flydrive.vehicle import (
    MassComponent,
    RotorTableError,
    ThrustSaturationError,
    VehicleParams,
    design_metrics,
    load_mass_budget,
    load_rotor_table,
    servo_torque_check,
)


def test_default_params_masses(params):
    assert params.empty_mass == 2.7
    assert params.mtom == 4.0
    assert params.total_mass(1.3) == 4.0
    assert params.operating_mass == 2.7


def test_total_mass_rejects_overload(params):
    with pytest.raises(ValueError):
        params.total_mass(1.5)
    with pytest.raises(ValueError):
        params.total_mass(-0.1)


def test_params_reject_asymmetric_rotors():
    with pytest.raises(ValueError):
        VehicleParams(rotor_positions=(
            (0.3, 0.2, 0.1), (0.2, -0.2, 0.1), (-0.2, 0.2, 0.1), (-0.2, -0.2, 0.1),
        ))


def test_params_reject_budget_overflow():
    with pytest.raises(ValueError):
        VehicleParams(empty_mass=3.0, payload_mass=1.3, mtom=4.0)


class TestRotorTable:
    def test_endpoints(self, rotor):
        assert rotor.thrust_at(0.0) == 0.0
        assert rotor.thrust_at(1.0) == pytest.approx(18.08)
        assert rotor.max_thrust == pytest.approx(18.08)

    def test_interpolation_is_monotone(self, rotor):
        prev = -1.0
        for i in range(101):
            t = rotor.thrust_at(i / 100.0)
            assert t > prev or (i == 0 and t == 0.0)
            prev = t

    def test_command_thrust_round_trip(self, rotor):
        for c in (0.05, 0.25, 0.5, 0.777, 1.0):
            assert rotor.command_at(rotor.thrust_at(c)) == pytest.approx(c, abs=1e-9)

    @given(st.floats(min_value=0.0, max_value=18.08))
    def test_power_increases_with_thrust(self, thrust):
        # session fixture not available inside @given, rebuild is cheap
        from flydrive.defaults import default_rotor

        r = default_rotor()
        p1 = r.power_at_thrust(thrust)
        p2 = r.power_at_thrust(min(thrust + 0.5, r.max_thrust))
        assert p2 >= p1 >= 0.0

    def test_command_out_of_range(self, rotor):
        with pytest.raises(ValueError):
            rotor.thrust_at(1.2)
        with pytest.raises(ValueError):
            rotor.thrust_at(-0.1)

    def test_saturation_error(self, rotor):
        with pytest.raises(ThrustSaturationError):
            rotor.command_at(18.09)

    def test_bad_header_reports_line(self):
        with pytest.raises(RotorTableError) as err:
            load_rotor_table("command,thrust\n0,0\n")
        assert "line 1" in str(err.value)

    def test_non_monotone_rejected(self):
        text = "command,thrust_n,power_w\n0,0,0\n0.5,9,100\n1.0,8,200\n"
        with pytest.raises(RotorTableError) as err:
            load_rotor_table(text)
        assert "line 4" in str(err.value)

    def test_comments_and_blanks_ignored(self):
        text = (
            "# bench data\ncommand,thrust_n,power_w\n0,0,0\n\n"
            "# midpoint\n0.5,6.0,70\n1.0,18.0,350\n"
        )
        rotor = load_rotor_table(text)
        assert rotor.max_thrust == 18.0


class TestMassBudget:
    def test_default_budget_totals(self):
        from flydrive.defaults import default_mass_budget

        budget = default_mass_budget()
        assert budget.empty_mass == pytest.approx(2.7, abs=1e-9)
        assert budget.gam_mass == pytest.approx(0.3288, abs=1e-9)
        assert budget.category_total("payload") == pytest.approx(1.3)

    def test_default_budget_matches_params(self, params):
        from flydrive.defaults import default_mass_budget

        default_mass_budget().validate_against(params)  # should not raise

    def test_mismatch_detected(self, params):
        budget = load_mass_budget(
            "name,mass_kg,category\nframe,1.0,structure\n"
        )
        with pytest.raises(ValueError):
            budget.validate_against(params)

    def test_unknown_category_rejected(self):
        with pytest.raises(ValueError) as err:
            load_mass_budget("name,mass_kg,category\nwidget,0.1,misc\n")
        assert "line 2" in str(err.value)

    def test_negative_mass_rejected(self):
        with pytest.raises(ValueError):
            MassComponent("ghost", -0.1, "structure")


class TestDesignMetrics:
    def test_headline_numbers(self, params, rotor):
        m = design_metrics(params, rotor, usable_energy_wh=95.2)
        assert m.tw_ratio == pytest.approx(1.843, abs=1e-3)
        assert m.payload_capacity == pytest.approx(1.3, abs=1e-3)
        assert m.gam_mass_fraction == pytest.approx(0.0822, abs=5e-4)

    def test_hover_endurance_scales_with_energy(self, params, rotor):
        a = design_metrics(params, rotor, usable_energy_wh=50.0)
        b = design_metrics(params, rotor, usable_energy_wh=100.0)
        assert b.hover_endurance_estimate == pytest.approx(
            2.0 * a.hover_endurance_estimate
        )

    def test_rejects_nonpositive_energy(self, params, rotor):
        with pytest.raises(ValueError):
            design_metrics(params, rotor, usable_energy_wh=0.0)


def test_servo_torque_check_margin():
    # gyroscopic moment I*w*wt = 1e-4 * 800 * 2 = 0.16 N m, doubled for safety
    check = servo_torque_check(1e-4, 800.0, 2.0, servo_torque=0.5)
    assert check.gyroscopic_moment == pytest.approx(0.16)
    assert check.required_torque == pytest.approx(0.32)
    assert check.passed
    weak = servo_torque_check(1e-4, 800.0, 2.0, servo_torque=0.2)
    assert not weak.passed
