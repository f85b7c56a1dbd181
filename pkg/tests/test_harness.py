import json
import math

import pytest

from adcslab.control import ActuatorLimits, Fidelity, Gains
from adcslab.environment import OrbitConfig, orbit_period
from adcslab.harness import (
    ROD_EFFECTIVE_TORQUE_NM,
    TELEMETRY_COLUMNS,
    DivergenceError,
    Scenario,
    Telemetry,
    align_time,
    assemble,
    default_limits,
    default_scenario,
    detumble_time,
    monte_carlo,
    run_scenario,
    run_scenario_metrics,
    settle_time,
)
from adcslab.massmodel import bundled_catalog
from adcslab.quatmath import RPM_TO_RADPS, Vec3, quat_from_euler, vnorm

PERIOD = orbit_period(OrbitConfig())


def _row(t, w=(0.0, 0.0, 0.0), euler=(0.0, 0.0, 0.0)):
    return (t, 1.0, 0.0, 0.0, 0.0, *w, *euler,
            0.0, 0.0, 0.0, 0.0, 0.0, "detumble")


# ------------------------------------------------------------- scenario checks

@pytest.mark.parametrize("bad", [
    dict(mode="tumble"),
    dict(regolith_policy="loose"),
    dict(regolith_policy="fixed"),                      # needs a position
    dict(regolith_policy="sampled"),                    # needs a seed
    dict(dt_s=0.0),
    dict(dt_s=float("nan")),
    dict(duration_s=-5.0),
    dict(duration_orbits=0.0),
    dict(env_update_every_s=0.0),
    dict(telemetry_cadence_s=0.0),
    dict(settle_band=0.0),
    dict(settle_band=1.0),
    dict(align_tolerance_deg=0.0),
    dict(spin_target_rpm=0.0),
    dict(min_principal_inertia_kgm2=0.0),
    dict(mode="spin", schedule=((10.0, "despin"),)),    # schedule outside conops
    dict(mode="conops", schedule=((-1.0, "spin"),)),
    dict(mode="conops", schedule=((10.0, "tumble"),)),
    dict(omega0_radps=Vec3(float("inf"), 0.0, 0.0)),
])
def test_scenario_rejects_bad_inputs(bad):
    with pytest.raises(ValueError):
        Scenario(**bad)


def test_duration_in_orbits_wins():
    s = Scenario(duration_s=10.0, duration_orbits=0.5)
    assert s.resolved_duration_s() == pytest.approx(0.5 * PERIOD, rel=1e-12)


def test_dt_longer_than_run_is_rejected():
    with pytest.raises(ValueError, match="exceeds"):
        Scenario(duration_s=5.0, dt_s=10.0).resolved_duration_s()


def test_telemetry_cadence_rules():
    s = Scenario(duration_s=60.0)
    assert s.resolved_cadence_s(60.0) == s.dt_s          # short run: every step
    assert s.resolved_cadence_s(600.0) == 1.0            # long run: 1 Hz
    explicit = Scenario(duration_s=60.0, telemetry_cadence_s=0.5)
    assert explicit.resolved_cadence_s(600.0) == 0.5


# ------------------------------------------------------------- assembly

def test_assemble_defaults_to_the_stowed_flight_catalog():
    asm = assemble(Scenario())
    assert asm.catalog.name == bundled_catalog().name
    assert asm.regolith_position_cm == Vec3(0.0, 0.0, 14.0)
    assert asm.cg_m.z == pytest.approx(-0.007909090909090909, rel=1e-12)
    # the exact stack is collinear; the floor makes the z axis propagatable
    assert min(asm.properties.inertia_kgm2.diagonal()) == pytest.approx(0.0, abs=1e-15)
    assert min(asm.inertia.principal_moments) == pytest.approx(5e-3, rel=1e-12)


def test_assemble_fixed_regolith_moves_the_payload():
    asm = assemble(Scenario(regolith_policy="fixed", regolith_fixed_cm=Vec3(2.0, -1.0, 4.0)))
    assert asm.regolith_position_cm == Vec3(2.0, -1.0, 4.0)


def test_assemble_rejects_regolith_outside_the_chamber():
    s = Scenario(regolith_policy="fixed", regolith_fixed_cm=Vec3(10.0, 0.0, 5.0))
    with pytest.raises(ValueError, match="outside the payload chamber"):
        assemble(s)


def test_assemble_sampled_regolith_is_seeded():
    a = assemble(Scenario(regolith_policy="sampled", seed=7))
    b = assemble(Scenario(regolith_policy="sampled", seed=7))
    c = assemble(Scenario(regolith_policy="sampled", seed=8))
    assert a.regolith_position_cm == b.regolith_position_cm
    assert a.regolith_position_cm != c.regolith_position_cm
    assert bundled_catalog().chamber.contains(a.regolith_position_cm)


def test_assemble_respects_a_custom_floor():
    asm = assemble(Scenario(min_principal_inertia_kgm2=8e-3))
    assert min(asm.inertia.principal_moments) == pytest.approx(8e-3, rel=1e-12)


# ------------------------------------------------------------- closed-loop runs

def test_runs_are_deterministic():
    s = default_scenario("spin")
    tel_a, res_a = run_scenario(s)
    tel_b, res_b = run_scenario(s)
    assert tel_a.rows == tel_b.rows
    assert res_a.to_dict() == res_b.to_dict()


def test_safe_mode_coasts_with_actuators_off():
    tel, res = run_scenario(default_scenario("safe"))
    assert res.converged and res.final_mode == "safe"
    assert all(v == 0.0 for v in tel.column("tau_mx_Nm"))
    assert all(v == 0.0 for v in tel.column("tau_rw_Nm"))
    assert set(tel.column("mode")) == {"safe"}
    assert res.final_speed_radps == pytest.approx(RPM_TO_RADPS, rel=1e-4)


def test_telemetry_shape_and_cadence():
    tel, res = run_scenario(default_scenario("spin"))            # 60 s, every step
    assert len(tel.rows) == 601
    assert all(len(r) == len(TELEMETRY_COLUMNS) for r in tel.rows)
    t = tel.column("t_s")
    assert t[0] == 0.0
    assert t[1] - t[0] == pytest.approx(0.1, rel=1e-9)
    assert t[-1] == pytest.approx(60.0, rel=1e-9)

    tel_slow, _ = run_scenario(default_scenario("safe"))         # 600 s, 1 Hz
    assert len(tel_slow.rows) == 601
    assert tel_slow.column("t_s")[1] == pytest.approx(1.0, rel=1e-9)


def test_explicit_telemetry_cadence_override():
    tel, _ = run_scenario(default_scenario("spin", telemetry_cadence_s=0.5))
    assert len(tel.rows) == 121


def test_spin_preset_converges_and_respects_the_wheel():
    res = run_scenario_metrics(default_scenario("spin"))
    assert res.converged
    assert res.spin_settle_time_s is not None and res.spin_settle_time_s < 10.0
    assert res.max_wheel_momentum_nms <= ActuatorLimits().max_wheel_momentum_nms
    assert 5e-4 < res.final_wheel_momentum_nms < 2e-3


def test_conops_walks_the_full_mode_sequence():
    tel, res = run_scenario(default_scenario("conops"))
    labels = [m for _, m in res.transitions]
    assert labels == ["detumble", "nominal", "spin", "despin", "nominal"]
    assert res.converged and res.final_mode == "nominal"
    spin_t = dict((m, t) for t, m in res.transitions)["spin"]
    assert spin_t == pytest.approx(1.5 * PERIOD, abs=1.0)
    assert res.final_speed_radps < 0.01


def test_divergence_reports_step_and_time():
    s = Scenario(mode="detumble", omega0_radps=Vec3(1.0, 0.0, 0.0),
                 gains=Gains(kp=1e20, kd=1e20),
                 limits=ActuatorLimits(max_magnetic_torque_nm=1e30),
                 duration_s=30.0)
    with pytest.raises(DivergenceError, match="diverged at step"):
        run_scenario(s)
    try:
        run_scenario(s)
    except DivergenceError as e:
        assert e.step >= 0 and e.t >= 0.0


def test_run_result_is_json_serializable():
    res = run_scenario_metrics(default_scenario("spin"))
    blob = json.loads(json.dumps(res.to_dict()))
    assert blob["scenario"] == "spin-default"
    assert blob["converged"] is True


# ------------------------------------------------------------- metric helpers

def test_detumble_time_finds_the_last_excursion():
    tel = Telemetry([_row(0.0, w=(0.02, 0.0, 0.0)),
                     _row(1.0, w=(0.015, 0.0, 0.0)),
                     _row(2.0, w=(0.005, 0.0, 0.0)),
                     _row(3.0, w=(0.004, 0.0, 0.0))])
    assert detumble_time(tel, 0.01, PERIOD) == pytest.approx(2.0 / PERIOD)


def test_detumble_time_none_until_it_holds():
    tel = Telemetry([_row(0.0, w=(0.02, 0.0, 0.0)),
                     _row(1.0, w=(0.005, 0.0, 0.0)),
                     _row(2.0, w=(0.02, 0.0, 0.0))])
    assert detumble_time(tel, 0.01, PERIOD) is None


def test_detumble_time_zero_when_never_outside():
    tel = Telemetry([_row(0.0, w=(0.001, 0.0, 0.0)), _row(1.0)])
    assert detumble_time(tel, 0.01, PERIOD) == 0.0


def test_settle_time_tracks_a_spin_target():
    target = Vec3(0.1, 0.0, 0.0)
    tel = Telemetry([_row(0.0, w=(0.0, 0.0, 0.0)),
                     _row(1.0, w=(0.09, 0.0, 0.0)),
                     _row(2.0, w=(0.0999, 0.0, 0.0)),
                     _row(3.0, w=(0.1001, 0.0, 0.0))])
    assert settle_time(tel, target, band=0.01) == pytest.approx(2.0)


def test_settle_time_single_axis_ignores_transverse_motion():
    target = Vec3(0.1, 0.0, 0.0)
    tel = Telemetry([_row(0.0, w=(0.0, 0.05, 0.0)),
                     _row(1.0, w=(0.0999, 0.05, 0.0)),
                     _row(2.0, w=(0.1, 0.05, 0.0))])
    assert settle_time(tel, target, band=0.01) is None          # norm view
    assert settle_time(tel, target, band=0.01, component=0) == pytest.approx(1.0)


def test_settle_time_zero_target_uses_the_floor():
    tel = Telemetry([_row(0.0, w=(0.01, 0.0, 0.0)),
                     _row(1.0, w=(5e-4, 0.0, 0.0))])
    assert settle_time(tel, Vec3(0.0, 0.0, 0.0), band=0.05, floor_radps=1e-3) == 1.0


def test_settle_time_band_must_be_a_fraction():
    tel = Telemetry([_row(0.0)])
    with pytest.raises(ValueError):
        settle_time(tel, Vec3(0.1, 0.0, 0.0), band=0.0)


def test_align_time_watches_all_three_angles():
    tel = Telemetry([_row(0.0, euler=(20.0, 0.0, 0.0)),
                     _row(1.0, euler=(2.0, -6.0, 0.0)),
                     _row(2.0, euler=(2.0, -2.0, 1.0)),
                     _row(3.0, euler=(0.5, 0.5, 0.5))])
    assert align_time(tel, tolerance_deg=5.0) == pytest.approx(2.0)


# ------------------------------------------------------------- Monte Carlo

def test_monte_carlo_validates_inputs():
    base = default_scenario("spin")
    with pytest.raises(ValueError):
        monte_carlo(base, 0, seed=1)
    with pytest.raises(ValueError):
        monte_carlo(base, 2, seed=1, vary=("mass",))
    with pytest.raises(ValueError):
        monte_carlo(base, 2, seed=1, vary=("omega",))            # missing range


def test_monte_carlo_is_deterministic_and_worker_independent():
    base = default_scenario("spin")
    one = monte_carlo(base, 4, seed=42, vary=("regolith",), workers=1)
    two = monte_carlo(base, 4, seed=42, vary=("regolith",), workers=2)
    assert [r.to_dict() for r in one.results] == [r.to_dict() for r in two.results]
    assert one.summary == two.summary
    again = monte_carlo(base, 4, seed=42, vary=("regolith",), workers=1)
    assert [r.to_dict() for r in again.results] == [r.to_dict() for r in one.results]


def test_monte_carlo_varies_what_it_is_told_to():
    base = default_scenario("spin")
    mc = monte_carlo(base, 3, seed=5, vary=("regolith",))
    placements = [r.regolith_position_cm for r in mc.results]
    assert len(set(placements)) == 3
    chamber = bundled_catalog().chamber
    assert all(chamber.contains(p) for p in placements)
    assert [r.scenario_name for r in mc.results] == [f"spin-default[{i}]" for i in range(3)]


def test_monte_carlo_summary_structure():
    mc = monte_carlo(default_scenario("spin"), 3, seed=9, vary=("regolith",))
    assert mc.summary["runs"] == 3
    assert mc.summary["converged"] == 3
    assert mc.summary["diverged"] == 0
    spin = mc.summary["metrics"]["spin_settle_time_s"]
    assert spin["count"] == 3
    assert spin["min"] <= spin["mean"] <= spin["max"]


def test_monte_carlo_reports_divergence_instead_of_raising():
    base = Scenario(mode="detumble", name="runaway",
                    omega0_radps=Vec3(1.0, 0.0, 0.0),
                    gains=Gains(kp=1e20, kd=1e20),
                    limits=ActuatorLimits(max_magnetic_torque_nm=1e30),
                    duration_s=30.0)
    mc = monte_carlo(base, 2, seed=3, vary=())
    assert all(r.error is not None and not r.converged for r in mc.results)
    assert mc.summary["diverged"] == 2


# ------------------------------------------------------------- presets

def test_default_scenario_rejects_unknown_modes():
    with pytest.raises(ValueError, match="unknown mode"):
        default_scenario("cruise")


def test_default_presets_match_the_flight_story():
    d = default_scenario("detumble")
    assert d.omega0_radps == Vec3(35 * RPM_TO_RADPS, 35 * RPM_TO_RADPS, 35 * RPM_TO_RADPS)
    assert d.duration_orbits == 9.0
    assert d.limits.max_magnetic_torque_nm == ROD_EFFECTIVE_TORQUE_NM

    n = default_scenario("nominal")
    assert n.q0 == quat_from_euler(90.0, 90.0, 90.0)

    sp = default_scenario("spin")
    assert sp.regolith_policy == "fixed"
    assert sp.regolith_fixed_cm == Vec3(0.0, 0.0, 0.0)
    # Seconds-scale maneuvers see the rods' instantaneous authority, not
    # the orbit-average derate the de-tumble preset carries.
    assert sp.limits == ActuatorLimits()
    assert default_scenario("despin").limits == ActuatorLimits()

    c = default_scenario("conops")
    assert [cmd for _, cmd in c.schedule] == ["spin", "despin"]
    assert vnorm(c.omega0_radps) == pytest.approx(5 * RPM_TO_RADPS * math.sqrt(3.0))


def test_default_scenario_overrides_win():
    s = default_scenario("spin", duration_s=30.0, name="custom")
    assert s.duration_s == 30.0 and s.name == "custom"


def test_default_limits_carry_the_rod_authority():
    assert default_limits().max_magnetic_torque_nm == 2.2e-6
