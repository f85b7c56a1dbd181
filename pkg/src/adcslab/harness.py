"""Scenario assembly, the closed-loop simulation, metrics, and Monte Carlo.

A :class:`Scenario` is a frozen, picklable description of one run: mass model
and regolith placement policy, orbit, geometry, gains and limits, operating
mode, initial state, and integration settings.  :func:`run_scenario` steps the
closed loop

    sample environment -> disturbance torques -> mode controller ->
    actuator models -> RK4 over (q, omega)

and returns decimated telemetry plus a :class:`RunResult` of extracted
metrics.  Standalone modes (``detumble``/``nominal``/``spin``/``despin``/
``safe``) hold their controller for the whole run; ``conops`` starts in
de-tumble and runs the mode state machine with scheduled commands and
automatic exits.

Determinism: nothing in the loop draws random numbers, regolith sampling is
seeded, and Monte Carlo derives per-run seeds from (master seed, run index),
so results are bitwise reproducible and independent of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from statistics import fmean
from typing import Iterable, Sequence, TextIO

import numpy as np

from .control import (
    ActuatorLimits,
    Fidelity,
    Gains,
    Mode,
    ModeThresholds,
    TorqueCommand,
    allocate_magnetorquer,
    error_state,
    mode_transition,
    pd_torque,
    spin_torques,
    total_control,
    wheel_step,
)
from .environment import (
    OrbitConfig,
    SpacecraftGeometry,
    orbit_frame_sample,
    orbit_period,
    total_disturbance,
)
from .massmodel import (
    CM_TO_M,
    MassCatalog,
    MassProperties,
    apply_inertia_floor,
    bundled_catalog,
    mass_properties,
    sample_regolith,
)
from .quatmath import (
    IDENTITY,
    RPM_TO_RADPS,
    ZERO3,
    Quat,
    Vec3,
    normalize_canonical,
    quat_from_euler,
    quat_to_euler,
    rotate_orbit_to_body,
    visfinite,
)
from .rigidbody import (
    AttitudeState,
    InertiaTensor,
    NonFiniteStateError,
    make_rigid_body_dynamics,
    rk4_step,
)

__all__ = [
    "Scenario",
    "AssembledScenario",
    "Telemetry",
    "RunResult",
    "MonteCarloResult",
    "DivergenceError",
    "TELEMETRY_COLUMNS",
    "STANDALONE_MODES",
    "assemble",
    "run_scenario",
    "run_scenario_metrics",
    "detumble_time",
    "settle_time",
    "align_time",
    "monte_carlo",
    "default_scenario",
    "default_limits",
    "ROD_EFFECTIVE_TORQUE_NM",
]

# Effective per-axis torque authority of the flight torque rods (0.2 A*m^2)
# once the ~30 uT orbit-average field, field/dipole geometry, and duty cycling
# are folded into a single constant clamp.  The raw instantaneous ceiling
# |m||B| is a few times larger; this effective value reproduces the expected
# multi-orbit de-tumble timeline and is what the bundled scenarios use.
ROD_EFFECTIVE_TORQUE_NM = 2.2e-6

# Largest rotation (rad) allowed per integrator substep.  The control torque
# holds for the full control period dt; the attitude integration inside it is
# subdivided whenever |omega|*dt exceeds this, so fast tumbles are resolved
# instead of numerically damped.  MAX_SUBSTEPS only guards against an absurd
# rate blowing up the step count before the divergence check would trip.
SUBSTEP_MAX_PHASE_RAD = 0.1
MAX_SUBSTEPS = 128

TELEMETRY_COLUMNS = (
    "t_s", "q0", "q1", "q2", "q3",
    "wx_radps", "wy_radps", "wz_radps",
    "roll_deg", "pitch_deg", "yaw_deg",
    "tau_mx_Nm", "tau_my_Nm", "tau_mz_Nm",
    "tau_rw_Nm", "hw_Nms", "mode",
)

STANDALONE_MODES = ("detumble", "nominal", "spin", "despin", "safe")
_SCHEDULE_COMMANDS = ("spin", "despin", "safe", "nominal")

_ZERO_CMD = TorqueCommand(ZERO3, ZERO3, 0.0, False, False)


class DivergenceError(RuntimeError):
    """The propagated state left the finite domain mid-run."""

    def __init__(self, step: int, t: float, detail: str) -> None:
        super().__init__(f"state diverged at step {step} (t={t:.6g} s): {detail}")
        self.step = step
        self.t = t


@dataclass(frozen=True)
class Scenario:
    """Complete, picklable description of one closed-loop run.

    ``duration_orbits`` (when given) wins over ``duration_s``.  Disturbance
    torques and the orbit-frame field are refreshed every
    ``env_update_every_s`` and held in between; the body-frame field used by
    physical dipole allocation is re-rotated every control step, so it never
    goes stale even while tumbling.  Telemetry cadence defaults to every step
    for runs up to 120 s and 1 s otherwise.
    """

    name: str = "scenario"
    mode: str = "detumble"
    # mass model
    catalog: MassCatalog | None = None      # None -> bundled flight catalog
    regolith_policy: str = "stowed"         # stowed | fixed | sampled
    regolith_fixed_cm: Vec3 | None = None
    min_principal_inertia_kgm2: float = 5e-3
    # orbit and environment
    orbit: OrbitConfig = OrbitConfig()
    sun_inertial: Vec3 = Vec3(1.0, 0.0, 0.0)
    dipole_tilt_deg: float = 11.5
    geometry: SpacecraftGeometry | None = None  # None -> 1U x 3.4U box
    enable_drag: bool = True
    enable_srp: bool = True
    enable_gravity_gradient: bool = True
    # control
    gains: Gains = Gains()
    limits: ActuatorLimits = ActuatorLimits()
    fidelity: Fidelity = Fidelity.IDEAL
    thresholds: ModeThresholds = ModeThresholds()
    spin_target_rpm: float = 1.0
    multiplicative_error: bool = False
    schedule: tuple[tuple[float, str], ...] = ()
    # initial state
    q0: Quat = IDENTITY
    omega0_radps: Vec3 = ZERO3
    wheel_momentum0_nms: float = 0.0
    # integration and bookkeeping
    dt_s: float = 0.1
    duration_s: float = 600.0
    duration_orbits: float | None = None
    env_update_every_s: float = 1.0
    telemetry_cadence_s: float | None = None
    settle_band: float = 0.01
    align_tolerance_deg: float = 5.0
    orbit_rate_coupling: bool = False
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in STANDALONE_MODES + ("conops",):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.regolith_policy not in ("stowed", "fixed", "sampled"):
            raise ValueError(f"unknown regolith policy {self.regolith_policy!r}")
        if self.regolith_policy == "fixed" and self.regolith_fixed_cm is None:
            raise ValueError("regolith policy 'fixed' needs regolith_fixed_cm")
        if self.regolith_policy == "sampled" and self.seed is None:
            raise ValueError("regolith policy 'sampled' needs a seed")
        if not (self.dt_s > 0.0 and math.isfinite(self.dt_s)):
            raise ValueError(f"dt must be positive and finite, got {self.dt_s}")
        if self.duration_orbits is None:
            if not (self.duration_s > 0.0):
                raise ValueError(f"duration must be > 0, got {self.duration_s} s")
        elif not (self.duration_orbits > 0.0):
            raise ValueError(f"duration must be > 0, got {self.duration_orbits} orbits")
        if not (self.env_update_every_s > 0.0):
            raise ValueError("env_update_every_s must be > 0")
        if self.telemetry_cadence_s is not None and not (self.telemetry_cadence_s > 0.0):
            raise ValueError("telemetry_cadence_s must be > 0 when given")
        if not (0.0 < self.settle_band < 1.0):
            raise ValueError(f"settle_band must be in (0, 1), got {self.settle_band}")
        if not (self.align_tolerance_deg > 0.0):
            raise ValueError("align_tolerance_deg must be > 0")
        if not (self.spin_target_rpm > 0.0):
            raise ValueError("spin_target_rpm must be > 0")
        if not (self.min_principal_inertia_kgm2 > 0.0):
            raise ValueError("min_principal_inertia_kgm2 must be > 0")
        if self.schedule and self.mode != "conops":
            raise ValueError("a command schedule only makes sense in conops mode")
        for entry in self.schedule:
            t, cmd = entry
            if not (t >= 0.0 and math.isfinite(t)):
                raise ValueError(f"schedule time must be >= 0, got {t}")
            if cmd not in _SCHEDULE_COMMANDS:
                raise ValueError(
                    f"unknown schedule command {cmd!r}; expected one of {_SCHEDULE_COMMANDS}")
        if not visfinite(self.omega0_radps):
            raise ValueError(f"omega0 must be finite, got {self.omega0_radps}")

    def resolved_duration_s(self) -> float:
        """Run length in seconds (orbit-based durations use the scenario orbit)."""
        if self.duration_orbits is not None:
            duration = self.duration_orbits * orbit_period(self.orbit)
        else:
            duration = self.duration_s
        if self.dt_s > duration:
            raise ValueError(f"dt={self.dt_s} s exceeds the run duration {duration} s")
        return duration

    def resolved_cadence_s(self, duration_s: float) -> float:
        if self.telemetry_cadence_s is not None:
            return self.telemetry_cadence_s
        # Every step for short runs, 1 Hz for orbit-scale ones.
        return self.dt_s if duration_s <= 120.0 else max(self.dt_s, 1.0)


@dataclass(frozen=True)
class AssembledScenario:
    """Scenario with the mass model resolved into propagation-ready products."""

    scenario: Scenario
    catalog: MassCatalog            # regolith placed per policy
    properties: MassProperties      # exact point-mass products (pre-floor)
    inertia: InertiaTensor          # floored, invertible
    cg_m: Vec3                      # CG in meters, structure frame
    geometry: SpacecraftGeometry
    regolith_position_cm: Vec3 | None


def assemble(s: Scenario) -> AssembledScenario:
    """Resolve regolith placement and mass properties for propagation.

    The exact point-mass inertia of the stowed flight catalog is singular
    about z (every component sits on the geometric axis), so the scenario's
    minimum principal inertia is enforced as an eigenvalue floor before the
    tensor is handed to the dynamics.
    """
    catalog = s.catalog if s.catalog is not None else bundled_catalog()
    if s.regolith_policy == "fixed":
        pos = Vec3(*s.regolith_fixed_cm)
        if not catalog.chamber.contains(pos):
            raise ValueError(
                f"fixed regolith position {tuple(pos)} cm is outside the payload chamber")
        catalog = catalog.with_regolith_at(pos)
    elif s.regolith_policy == "sampled":
        catalog = catalog.with_regolith_at(sample_regolith(catalog.chamber, s.seed))
    props = mass_properties(catalog, warn_degenerate=False)
    floored = apply_inertia_floor(props.inertia_kgm2, s.min_principal_inertia_kgm2)
    inertia = InertiaTensor(floored)
    cg_m = Vec3(props.cg_cm[0] * CM_TO_M, props.cg_cm[1] * CM_TO_M,
                props.cg_cm[2] * CM_TO_M)
    geometry = s.geometry if s.geometry is not None else SpacecraftGeometry.box()
    return AssembledScenario(
        scenario=s,
        catalog=catalog,
        properties=props,
        inertia=inertia,
        cg_m=cg_m,
        geometry=geometry,
        regolith_position_cm=None if catalog.regolith is None
        else catalog.regolith.position_cm,
    )


class Telemetry:
    """Decimated run history: one 17-column row per recorded sample."""

    __slots__ = ("rows",)

    columns = TELEMETRY_COLUMNS

    def __init__(self, rows: list[tuple]) -> None:
        self.rows = rows

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        i = TELEMETRY_COLUMNS.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self, fh: TextIO) -> None:
        """Write the telemetry as CSV with shortest round-trip float formatting."""
        fh.write(",".join(TELEMETRY_COLUMNS) + "\n")
        for row in self.rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.to_csv(fh)


@dataclass
class RunResult:
    """Metrics extracted from one run; times are None when not reached."""

    scenario_name: str
    mode: str
    final_mode: str
    converged: bool
    orbit_period_s: float
    duration_s: float
    dt_s: float
    steps: int
    detumble_time_s: float | None
    detumble_time_orbits: float | None
    spin_settle_time_s: float | None
    despin_time_s: float | None
    align_time_s: float | None
    final_q: Quat
    final_omega_radps: Vec3
    final_speed_radps: float
    final_wheel_momentum_nms: float
    max_qe_post_settle: float | None
    max_speed_post_settle_radps: float | None
    max_cone_angle_post_settle_deg: float | None
    magnetic_saturation_steps: int
    wheel_saturation_steps: int
    max_wheel_momentum_nms: float
    max_tau_b_alignment: float | None   # max |tau_m . B| / (|tau_m||B|), physical fidelity
    regolith_position_cm: Vec3 | None
    transitions: tuple[tuple[float, str], ...]
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario_name,
            "mode": self.mode,
            "final_mode": self.final_mode,
            "converged": self.converged,
            "orbit_period_s": self.orbit_period_s,
            "duration_s": self.duration_s,
            "dt_s": self.dt_s,
            "steps": self.steps,
            "detumble_time_s": self.detumble_time_s,
            "detumble_time_orbits": self.detumble_time_orbits,
            "spin_settle_time_s": self.spin_settle_time_s,
            "despin_time_s": self.despin_time_s,
            "align_time_s": self.align_time_s,
            "final_q": list(self.final_q),
            "final_omega_radps": list(self.final_omega_radps),
            "final_speed_radps": self.final_speed_radps,
            "final_wheel_momentum_nms": self.final_wheel_momentum_nms,
            "max_qe_post_settle": self.max_qe_post_settle,
            "max_speed_post_settle_radps": self.max_speed_post_settle_radps,
            "max_cone_angle_post_settle_deg": self.max_cone_angle_post_settle_deg,
            "magnetic_saturation_steps": self.magnetic_saturation_steps,
            "wheel_saturation_steps": self.wheel_saturation_steps,
            "max_wheel_momentum_nms": self.max_wheel_momentum_nms,
            "max_tau_b_alignment": self.max_tau_b_alignment,
            "regolith_position_cm": None if self.regolith_position_cm is None
            else list(self.regolith_position_cm),
            "transitions": [[t, m] for t, m in self.transitions],
            "error": self.error,
        }


def _speed(omega) -> float:
    return math.sqrt(omega[0] ** 2 + omega[1] ** 2 + omega[2] ** 2)


def run_scenario(s: Scenario) -> tuple[Telemetry, RunResult]:
    """Propagate one scenario and extract its metrics.

    Raises:
        DivergenceError: the state went non-finite (step and time attached).
    """
    asm = assemble(s)
    J = asm.inertia
    geometry = asm.geometry
    cg_m = asm.cg_m
    cfg = s.orbit
    period = orbit_period(cfg)
    duration = s.resolved_duration_s()
    dt = s.dt_s
    n_steps = max(1, int(round(duration / dt)))
    tel_every = max(1, int(round(s.resolved_cadence_s(duration) / dt)))
    env_every = max(1, int(round(s.env_update_every_s / dt)))

    gains, limits, thresholds = s.gains, s.limits, s.thresholds
    fidelity = s.fidelity
    physical = fidelity is Fidelity.PHYSICAL
    multiplicative = s.multiplicative_error
    include = (s.enable_drag, s.enable_srp, s.enable_gravity_gradient)
    any_disturbance = any(include)
    mu = cfg.mu_m3s2
    q_d = IDENTITY
    spin_omega = Vec3(s.spin_target_rpm * RPM_TO_RADPS, 0.0, 0.0)

    conops = s.mode == "conops"
    mode = Mode.DETUMBLE if conops else Mode(s.mode)
    schedule = sorted(
        ((max(0, int(round(t / dt))), Mode(cmd)) for t, cmd in s.schedule),
        key=lambda e: e[0],
    )
    sched_i = 0

    n_orb = 2.0 * math.pi / period
    coupling = s.orbit_rate_coupling

    state = AttitudeState(normalize_canonical(s.q0), Vec3(*s.omega0_radps),
                          s.wheel_momentum0_nms, 0.0)
    transitions: list[tuple[float, str]] = [(0.0, mode.value)]
    rows: list[tuple] = []
    env = None
    tau_d = ZERO3
    wf_body = ZERO3
    cmd = _ZERO_CMD
    mag_sat = 0
    wheel_sat = 0
    max_hw = abs(state.wheel_momentum)
    max_tau_b = 0.0

    def record(st: AttitudeState, c: TorqueCommand, m: Mode) -> None:
        roll, pitch, yaw = quat_to_euler(st.q)
        rows.append((
            st.t, st.q[0], st.q[1], st.q[2], st.q[3],
            st.omega[0], st.omega[1], st.omega[2],
            roll, pitch, yaw,
            c.tau_m[0], c.tau_m[1], c.tau_m[2],
            c.tau_rw, st.wheel_momentum, m.value,
        ))

    for k in range(n_steps):
        if k % env_every == 0:
            orbit_env = orbit_frame_sample(cfg, state.t, s.sun_inertial, s.dipole_tilt_deg)
            env = orbit_env.to_body(state.q)
            tau_d = (total_disturbance(geometry, env, J, cg_m, mu, include)
                     if any_disturbance else ZERO3)
            if coupling:
                wf_body = rotate_orbit_to_body(state.q, Vec3(0.0, -n_orb, 0.0))

        if conops:
            command = None
            while sched_i < len(schedule) and schedule[sched_i][0] <= k:
                command = schedule[sched_i][1]
                sched_i += 1
            new_mode = mode_transition(mode, state.omega, thresholds, command)
            if new_mode is not mode:
                mode = new_mode
                transitions.append((state.t, mode.value))

        hw = state.wheel_momentum
        if mode is Mode.SAFE:
            cmd = _ZERO_CMD
            hw_next = hw
            b_ctrl = env.b_body_tesla
        elif mode is Mode.SPIN or mode is Mode.DESPIN:
            omega_d = spin_omega if mode is Mode.SPIN else ZERO3
            err = error_state(state.q, q_d, state.omega, omega_d, multiplicative)
            tau_rw_cmd, tau_m_des = spin_torques(err, gains)
            ws = wheel_step(tau_rw_cmd, hw, limits, dt)
            b_ctrl = (rotate_orbit_to_body(state.q, orbit_env.b_orbit_tesla)
                      if physical else env.b_body_tesla)
            mc = allocate_magnetorquer(tau_m_des, b_ctrl, limits, fidelity)
            cmd = TorqueCommand(mc.tau_m, mc.dipole, ws.tau_applied,
                                mc.magnetic_saturated, ws.saturated)
            hw_next = ws.momentum
        else:  # DETUMBLE and NOMINAL share the PD law toward the orbit frame
            err = error_state(state.q, q_d, state.omega, ZERO3, multiplicative)
            b_ctrl = (rotate_orbit_to_body(state.q, orbit_env.b_orbit_tesla)
                      if physical else env.b_body_tesla)
            cmd = allocate_magnetorquer(pd_torque(err, gains), b_ctrl, limits, fidelity)
            hw_next = hw

        if cmd.magnetic_saturated:
            mag_sat += 1
        if cmd.wheel_saturated:
            wheel_sat += 1
        if abs(hw_next) > max_hw:
            max_hw = abs(hw_next)
        if physical:
            tm = cmd.tau_m
            tm_norm = math.sqrt(tm[0] ** 2 + tm[1] ** 2 + tm[2] ** 2)
            b_norm = math.sqrt(b_ctrl[0] ** 2 + b_ctrl[1] ** 2 + b_ctrl[2] ** 2)
            if tm_norm > 0.0 and b_norm > 0.0:
                rel = abs(tm[0] * b_ctrl[0] + tm[1] * b_ctrl[1] + tm[2] * b_ctrl[2])
                rel /= tm_norm * b_norm
                if rel > max_tau_b:
                    max_tau_b = rel

        if k % tel_every == 0:
            record(state, cmd, mode)

        tau_c = total_control(cmd)
        tx = tau_c[0] + tau_d[0]
        ty = tau_c[1] + tau_d[1]
        tz = tau_c[2] + tau_d[2]
        if physical:
            # Gyroscopic reaction of the stored wheel momentum: -omega x h_w.
            ty -= state.omega[2] * hw
            tz += state.omega[1] * hw
        if coupling:
            # Correct the gyroscopic term for the rotating orbit frame: the
            # propagated omega is relative to it, Euler's equations want the
            # inertial rate.  Zero-order hold over the step, like the control.
            wx, wy, wz = state.omega
            wix, wiy, wiz = wx + wf_body[0], wy + wf_body[1], wz + wf_body[2]
            h_rel = J.dot(state.omega)
            h_in = J.dot(Vec3(wix, wiy, wiz))
            jwf = J.dot(Vec3(wy * wf_body[2] - wz * wf_body[1],
                             wz * wf_body[0] - wx * wf_body[2],
                             wx * wf_body[1] - wy * wf_body[0]))
            tx += (wy * h_rel[2] - wz * h_rel[1]) - (wiy * h_in[2] - wiz * h_in[1]) + jwf[0]
            ty += (wz * h_rel[0] - wx * h_rel[2]) - (wiz * h_in[0] - wix * h_in[2]) + jwf[1]
            tz += (wx * h_rel[1] - wy * h_rel[0]) - (wix * h_in[1] - wiy * h_in[0]) + jwf[2]

        dynamics = make_rigid_body_dynamics(J, Vec3(tx, ty, tz))
        # RK4 loses energy to phase error once the rotation per step grows
        # past ~0.1 rad (amplitude factor ~1 - (w*dt)^6/144 on the precession
        # dynamics), which at tumble rates would masquerade as control
        # performance.  Keep the torque on its zero-order hold but split the
        # integration into however many substeps keep the phase small; the
        # count depends only on the current rate, so runs stay deterministic.
        wmag = math.sqrt(state.omega[0] ** 2 + state.omega[1] ** 2
                         + state.omega[2] ** 2)
        n_sub = 1
        if wmag * dt > SUBSTEP_MAX_PHASE_RAD:
            n_sub = min(MAX_SUBSTEPS, math.ceil(wmag * dt / SUBSTEP_MAX_PHASE_RAD))
        try:
            if n_sub == 1:
                nxt = rk4_step(state, dynamics, dt)
            else:
                h = dt / n_sub
                nxt = state
                for _ in range(n_sub):
                    nxt = rk4_step(nxt, dynamics, h)
        except NonFiniteStateError as exc:
            raise DivergenceError(k, state.t, str(exc)) from exc
        state = AttitudeState(nxt.q, nxt.omega, hw_next, state.t + dt)

    record(state, cmd, mode)
    telemetry = Telemetry(rows)

    detumble_s = _hold_time(telemetry, lambda r: _speed(r[5:8]) >= thresholds.detumble_exit_radps)
    despin_s = _hold_time(telemetry, lambda r: _speed(r[5:8]) >= thresholds.despin_exit_radps)
    spin_tol = s.settle_band * spin_omega[0]
    spin_s = _hold_time(telemetry, lambda r: abs(r[5] - spin_omega[0]) > spin_tol)
    align_tol = s.align_tolerance_deg
    align_s = _hold_time(
        telemetry, lambda r: max(abs(r[8]), abs(r[9]), abs(r[10])) > align_tol)

    if s.mode == "detumble":
        primary, converged = detumble_s, detumble_s is not None
    elif s.mode == "spin":
        primary, converged = spin_s, spin_s is not None
    elif s.mode == "despin":
        primary, converged = despin_s, despin_s is not None
    elif s.mode == "nominal":
        primary, converged = align_s, align_s is not None
    elif s.mode == "safe":
        primary, converged = 0.0, True
    else:  # conops: back in nominal with tame rates, schedule fully issued
        primary = align_s
        converged = (mode is Mode.NOMINAL and sched_i == len(schedule)
                     and _speed(state.omega) < thresholds.detumble_exit_radps)

    max_qe = max_speed = max_cone = None
    if primary is not None:
        max_qe, max_speed, max_cone = _post_settle_stats(telemetry, primary)

    result = RunResult(
        scenario_name=s.name,
        mode=s.mode,
        final_mode=mode.value,
        converged=converged,
        orbit_period_s=period,
        duration_s=duration,
        dt_s=dt,
        steps=n_steps,
        detumble_time_s=detumble_s,
        detumble_time_orbits=None if detumble_s is None else detumble_s / period,
        spin_settle_time_s=spin_s,
        despin_time_s=despin_s,
        align_time_s=align_s,
        final_q=state.q,
        final_omega_radps=state.omega,
        final_speed_radps=_speed(state.omega),
        final_wheel_momentum_nms=state.wheel_momentum,
        max_qe_post_settle=max_qe,
        max_speed_post_settle_radps=max_speed,
        max_cone_angle_post_settle_deg=max_cone,
        magnetic_saturation_steps=mag_sat,
        wheel_saturation_steps=wheel_sat,
        max_wheel_momentum_nms=max_hw,
        max_tau_b_alignment=max_tau_b if physical else None,
        regolith_position_cm=asm.regolith_position_cm,
        transitions=tuple(transitions),
    )
    return telemetry, result


def run_scenario_metrics(s: Scenario) -> RunResult:
    """run_scenario without the telemetry; cheap to ship across processes."""
    return run_scenario(s)[1]


def _hold_time(telemetry: Telemetry, outside) -> float | None:
    """First recorded time after which ``outside(row)`` is never true again.

    Returns 0.0 if no sample is outside, None if the final sample still is.
    """
    rows = telemetry.rows
    last = None
    for i, row in enumerate(rows):
        if outside(row):
            last = i
    if last is None:
        return 0.0
    if last == len(rows) - 1:
        return None
    return rows[last + 1][0]


def detumble_time(telemetry: Telemetry, threshold_radps: float,
                  orbit_period_s: float) -> float | None:
    """De-tumble completion in orbits: when |omega| drops below the threshold
    and stays there for the rest of the record; None if it never does."""
    t = _hold_time(telemetry, lambda r: _speed(r[5:8]) >= threshold_radps)
    return None if t is None else t / orbit_period_s


def settle_time(telemetry: Telemetry, target_omega: Vec3, band: float,
                floor_radps: float = 1e-3, component: int | None = None) -> float | None:
    """Time after which the rates stay within ``band * |target|`` of the target.

    A zero target falls back to the absolute ``floor_radps``.  With
    ``component`` the comparison uses that single axis instead of the vector
    norm (useful when coupling keeps the transverse axes honestly nonzero).
    """
    if not (0.0 < band < 1.0):
        raise ValueError(f"band must be in (0, 1), got {band}")
    target_norm = _speed(target_omega)
    tol = band * target_norm if target_norm > 0.0 else floor_radps

    if component is None:
        def outside(r):
            return _speed((r[5] - target_omega[0], r[6] - target_omega[1],
                           r[7] - target_omega[2])) > tol
    else:
        i = 5 + component

        def outside(r):
            return abs(r[i] - target_omega[component]) > tol

    return _hold_time(telemetry, outside)


def align_time(telemetry: Telemetry, tolerance_deg: float = 5.0) -> float | None:
    """Time after which all three Euler angles stay within the tolerance."""
    return _hold_time(
        telemetry, lambda r: max(abs(r[8]), abs(r[9]), abs(r[10])) > tolerance_deg)


def _post_settle_stats(telemetry: Telemetry, t_from: float):
    """(max |q_e|, max |omega|, max z half-cone angle deg) over t >= t_from."""
    max_qe = max_speed = max_cone = 0.0
    seen = False
    for r in telemetry.rows:
        if r[0] < t_from:
            continue
        seen = True
        qe = math.sqrt(r[2] ** 2 + r[3] ** 2 + r[4] ** 2)
        if qe > max_qe:
            max_qe = qe
        sp = _speed(r[5:8])
        if sp > max_speed:
            max_speed = sp
        # Angle between body z and orbit z: acos(R33), R33 = 1 - 2(q1^2 + q2^2).
        r33 = 1.0 - 2.0 * (r[2] ** 2 + r[3] ** 2)
        cone = math.degrees(math.acos(min(1.0, max(-1.0, r33))))
        if cone > max_cone:
            max_cone = cone
    if not seen:
        return None, None, None
    return max_qe, max_speed, max_cone


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass
class MonteCarloResult:
    results: list[RunResult]
    summary: dict

    def to_dict(self) -> dict:
        return {"summary": self.summary,
                "results": [r.to_dict() for r in self.results]}


def _mc_scenario(base: Scenario, master_seed: int, index: int,
                 vary: tuple[str, ...], omega_rpm_range) -> Scenario:
    """Derive run ``index``'s scenario; depends only on (master_seed, index)."""
    rng = np.random.default_rng(np.random.SeedSequence((master_seed, index)))
    updates: dict = {"name": f"{base.name}[{index}]"}
    if "regolith" in vary:
        chamber = (base.catalog if base.catalog is not None else bundled_catalog()).chamber
        pos = Vec3(float(rng.uniform(*chamber.x)),
                   float(rng.uniform(*chamber.y)),
                   float(rng.uniform(*chamber.z)))
        updates["regolith_policy"] = "fixed"
        updates["regolith_fixed_cm"] = pos
    if "omega" in vary:
        lo, hi = omega_rpm_range
        w = rng.uniform(lo, hi, 3) * RPM_TO_RADPS
        updates["omega0_radps"] = Vec3(float(w[0]), float(w[1]), float(w[2]))
    return replace(base, **updates)


def _failed_result(s: Scenario, exc: Exception) -> RunResult:
    return RunResult(
        scenario_name=s.name, mode=s.mode, final_mode="safe", converged=False,
        orbit_period_s=orbit_period(s.orbit), duration_s=0.0, dt_s=s.dt_s,
        steps=0, detumble_time_s=None, detumble_time_orbits=None,
        spin_settle_time_s=None, despin_time_s=None, align_time_s=None,
        final_q=IDENTITY, final_omega_radps=ZERO3, final_speed_radps=0.0,
        final_wheel_momentum_nms=0.0, max_qe_post_settle=None,
        max_speed_post_settle_radps=None, max_cone_angle_post_settle_deg=None,
        magnetic_saturation_steps=0, wheel_saturation_steps=0,
        max_wheel_momentum_nms=0.0, max_tau_b_alignment=None,
        regolith_position_cm=None, transitions=(), error=str(exc),
    )


def _mc_run(args) -> RunResult:
    base, master_seed, index, vary, omega_rpm_range = args
    s = _mc_scenario(base, master_seed, index, vary, omega_rpm_range)
    try:
        return run_scenario_metrics(s)
    except DivergenceError as exc:
        return _failed_result(s, exc)


_SUMMARY_METRICS = ("detumble_time_orbits", "spin_settle_time_s",
                    "despin_time_s", "align_time_s")


def summarize(results: Sequence[RunResult]) -> dict:
    """min/mean/max of each metric over the runs where it was reached."""
    summary: dict = {
        "runs": len(results),
        "converged": sum(1 for r in results if r.converged),
        "diverged": sum(1 for r in results if r.error is not None),
        "metrics": {},
    }
    for name in _SUMMARY_METRICS:
        values = [getattr(r, name) for r in results if getattr(r, name) is not None]
        summary["metrics"][name] = {
            "count": len(values),
            "min": min(values) if values else None,
            "mean": fmean(values) if values else None,
            "max": max(values) if values else None,
        }
    return summary


def monte_carlo(
    base: Scenario,
    n_runs: int,
    seed: int,
    vary: Iterable[str] = ("regolith",),
    omega_rpm_range: tuple[float, float] | None = None,
    workers: int = 1,
) -> MonteCarloResult:
    """Run ``n_runs`` derived scenarios; bitwise deterministic in (seed, n_runs).

    ``vary`` may contain "regolith" (uniform placement over the payload
    chamber) and/or "omega" (per-axis uniform initial rate over
    ``omega_rpm_range``, in RPM).  Per-run seeds derive from (seed, index), so
    the result is independent of ``workers`` and execution order; divergent
    runs are reported in their RunResult rather than aborting the batch.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    vary = tuple(vary)
    for v in vary:
        if v not in ("regolith", "omega"):
            raise ValueError(f"unknown variation {v!r}; expected 'regolith' or 'omega'")
    if "omega" in vary and omega_rpm_range is None:
        raise ValueError("varying omega needs omega_rpm_range=(lo, hi) in RPM")
    tasks = [(base, seed, i, vary, omega_rpm_range) for i in range(n_runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_mc_run, tasks))
    else:
        results = [_mc_run(t) for t in tasks]
    return MonteCarloResult(results=results, summary=summarize(results))


# ---------------------------------------------------------------------------
# Bundled scenario presets
# ---------------------------------------------------------------------------

def default_limits() -> ActuatorLimits:
    """Actuator limits with the rods' effective (orbit-average) authority."""
    return ActuatorLimits(max_magnetic_torque_nm=ROD_EFFECTIVE_TORQUE_NM)


def default_scenario(mode: str = "detumble", **overrides) -> Scenario:
    """Flight-representative preset for each operating mode.

    de-tumble: 35 RPM on all three axes, nine orbits.
    nominal:   90 deg off on all three axes at rest, three orbits.
    spin:      from rest to the 1 RPM centrifuge spin, 60 s.
    despin:    from the 1 RPM spin back to rest, 60 s.
    safe:      coasting with actuators off, 600 s.
    conops:    5 RPM tumble through the full mode sequence, two orbits.

    The spin and despin presets pin the regolith against the chamber wall
    nearest the stack's centre of mass (the minimum-inertia stowage, and
    where loose payload ends up once the wheel starts dragging the hull
    around it); the other presets keep the launch-stowed catalog.

    Presets that play out over orbits carry :func:`default_limits` -- the
    rods' orbit-average authority, which is what multi-orbit de-tumble
    timing actually sees once pointing geometry washes out.  The spin and
    despin maneuvers finish in seconds, so they carry the instantaneous
    hardware limits instead: over that arc the field is effectively
    frozen and m x B delivers the full rated torque, which is also what
    keeps the spin-up stable when an off-axis payload couples the wheel's
    momentum into the transverse axes.  Keyword overrides are applied on
    top of the preset.
    """
    w35 = 35.0 * RPM_TO_RADPS
    w5 = 5.0 * RPM_TO_RADPS
    period = orbit_period(OrbitConfig())
    presets: dict[str, dict] = {
        "detumble": dict(
            omega0_radps=Vec3(w35, w35, w35),
            duration_orbits=9.0,
        ),
        "nominal": dict(
            q0=quat_from_euler(90.0, 90.0, 90.0),
            duration_orbits=3.0,
        ),
        "spin": dict(
            duration_s=60.0,
            regolith_policy="fixed",
            regolith_fixed_cm=Vec3(0.0, 0.0, 0.0),
            limits=ActuatorLimits(),
        ),
        "despin": dict(
            omega0_radps=Vec3(RPM_TO_RADPS, 0.0, 0.0),
            duration_s=60.0,
            regolith_policy="fixed",
            regolith_fixed_cm=Vec3(0.0, 0.0, 0.0),
            limits=ActuatorLimits(),
        ),
        "safe": dict(
            omega0_radps=Vec3(RPM_TO_RADPS, 0.0, 0.0),
            duration_s=600.0,
        ),
        "conops": dict(
            omega0_radps=Vec3(w5, w5, w5),
            duration_orbits=2.0,
            schedule=((1.5 * period, "spin"), (1.7 * period, "despin")),
        ),
    }
    if mode not in presets:
        raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(presets)}")
    params: dict = {"name": f"{mode}-default", "mode": mode,
                    "limits": default_limits(), **presets[mode]}
    params.update(overrides)
    return Scenario(**params)
