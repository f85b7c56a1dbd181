"""Control laws, actuator models, and the operating-mode state machine.

The controller family is deliberately simple and gain-driven:

* de-tumble / nominal: proportional-derivative law on the quaternion error
  vector part and the rate error, applied through the magnetorquers,

      tau = -Kp * q_e_vec - Kd * omega_e

* spin / de-spin: the x-axis reaction wheel tracks the commanded spin rate
  while the magnetorquers damp the transverse rates,

      tau_rw = -K1 * omega_e.x        tau_m = -K2 * (0, omega_e.y, omega_e.z)

The quaternion error is the literal vector-part difference
``vec(q) - vec(q_d)`` of sign-canonicalized quaternions.  A multiplicative
error option (vector part of ``q (x) conj(q_d)``) exists behind a flag for
comparison and is off by default.

Magnetorquer allocation runs at two fidelities: IDEAL treats the commanded
torque as directly realizable up to a per-axis clamp; PHYSICAL converts it to
a dipole ``m = (B x tau) / |B|^2``, clamps the dipole per axis, and applies
``tau = m x B``, which is orthogonal to B by construction (torque demanded
along the field line is simply not realizable that step).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .quatmath import (
    Quat,
    Vec3,
    canonical_sign,
    quat_conjugate,
    quat_multiply,
    visfinite,
)

__all__ = [
    "Gains",
    "ActuatorLimits",
    "Fidelity",
    "Mode",
    "ErrorState",
    "TorqueCommand",
    "WheelStep",
    "ModeThresholds",
    "ZeroFieldError",
    "error_state",
    "pd_torque",
    "spin_torques",
    "allocate_magnetorquer",
    "wheel_step",
    "mode_transition",
    "total_control",
    "ALLOWED_TRANSITIONS",
]


class ZeroFieldError(ValueError):
    """Physical dipole allocation is undefined in a zero magnetic field."""


@dataclass(frozen=True, slots=True)
class Gains:
    """Control gains; all strictly positive.

    kp/kd drive the attitude PD law, k1 the spin-axis wheel law, k2 the
    transverse magnetic damping during spin and de-spin.
    """

    kp: float = 9e-5
    kd: float = 9e-3
    k1: float = 7e-3
    k2: float = 7e-4

    def __post_init__(self) -> None:
        for name in ("kp", "kd", "k1", "k2"):
            v = getattr(self, name)
            if not (v > 0.0) or not math.isfinite(v):
                raise ValueError(f"gain {name} must be > 0 and finite, got {v}")


@dataclass(frozen=True, slots=True)
class ActuatorLimits:
    """Saturation limits for the magnetorquers and the reaction wheel."""

    max_dipole_am2: float = 0.2
    max_magnetic_torque_nm: float = 1e-5
    max_wheel_torque_nm: float = 1e-3
    max_wheel_momentum_nms: float = 1e-2

    def __post_init__(self) -> None:
        for name in ("max_dipole_am2", "max_magnetic_torque_nm",
                     "max_wheel_torque_nm", "max_wheel_momentum_nms"):
            v = getattr(self, name)
            if not (v > 0.0) or not math.isfinite(v):
                raise ValueError(f"limit {name} must be > 0 and finite, got {v}")


class Fidelity(Enum):
    IDEAL = "ideal"
    PHYSICAL = "physical"


class Mode(Enum):
    DETUMBLE = "detumble"
    NOMINAL = "nominal"
    SPIN = "spin"
    DESPIN = "despin"
    SAFE = "safe"


ALLOWED_TRANSITIONS: dict[Mode, frozenset[Mode]] = {
    Mode.DETUMBLE: frozenset({Mode.DETUMBLE, Mode.NOMINAL, Mode.SAFE}),
    Mode.NOMINAL: frozenset({Mode.NOMINAL, Mode.SPIN, Mode.SAFE}),
    Mode.SPIN: frozenset({Mode.SPIN, Mode.DESPIN, Mode.SAFE}),
    Mode.DESPIN: frozenset({Mode.DESPIN, Mode.NOMINAL, Mode.SAFE}),
    Mode.SAFE: frozenset({Mode.SAFE, Mode.NOMINAL}),
}


class ErrorState(NamedTuple):
    q_e_vec: Vec3   # vector-part quaternion error
    omega_e: Vec3   # rad/s rate error


class TorqueCommand(NamedTuple):
    tau_m: Vec3              # magnetic torque actually applied, N*m
    dipole: Vec3             # commanded dipole, A*m^2 (zero in IDEAL mode)
    tau_rw: float            # wheel torque applied to the body about x, N*m
    magnetic_saturated: bool
    wheel_saturated: bool


class WheelStep(NamedTuple):
    tau_applied: float
    momentum: float
    saturated: bool


@dataclass(frozen=True, slots=True)
class ModeThresholds:
    detumble_exit_radps: float = 0.01
    despin_exit_radps: float = 1e-3


def error_state(q: Quat, q_d: Quat, omega: Vec3, omega_d: Vec3,
                multiplicative: bool = False) -> ErrorState:
    """Error quaternion vector part and rate error.

    Both quaternions are expected sign-canonicalized (q0 >= 0); the default
    error is the plain component difference of the vector parts, which for
    small errors agrees with the multiplicative error to first order.
    """
    if multiplicative:
        dq = canonical_sign(quat_multiply(q, quat_conjugate(q_d)))
        q_e = Vec3(dq[1], dq[2], dq[3])
    else:
        q_e = Vec3(q[1] - q_d[1], q[2] - q_d[2], q[3] - q_d[3])
    return ErrorState(q_e, Vec3(omega[0] - omega_d[0],
                                omega[1] - omega_d[1],
                                omega[2] - omega_d[2]))


def pd_torque(err: ErrorState, gains: Gains) -> Vec3:
    """Attitude PD law used by the de-tumble and nominal modes."""
    return Vec3(
        -gains.kp * err.q_e_vec[0] - gains.kd * err.omega_e[0],
        -gains.kp * err.q_e_vec[1] - gains.kd * err.omega_e[1],
        -gains.kp * err.q_e_vec[2] - gains.kd * err.omega_e[2],
    )


def spin_torques(err: ErrorState, gains: Gains) -> tuple[float, Vec3]:
    """Spin / de-spin laws: wheel torque about x, magnetic damping on y/z."""
    tau_rw = -gains.k1 * err.omega_e[0]
    tau_m = Vec3(0.0, -gains.k2 * err.omega_e[1], -gains.k2 * err.omega_e[2])
    return tau_rw, tau_m


def _clamp(v: float, limit: float) -> float:
    if v > limit:
        return limit
    if v < -limit:
        return -limit
    return v


def allocate_magnetorquer(
    tau_desired: Vec3,
    b_body: Vec3,
    limits: ActuatorLimits,
    fidelity: Fidelity = Fidelity.IDEAL,
) -> TorqueCommand:
    """Map a desired magnetic torque onto the magnetorquers.

    Args:
        tau_desired: torque the control law asked for, body frame (N*m).
        b_body: magnetic field in the body frame (T); must be nonzero for
            PHYSICAL allocation.
        limits: actuator saturation limits.
        fidelity: IDEAL applies ``tau_desired`` with a per-axis clamp;
            PHYSICAL goes through the dipole and only realizes the component
            orthogonal to the field.

    Returns:
        TorqueCommand with the applied torque, the dipole, and saturation flags.

    Raises:
        ZeroFieldError: PHYSICAL allocation with |B| = 0.
    """
    if fidelity is Fidelity.IDEAL:
        lim = limits.max_magnetic_torque_nm
        tau = Vec3(_clamp(tau_desired[0], lim),
                   _clamp(tau_desired[1], lim),
                   _clamp(tau_desired[2], lim))
        saturated = tau != tau_desired
        return TorqueCommand(tau, Vec3(0.0, 0.0, 0.0), 0.0, saturated, False)

    bx, by, bz = b_body
    b2 = bx * bx + by * by + bz * bz
    if b2 == 0.0:
        raise ZeroFieldError("cannot allocate a dipole in a zero magnetic field")
    # m = (B x tau) / |B|^2, clamped per axis
    mx = (by * tau_desired[2] - bz * tau_desired[1]) / b2
    my = (bz * tau_desired[0] - bx * tau_desired[2]) / b2
    mz = (bx * tau_desired[1] - by * tau_desired[0]) / b2
    lim = limits.max_dipole_am2
    cmx, cmy, cmz = _clamp(mx, lim), _clamp(my, lim), _clamp(mz, lim)
    saturated = (cmx, cmy, cmz) != (mx, my, mz)
    dipole = Vec3(cmx, cmy, cmz)
    tau = Vec3(cmy * bz - cmz * by, cmz * bx - cmx * bz, cmx * by - cmy * bx)
    return TorqueCommand(tau, dipole, 0.0, saturated, False)


def wheel_step(tau_commanded: float, momentum: float, limits: ActuatorLimits,
               dt: float) -> WheelStep:
    """Apply one control interval of wheel torque with momentum bookkeeping.

    The torque is clamped to the wheel's torque limit, then further reduced if
    integrating it for ``dt`` would push the stored momentum past the momentum
    limit (the wheel rides the momentum stop rather than overshooting it).
    """
    if not (dt > 0.0):
        raise ValueError(f"dt must be > 0, got {dt}")
    tau = _clamp(tau_commanded, limits.max_wheel_torque_nm)
    saturated = tau != tau_commanded
    h_next = momentum + tau * dt
    h_lim = limits.max_wheel_momentum_nms
    if h_next > h_lim:
        tau = (h_lim - momentum) / dt
        h_next = h_lim
        saturated = True
    elif h_next < -h_lim:
        tau = (-h_lim - momentum) / dt
        h_next = -h_lim
        saturated = True
    return WheelStep(tau, h_next, saturated)


def mode_transition(
    mode: Mode,
    omega: Vec3,
    thresholds: ModeThresholds,
    command: Mode | None = None,
) -> Mode:
    """Advance the mode machine one sample.

    Autonomous edges: DETUMBLE -> NOMINAL below the de-tumble rate threshold,
    DESPIN -> NOMINAL below the de-spin threshold, and any mode -> SAFE on a
    non-finite state.  Commanded edges (``command``): NOMINAL -> SPIN,
    SPIN -> DESPIN, any -> SAFE, and SAFE -> NOMINAL as the explicit release;
    SAFE ignores everything else.  Commands that do not correspond to an
    allowed edge are ignored.
    """
    if not visfinite(omega):
        return Mode.SAFE
    if command is Mode.SAFE:
        return Mode.SAFE
    if mode is Mode.SAFE:
        return Mode.NOMINAL if command is Mode.NOMINAL else Mode.SAFE
    if command is not None and command in ALLOWED_TRANSITIONS[mode]:
        return command
    speed = math.sqrt(omega[0] ** 2 + omega[1] ** 2 + omega[2] ** 2)
    if mode is Mode.DETUMBLE and speed < thresholds.detumble_exit_radps:
        return Mode.NOMINAL
    if mode is Mode.DESPIN and speed < thresholds.despin_exit_radps:
        return Mode.NOMINAL
    return mode


def total_control(cmd: TorqueCommand) -> Vec3:
    """Net control torque on the body: magnetics plus the x-axis wheel."""
    return Vec3(cmd.tau_m[0] + cmd.tau_rw, cmd.tau_m[1], cmd.tau_m[2])
