"""Vector, quaternion, and Euler-angle primitives.

Conventions
-----------
* 3-vectors are ``Vec3`` named tuples; units are contextual (rad/s, N*m, m, ...).
* Quaternions are scalar-first ``Quat(q0, q1, q2, q3)``.  A state quaternion
  encodes the attitude of the body frame relative to the orbit frame through
  the standard Hamilton rotation matrix ``R(q)``::

      v_orbit = R(q) @ v_body        v_body = R(q).T @ v_orbit

  and the kinematics ``qdot = 0.5 * Omega(omega) * q`` below take ``omega``
  as the body-frame angular rate of the body relative to the orbit frame.
* Canonical sign: ``q0 >= 0``; when ``q0 == 0`` exactly, the first nonzero
  component among ``(q1, q2, q3)`` is kept positive.  ``q`` and ``-q`` encode
  the same rotation, so this only fixes a deterministic representative.
* Euler angles use the intrinsic 3-2-1 (yaw-pitch-roll) sequence, reported in
  degrees with roll/yaw in (-180, 180] and pitch in [-90, 90].  They exist for
  telemetry and plotting; all propagation is quaternion-based.

These functions are deliberately plain tuple arithmetic: they sit on the
simulation hot path where small-array numpy overhead dominates the cost.
"""

from __future__ import annotations

import math
from typing import NamedTuple


class Vec3(NamedTuple):
    x: float
    y: float
    z: float


class Quat(NamedTuple):
    q0: float
    q1: float
    q2: float
    q3: float


ZERO3 = Vec3(0.0, 0.0, 0.0)
IDENTITY = Quat(1.0, 0.0, 0.0, 0.0)

RPM_TO_RADPS = 2.0 * math.pi / 60.0
RADPS_TO_RPM = 60.0 / (2.0 * math.pi)


class ZeroQuaternionError(ValueError):
    """Raised when a (near-)zero quaternion cannot be normalized."""


# ---------------------------------------------------------------------------
# Vec3 helpers
# ---------------------------------------------------------------------------

def vadd(a: Vec3, b: Vec3) -> Vec3:
    return Vec3(a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vsub(a: Vec3, b: Vec3) -> Vec3:
    return Vec3(a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vscale(a: Vec3, s: float) -> Vec3:
    return Vec3(a[0] * s, a[1] * s, a[2] * s)


def vdot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vcross(a: Vec3, b: Vec3) -> Vec3:
    return Vec3(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def vnorm(a: Vec3) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def vunit(a: Vec3) -> Vec3:
    n = vnorm(a)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return Vec3(a[0] / n, a[1] / n, a[2] / n)


def visfinite(a: Vec3) -> bool:
    return math.isfinite(a[0] + a[1] + a[2])


# ---------------------------------------------------------------------------
# Quaternion algebra
# ---------------------------------------------------------------------------

def quat_norm(q: Quat) -> float:
    return math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


def canonical_sign(q: Quat) -> Quat:
    """Flip ``q`` to the canonical half of the double cover (see module doc)."""
    q0, q1, q2, q3 = q
    if q0 > 0.0:
        return q
    if q0 < 0.0:
        return Quat(-q0, -q1, -q2, -q3)
    # q0 == 0: first nonzero of (q1, q2, q3) positive
    for c in (q1, q2, q3):
        if c > 0.0:
            return q
        if c < 0.0:
            return Quat(-q0, -q1, -q2, -q3)
    return q  # all-zero; caller's problem


def normalize_canonical(q: Quat) -> Quat:
    """Return ``q`` scaled to unit norm and sign-canonicalized.

    Raises:
        ZeroQuaternionError: if the norm is zero or not finite.
    """
    n = quat_norm(q)
    if n == 0.0 or not math.isfinite(n):
        raise ZeroQuaternionError(f"cannot normalize quaternion with norm {n}")
    return canonical_sign(Quat(q[0] / n, q[1] / n, q[2] / n, q[3] / n))


def quat_multiply(a: Quat, b: Quat) -> Quat:
    """Hamilton product ``a (x) b``."""
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return Quat(
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def quat_conjugate(q: Quat) -> Quat:
    return Quat(q[0], -q[1], -q[2], -q[3])


def quat_from_axis_angle(axis: Vec3, angle_rad: float) -> Quat:
    u = vunit(axis)
    h = 0.5 * angle_rad
    s = math.sin(h)
    return Quat(math.cos(h), u[0] * s, u[1] * s, u[2] * s)


def rotate_body_to_orbit(q: Quat, v: Vec3) -> Vec3:
    """Apply ``R(q)``: express a body-frame vector in the orbit frame."""
    q0, q1, q2, q3 = q
    vx, vy, vz = v
    return Vec3(
        (1.0 - 2.0 * (q2 * q2 + q3 * q3)) * vx
        + 2.0 * (q1 * q2 - q0 * q3) * vy
        + 2.0 * (q1 * q3 + q0 * q2) * vz,
        2.0 * (q1 * q2 + q0 * q3) * vx
        + (1.0 - 2.0 * (q1 * q1 + q3 * q3)) * vy
        + 2.0 * (q2 * q3 - q0 * q1) * vz,
        2.0 * (q1 * q3 - q0 * q2) * vx
        + 2.0 * (q2 * q3 + q0 * q1) * vy
        + (1.0 - 2.0 * (q1 * q1 + q2 * q2)) * vz,
    )


def rotate_orbit_to_body(q: Quat, v: Vec3) -> Vec3:
    """Apply ``R(q).T``: express an orbit-frame vector in the body frame."""
    q0, q1, q2, q3 = q
    vx, vy, vz = v
    return Vec3(
        (1.0 - 2.0 * (q2 * q2 + q3 * q3)) * vx
        + 2.0 * (q1 * q2 + q0 * q3) * vy
        + 2.0 * (q1 * q3 - q0 * q2) * vz,
        2.0 * (q1 * q2 - q0 * q3) * vx
        + (1.0 - 2.0 * (q1 * q1 + q3 * q3)) * vy
        + 2.0 * (q2 * q3 + q0 * q1) * vz,
        2.0 * (q1 * q3 + q0 * q2) * vx
        + 2.0 * (q2 * q3 - q0 * q1) * vy
        + (1.0 - 2.0 * (q1 * q1 + q2 * q2)) * vz,
    )


def quat_derivative(q: Quat, omega: Vec3) -> tuple[float, float, float, float]:
    """Attitude kinematics ``qdot = 0.5 * Omega(omega) * q``.

    ``Omega`` is the standard scalar-first skew form whose first row is
    ``(0, -wx, -wy, -wz)``; the derivative is exactly orthogonal to ``q``.
    """
    q0, q1, q2, q3 = q
    wx, wy, wz = omega
    return (
        0.5 * (-wx * q1 - wy * q2 - wz * q3),
        0.5 * (wx * q0 + wz * q2 - wy * q3),
        0.5 * (wy * q0 - wz * q1 + wx * q3),
        0.5 * (wz * q0 + wy * q1 - wx * q2),
    )


# ---------------------------------------------------------------------------
# Euler angles (3-2-1 intrinsic, degrees) -- telemetry/plotting only
# ---------------------------------------------------------------------------

def _wrap_deg(angle: float) -> float:
    """Map an angle in degrees to (-180, 180]."""
    a = math.fmod(angle, 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return a


def quat_to_euler(q: Quat) -> tuple[float, float, float]:
    """3-2-1 (roll, pitch, yaw) of the body relative to the orbit frame, degrees.

    At the pitch singularity (|pitch| = 90 deg) roll and yaw are not separable;
    the convention here is roll = 0 with the residual rotation folded into yaw.
    """
    q0, q1, q2, q3 = q
    sin_pitch = 2.0 * (q0 * q2 - q1 * q3)
    if sin_pitch > 1.0:
        sin_pitch = 1.0
    elif sin_pitch < -1.0:
        sin_pitch = -1.0
    if abs(sin_pitch) >= 1.0 - 1e-12:
        pitch = math.copysign(90.0, sin_pitch)
        roll = 0.0
        yaw = math.degrees(math.atan2(2.0 * (q1 * q2 + q0 * q3),
                                      1.0 - 2.0 * (q2 * q2 + q3 * q3)))
    else:
        pitch = math.degrees(math.asin(sin_pitch))
        roll = math.degrees(math.atan2(2.0 * (q2 * q3 + q0 * q1),
                                       1.0 - 2.0 * (q1 * q1 + q2 * q2)))
        yaw = math.degrees(math.atan2(2.0 * (q1 * q2 + q0 * q3),
                                      1.0 - 2.0 * (q2 * q2 + q3 * q3)))
    return (_wrap_deg(roll), pitch, _wrap_deg(yaw))


def quat_from_euler(roll_deg: float, pitch_deg: float, yaw_deg: float) -> Quat:
    """Quaternion for a 3-2-1 intrinsic rotation (angles in degrees)."""
    hr = 0.5 * math.radians(roll_deg)
    hp = 0.5 * math.radians(pitch_deg)
    hy = 0.5 * math.radians(yaw_deg)
    cr, sr = math.cos(hr), math.sin(hr)
    cp, sp = math.cos(hp), math.sin(hp)
    cy, sy = math.cos(hy), math.sin(hy)
    return canonical_sign(Quat(
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    ))
