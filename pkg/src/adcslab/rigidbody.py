"""Rigid-body attitude state and fixed-step propagation.

The propagated state couples the attitude quaternion (body relative to orbit
frame) with the body angular rate.  Dynamics follow Euler's equations with the
inverse inertia applied to the whole torque balance::

    omega_dot = J^-1 * ( -omega x (J omega) + tau_control + tau_disturbance )

and the quaternion kinematics of :func:`adcslab.quatmath.quat_derivative`.
Integration is classical fixed-step RK4 over the combined state; the
quaternion is renormalized and sign-canonicalized after every step, which
keeps the norm at machine precision without touching the rate dynamics.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from .quatmath import Quat, Vec3, ZeroQuaternionError, normalize_canonical, quat_derivative

__all__ = [
    "AttitudeState",
    "InertiaTensor",
    "SingularInertiaError",
    "NonFiniteStateError",
    "body_rates_derivative",
    "rk4_step",
    "make_rigid_body_dynamics",
    "free_rotation",
]

_Rates = tuple[tuple[float, float, float, float], Vec3]
Dynamics = Callable[["AttitudeState"], _Rates]


class SingularInertiaError(ValueError):
    """Inertia tensor is not invertible (degenerate mass catalog)."""


class NonFiniteStateError(FloatingPointError):
    """State left the finite domain; usually the step size is too large."""


class AttitudeState(NamedTuple):
    """Snapshot of the attitude propagation state at time ``t``."""

    q: Quat
    omega: Vec3          # rad/s, body frame, relative to orbit frame
    wheel_momentum: float  # N*m*s, along body x
    t: float             # s


class InertiaTensor:
    """Validated 3x3 inertia tensor about the center of mass (kg*m^2).

    Construction enforces symmetry, positive definiteness, and the triangle
    inequality on the principal moments; a matrix that fails positive
    definiteness raises :class:`SingularInertiaError` so a degenerate mass
    catalog surfaces before any propagation is attempted.
    """

    __slots__ = ("_m", "rows", "inverse_rows", "_eigvals")

    def __init__(self, matrix) -> None:
        m = np.asarray(matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"inertia tensor must be 3x3, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("inertia tensor must be finite")
        scale = float(np.abs(m).max())
        if scale == 0.0:
            raise SingularInertiaError("inertia tensor is identically zero")
        if float(np.abs(m - m.T).max()) > 1e-12 * scale:
            raise ValueError("inertia tensor must be symmetric to 1e-12 relative")
        sym = 0.5 * (m + m.T)
        eigvals = np.linalg.eigvalsh(sym)
        if eigvals[0] <= 1e-12 * eigvals[-1]:
            raise SingularInertiaError(
                f"inertia tensor is singular or indefinite (eigenvalues {eigvals})"
            )
        tol = 1e-12 * eigvals[-1]
        e1, e2, e3 = eigvals
        if e1 + e2 < e3 - tol:  # e3 is the largest
            raise ValueError(
                f"principal moments violate the triangle inequality: {eigvals}"
            )
        self._m = m
        self._eigvals = eigvals
        inv = np.linalg.inv(m)
        self.rows = tuple(tuple(float(x) for x in row) for row in m)
        self.inverse_rows = tuple(tuple(float(x) for x in row) for row in inv)

    @classmethod
    def diagonal(cls, jxx: float, jyy: float, jzz: float) -> "InertiaTensor":
        return cls(np.diag([jxx, jyy, jzz]))

    @property
    def matrix(self) -> np.ndarray:
        return self._m.copy()

    @property
    def principal_moments(self) -> tuple[float, float, float]:
        return tuple(float(v) for v in self._eigvals)

    def dot(self, v: Vec3) -> Vec3:
        (a, b, c), (d, e, f), (g, h, i) = self.rows
        return Vec3(a * v[0] + b * v[1] + c * v[2],
                    d * v[0] + e * v[1] + f * v[2],
                    g * v[0] + h * v[1] + i * v[2])

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"InertiaTensor({self._m.tolist()})"


def body_rates_derivative(J, omega: Vec3, tau_control: Vec3, tau_disturbance: Vec3) -> Vec3:
    """Euler's equations: rate derivative for the given torque balance.

    Args:
        J: an :class:`InertiaTensor`, or a raw 3x3 matrix.  A raw matrix is
            checked for invertibility and raises :class:`SingularInertiaError`
            when the mass catalog it came from is degenerate.
        omega: body rates (rad/s).
        tau_control: control torque in the body frame (N*m).
        tau_disturbance: disturbance torque in the body frame (N*m).

    Returns:
        omega_dot (rad/s^2).
    """
    if not isinstance(J, InertiaTensor):
        m = np.asarray(J, dtype=float)
        eig = np.linalg.eigvalsh(0.5 * (m + m.T))
        if abs(eig[0]) <= 1e-12 * max(abs(eig[-1]), 1e-300):
            raise SingularInertiaError(
                f"inertia tensor is singular (eigenvalues {eig}); "
                "the mass catalog is degenerate"
            )
        J = InertiaTensor(m)
    wx, wy, wz = omega
    (a, b, c), (d, e, f), (g, h, i) = J.rows
    hx = a * wx + b * wy + c * wz
    hy = d * wx + e * wy + f * wz
    hz = g * wx + h * wy + i * wz
    gx = tau_control[0] + tau_disturbance[0] - (wy * hz - wz * hy)
    gy = tau_control[1] + tau_disturbance[1] - (wz * hx - wx * hz)
    gz = tau_control[2] + tau_disturbance[2] - (wx * hy - wy * hx)
    (p, qq, r), (s, t, u), (v, w, x) = J.inverse_rows
    return Vec3(p * gx + qq * gy + r * gz,
                s * gx + t * gy + u * gz,
                v * gx + w * gy + x * gz)


def make_rigid_body_dynamics(J: InertiaTensor, torque: Vec3) -> Dynamics:
    """Dynamics closure for a constant body-frame torque over one step.

    The control loop recomputes the torque once per step (zero-order hold),
    so within a step the torque is constant and the closure only evaluates
    the gyroscopic term and the kinematics.
    """
    (a, b, c), (d, e, f), (g, h, i) = J.rows
    (p, qq, r), (s, t, u), (v, w, x) = J.inverse_rows
    tx, ty, tz = torque

    def dynamics(state: AttitudeState) -> _Rates:
        wx, wy, wz = state.omega
        hx = a * wx + b * wy + c * wz
        hy = d * wx + e * wy + f * wz
        hz = g * wx + h * wy + i * wz
        gx = tx - (wy * hz - wz * hy)
        gy = ty - (wz * hx - wx * hz)
        gz = tz - (wx * hy - wy * hx)
        return (
            quat_derivative(state.q, state.omega),
            Vec3(p * gx + qq * gy + r * gz,
                 s * gx + t * gy + u * gz,
                 v * gx + w * gy + x * gz),
        )

    return dynamics


def free_rotation(J: InertiaTensor) -> Dynamics:
    """Torque-free dynamics; conserves energy and momentum up to RK4 error."""
    return make_rigid_body_dynamics(J, Vec3(0.0, 0.0, 0.0))


def rk4_step(state: AttitudeState, dynamics: Dynamics, dt: float) -> AttitudeState:
    """One classical RK4 step of the combined (q, omega) state.

    The returned quaternion is renormalized and sign-canonicalized; wheel
    momentum is carried through untouched (the actuator model owns it).

    Raises:
        ValueError: on a non-positive ``dt``.
        NonFiniteStateError: if any component leaves the finite domain.
    """
    if not (dt > 0.0) or not math.isfinite(dt):
        raise ValueError(f"dt must be positive and finite, got {dt}")
    q0, q1, q2, q3 = state.q
    wx, wy, wz = state.omega
    t = state.t
    half = 0.5 * dt

    k1q, k1w = dynamics(state)
    s2 = AttitudeState(
        Quat(q0 + half * k1q[0], q1 + half * k1q[1],
             q2 + half * k1q[2], q3 + half * k1q[3]),
        Vec3(wx + half * k1w[0], wy + half * k1w[1], wz + half * k1w[2]),
        state.wheel_momentum, t + half)
    k2q, k2w = dynamics(s2)
    s3 = AttitudeState(
        Quat(q0 + half * k2q[0], q1 + half * k2q[1],
             q2 + half * k2q[2], q3 + half * k2q[3]),
        Vec3(wx + half * k2w[0], wy + half * k2w[1], wz + half * k2w[2]),
        state.wheel_momentum, t + half)
    k3q, k3w = dynamics(s3)
    s4 = AttitudeState(
        Quat(q0 + dt * k3q[0], q1 + dt * k3q[1],
             q2 + dt * k3q[2], q3 + dt * k3q[3]),
        Vec3(wx + dt * k3w[0], wy + dt * k3w[1], wz + dt * k3w[2]),
        state.wheel_momentum, t + dt)
    k4q, k4w = dynamics(s4)

    sixth = dt / 6.0
    qn = Quat(
        q0 + sixth * (k1q[0] + 2.0 * (k2q[0] + k3q[0]) + k4q[0]),
        q1 + sixth * (k1q[1] + 2.0 * (k2q[1] + k3q[1]) + k4q[1]),
        q2 + sixth * (k1q[2] + 2.0 * (k2q[2] + k3q[2]) + k4q[2]),
        q3 + sixth * (k1q[3] + 2.0 * (k2q[3] + k3q[3]) + k4q[3]),
    )
    wn = Vec3(
        wx + sixth * (k1w[0] + 2.0 * (k2w[0] + k3w[0]) + k4w[0]),
        wy + sixth * (k1w[1] + 2.0 * (k2w[1] + k3w[1]) + k4w[1]),
        wz + sixth * (k1w[2] + 2.0 * (k2w[2] + k3w[2]) + k4w[2]),
    )
    probe = qn[0] + qn[1] + qn[2] + qn[3] + wn[0] + wn[1] + wn[2]
    if not math.isfinite(probe):
        raise NonFiniteStateError(
            f"non-finite state after step at t={t:.6g}s (dt={dt:g}); "
            "dt is probably too large for the current rates"
        )
    try:
        q_unit = normalize_canonical(qn)
    except ZeroQuaternionError as exc:
        # Components can stay individually finite while the squared norm
        # overflows; that's the same runaway, reported the same way.
        raise NonFiniteStateError(
            f"quaternion norm left the finite domain at t={t:.6g}s (dt={dt:g})"
        ) from exc
    return AttitudeState(q_unit, wn, state.wheel_momentum, t + dt)
