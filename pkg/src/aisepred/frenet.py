"""Frenet-Serret frame extraction and closed-form propagation on the rotation group.

A moving frame R = [T N B] attached to a 3D trajectory evolves as
Rdot = R * hat(omega) with omega = [tau, 0, kappa] expressed in the frame,
where kappa = u * curvature and tau = u * torsion. Holding omega and the
speed u over one sample gives a closed-form rotation/position update, which
iterated l times yields an l-step trajectory prediction.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateGeometry",
    "FrenetModel",
    "hat",
    "frame_from_derivatives",
    "scalar_params",
    "frenet_model",
    "gamma0",
    "gamma1",
    "fs_predict",
]

# Below this angle the closed forms lose digits to cancellation; switch to series.
_SMALL_ANGLE = 1e-4
# Velocity below this is treated as "not moving" (absolute, m/s).
TOL_SPEED = 1e-9
# Relative floor for the cross product norm deciding curvature degeneracy.
TOL_CROSS = 1e-12
# Repeated rotation products are re-orthonormalized this often.
_RENORM_EVERY = 64


class DegenerateGeometry(ValueError):
    """Raised when velocity or curvature is too small to define a frame."""


@dataclass(frozen=True)
class FrenetModel:
    """Frame and scalar parameters of a trajectory at one step.

    R stacks the unit tangent, normal, and binormal as columns and is a proper
    rotation. omega = [u*torsion, 0, u*curvature] is the frame's angular
    velocity resolved in the frame itself (middle component identically zero).
    """

    R: np.ndarray
    u: float
    kappa_t: float
    tau_t: float
    omega: np.ndarray


def hat(w):
    """3x3 skew-symmetric matrix of w, satisfying hat(w) @ v == cross(w, v)."""
    w = np.asarray(w, dtype=float)
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def _check_nondegenerate(v, a):
    speed = np.linalg.norm(v)
    cross = np.cross(v, a)
    cross_norm = np.linalg.norm(cross)
    if speed <= TOL_SPEED:
        raise DegenerateGeometry(f"speed {speed:.3e} below tolerance")
    if cross_norm <= TOL_CROSS * max(1.0, speed * np.linalg.norm(a)):
        raise DegenerateGeometry("velocity and acceleration are (near-)parallel")
    return speed, cross, cross_norm


def frame_from_derivatives(v, a):
    """Unit tangent, normal, and binormal from velocity and acceleration.

    Returns a right-handed orthonormal triple (T, N, B). Raises
    DegenerateGeometry when the speed or the curvature direction is not
    resolvable (straight-line or stationary motion).
    """
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    speed, cross, cross_norm = _check_nondegenerate(v, a)
    t_vec = v / speed
    b_vec = cross / cross_norm
    n_vec = np.cross(v, np.cross(a, v)) / (speed * cross_norm)
    return t_vec, n_vec, b_vec


def scalar_params(v, a, j):
    """Speed, curvature, and torsion from the first three derivatives."""
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    j = np.asarray(j, dtype=float)
    speed, cross, cross_norm = _check_nondegenerate(v, a)
    curvature = cross_norm / speed**3
    torsion = float(v @ np.cross(a, j)) / cross_norm**2
    return speed, curvature, torsion


def frenet_model(v, a, j):
    """Assemble the full FrenetModel from derivative estimates at one step."""
    t_vec, n_vec, b_vec = frame_from_derivatives(v, a)
    speed, curvature, torsion = scalar_params(v, a, j)
    R = np.column_stack([t_vec, n_vec, b_vec])
    omega = np.array([speed * torsion, 0.0, speed * curvature])
    return FrenetModel(R=R, u=speed, kappa_t=curvature, tau_t=torsion, omega=omega)


def gamma0(phi):
    """Rotation by the vector phi (matrix exponential of hat(phi), closed form)."""
    phi = np.asarray(phi, dtype=float)
    angle = np.linalg.norm(phi)
    S = hat(phi)
    S2 = S @ S
    if angle < _SMALL_ANGLE:
        return np.eye(3) + S + 0.5 * S2 + (S2 @ S) / 6.0
    return (
        np.eye(3)
        + (np.sin(angle) / angle) * S
        + ((1.0 - np.cos(angle)) / angle**2) * S2
    )


def gamma1(phi):
    """Normalized integral of the rotation flow: (1/t)*int_0^t exp(hat(phi)*s/t) ds."""
    phi = np.asarray(phi, dtype=float)
    angle = np.linalg.norm(phi)
    S = hat(phi)
    S2 = S @ S
    if angle < _SMALL_ANGLE:
        return np.eye(3) + 0.5 * S + S2 / 6.0
    return (
        np.eye(3)
        + ((1.0 - np.cos(angle)) / angle**2) * S
        + ((angle - np.sin(angle)) / angle**3) * S2
    )


def _project_rotation(M):
    """Nearest rotation matrix in the Frobenius sense (polar projection)."""
    U, _, Vt = np.linalg.svd(M)
    R = U @ Vt
    if np.linalg.det(R) < 0:
        R = U @ np.diag([1.0, 1.0, -1.0]) @ Vt
    return R


def fs_predict(p_k, model, horizon, t_s):
    """Predict the next `horizon` positions holding speed and turning rates fixed.

    The rotation advances by gamma0(omega*t_s) each step; positions accumulate
    the per-step displacement t_s * R * gamma1(omega*t_s) * [u, 0, 0]. Runs in
    O(horizon) 3x3 products, re-orthonormalizing the running rotation
    periodically to bound drift over long horizons.

    Returns an array of shape (horizon, 3), rows l = 1..horizon.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    p_k = np.asarray(p_k, dtype=float)
    phi = model.omega * t_s
    step_rot = gamma0(phi)
    # Displacement of one step, expressed in the local frame.
    local_step = t_s * gamma1(phi) @ np.array([model.u, 0.0, 0.0])

    frames = np.empty((horizon, 3, 3))
    R_cur = model.R.copy()
    frames[0] = R_cur
    for i in range(1, horizon):
        R_cur = R_cur @ step_rot
        if i % _RENORM_EVERY == 0:
            R_cur = _project_rotation(R_cur)
        frames[i] = R_cur
    summed = np.cumsum(frames, axis=0)
    return p_k + summed @ local_step
