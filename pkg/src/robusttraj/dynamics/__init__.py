"""Rigid-body kinematics and dynamics on the model's kinematic tree.

Public operations are pure functions of an immutable Model; they accept
real or complex coordinate arrays (complex inputs support complex-step
differentiation).  The hot kernels run on a compiled backend when it is
available, see ``_backend``.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ._backend import BACKEND, impl as _K
from ._kernels_py import mrp_to_rotation as _mrp_to_rotation_py
from ._tree import tree_data

GRAVITY = np.array([0.0, 0.0, -9.81])


class DegenerateInertiaError(RuntimeError):
    """Mass matrix numerically singular (condition number > 1e12)."""


def mrp_to_rotation(psi):
    """Rotation matrix (body -> world) for a Modified Rodrigues vector."""
    return _mrp_to_rotation_py(np.asarray(psi))


def rotation_to_mrp(R):
    """MRP of a rotation matrix, on the principal sheet (norm <= 1)."""
    R = np.asarray(R, dtype=float)
    t = np.trace(R)
    # Shepperd's method, branch on the largest quaternion component
    cand = [t, R[0, 0], R[1, 1], R[2, 2]]
    k = int(np.argmax(cand))
    if k == 0:
        w = np.sqrt(1.0 + t) / 2.0
        x = (R[2, 1] - R[1, 2]) / (4 * w)
        y = (R[0, 2] - R[2, 0]) / (4 * w)
        z = (R[1, 0] - R[0, 1]) / (4 * w)
    else:
        i = k - 1
        j, l = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(1.0 + R[i, i] - R[j, j] - R[l, l]) / 2.0
        q = np.zeros(3)
        q[i] = s
        q[j] = (R[j, i] + R[i, j]) / (4 * s)
        q[l] = (R[l, i] + R[i, l]) / (4 * s)
        w = (R[l, j] - R[j, l]) / (4 * s)
        x, y, z = q
    if w < 0.0:  # q0 >= 0 keeps the MRP inside the unit ball
        w, x, y, z = -w, -x, -y, -z
    return np.array([x, y, z]) / (1.0 + w)


def mrp_rates(psi, omega_body):
    """MRP kinematics: psi_dot for a body-frame angular velocity."""
    psi = np.asarray(psi)
    omega_body = np.asarray(omega_body)
    s2 = psi @ psi
    z = psi[0] * 0.0
    sk = np.array([[z, -psi[2], psi[1]], [psi[2], z, -psi[0]], [-psi[1], psi[0], z]])
    B = (1.0 - s2) * np.eye(3) + 2.0 * sk + 2.0 * np.outer(psi, psi)
    return 0.25 * (B @ omega_body)


def mrp_shadow(psi):
    """Switch to the shadow set whenever the MRP leaves the unit ball."""
    psi = np.asarray(psi, dtype=float)
    n2 = psi @ psi
    if n2 > 1.0:
        return -psi / n2
    return psi


def _fk(model, q):
    td = tree_data(model)
    q = np.ascontiguousarray(q)
    return td, _K.fk_pass(td.parent, td.off_R, td.off_p, td.axis, td.floating, q)


def _point_ref(model, td, point):
    """Resolve a contact index or the string 'ee' to (body, offset)."""
    if point == "ee":
        if td.ee_body < 0:
            raise KeyError("model has no end-effector frame")
        return td.ee_body, td.ee_offset
    i = int(point)
    if not 0 <= i < len(td.contact_body):
        raise KeyError(f"unknown contact point {point!r}")
    return int(td.contact_body[i]), td.contact_offset[i]


def forward_kinematics(model, q, point):
    """World position of contact point ``i`` or of the end-effector ('ee')."""
    td, (R_w, p_w, _, _) = _fk(model, q)
    body, off = _point_ref(model, td, point)
    return _K.point_position(R_w, p_w, body, off)


def point_jacobian(model, q, point):
    """3 x n_v linear point Jacobian honoring the mixed twist convention."""
    td, (R_w, p_w, s_w, anch_w) = _fk(model, q)
    body, off = _point_ref(model, td, point)
    return _K.point_jacobian(td.parent, td.floating, R_w, p_w, s_w, anch_w, body, off)


def support_jacobian(model, q):
    """Stacked contact Jacobians J_s (n_s x n_v)."""
    td, (R_w, p_w, s_w, anch_w) = _fk(model, q)
    J = np.zeros((3 * len(td.contact_body), model.n_v), dtype=R_w.dtype)
    for i, (b, off) in enumerate(zip(td.contact_body, td.contact_offset)):
        J[3 * i : 3 * i + 3] = _K.point_jacobian(
            td.parent, td.floating, R_w, p_w, s_w, anch_w, int(b), off
        )
    return J


def end_effector_jacobian(model, q):
    return point_jacobian(model, q, "ee")


def contact_jacobians(model, q):
    """(J_s, J_e) evaluated in one kinematics pass."""
    td, (R_w, p_w, s_w, anch_w) = _fk(model, q)
    J_s = np.zeros((3 * len(td.contact_body), model.n_v), dtype=R_w.dtype)
    for i, (b, off) in enumerate(zip(td.contact_body, td.contact_offset)):
        J_s[3 * i : 3 * i + 3] = _K.point_jacobian(
            td.parent, td.floating, R_w, p_w, s_w, anch_w, int(b), off
        )
    J_e = _K.point_jacobian(
        td.parent, td.floating, R_w, p_w, s_w, anch_w, td.ee_body, td.ee_offset
    )
    return J_s, J_e


def ee_axis(model, q):
    """World-frame gripper approach axis a(q)."""
    td, (R_w, _, _, _) = _fk(model, q)
    if td.ee_body < 0:
        raise KeyError("model has no end-effector frame")
    return R_w[td.ee_body] @ td.ee_axis


def body_com_positions(model, q):
    """World COM of every body (used by energy-balance checks)."""
    td, (R_w, p_w, _, _) = _fk(model, q)
    return np.stack([p_w[i] + R_w[i] @ td.com[i] for i in range(td.n_b)])


def mass_matrix(model, q):
    """Symmetric positive definite mass matrix (CRBA)."""
    td, (R_w, p_w, s_w, anch_w) = _fk(model, q)
    return _K.crba(td.parent, td.mass, td.com, td.inertia, td.floating, R_w, p_w, s_w, anch_w)


def inverse_dynamics(model, q, v, vdot, gravity=GRAVITY):
    """Generalized forces realizing (q, v, vdot) under gravity (RNEA)."""
    td, (R_w, p_w, s_w, anch_w) = _fk(model, q)
    v = np.ascontiguousarray(v)
    vdot = np.ascontiguousarray(vdot)
    return _K.rnea(
        td.parent, td.mass, td.com, td.inertia, td.floating,
        R_w, p_w, s_w, anch_w, v, vdot, np.asarray(gravity, dtype=float),
    )


def bias_forces(model, q, v, gravity=GRAVITY):
    """Coriolis, centrifugal, and gravity vector h(q, v)."""
    z = np.zeros(model.n_v)
    return inverse_dynamics(model, q, v, z, gravity)


def dynamics_terms(model, q, v, gravity=GRAVITY):
    return mass_matrix(model, q), bias_forces(model, q, v, gravity)


def apply_actuation(model, tau, out=None, dtype=None):
    """S^T tau: scatter joint torques into generalized-force coordinates."""
    base = 6 if model.floating_base else 0
    if out is None:
        out = np.zeros(model.n_v, dtype=dtype or np.asarray(tau).dtype)
    out[base:] += tau
    return out


def forward_dynamics(model, q, v, tau, lam=None, f_ext=None, gravity=GRAVITY):
    """Generalized accelerations from torques, contact forces, and an
    optional external end-effector force (zero in the nominal setting)."""
    M = mass_matrix(model, q)
    h = bias_forces(model, q, v, gravity)
    tau = np.asarray(tau)
    rhs = -h.astype(np.result_type(h.dtype, tau.dtype), copy=True)
    rhs = apply_actuation(model, tau, out=rhs)
    if lam is not None and model.n_s:
        rhs = rhs + support_jacobian(model, q).T @ np.asarray(lam)
    if f_ext is not None:
        rhs = rhs + end_effector_jacobian(model, q).T @ np.asarray(f_ext)
    if np.iscomplexobj(M) or np.iscomplexobj(rhs):
        return np.linalg.solve(M, rhs)
    try:
        return cho_solve(cho_factor(M), rhs)
    except np.linalg.LinAlgError:
        raise DegenerateInertiaError(
            f"mass matrix not SPD (cond ~ {np.linalg.cond(M):.3e})"
        ) from None


def position_rates(model, q, v):
    """q_dot for generalized velocities v (MRP kinematics for the base)."""
    v = np.asarray(v)
    if not model.floating_base:
        return v.copy()
    psi = np.asarray(q)[3:6]
    dtype = np.result_type(np.asarray(q).dtype, v.dtype)
    qdot = np.zeros(model.n_q, dtype=dtype)
    qdot[0:3] = v[0:3]
    qdot[3:6] = mrp_rates(psi, v[3:6])
    qdot[6:] = v[6:]
    return qdot


def state_derivative(model, q, v, tau, lam=None, gravity=GRAVITY):
    """(q_dot, v_dot) of the nominal closed dynamics (no external force)."""
    vdot = forward_dynamics(model, q, v, tau, lam, f_ext=None, gravity=gravity)
    return position_rates(model, q, v), vdot
