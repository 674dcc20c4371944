"""NumPy implementation of the rigid-body kernels.

This is the fallback backend (and the reference the compiled backend is
tested against).  All kernels are dtype-generic: passing complex ``q``/``v``
propagates complex arithmetic throughout, which the derivative machinery
uses for complex-step differentiation.  Tree description arrays stay real.

Conventions (shared with the compiled backend):
  * bodies are topologically ordered, ``parent[0] == -1``;
  * body ``i > 0`` is attached to its parent by revolute joint ``i - 1``
    with frame offset ``off_R[i], off_p[i]`` and rotation axis ``axis[i]``
    expressed in the joint frame;
  * generalized positions: ``[r_IB (3), psi_IB (MRP, 3), q_j]`` for a
    floating base, ``[q_j]`` otherwise;
  * generalized velocities: ``[v_IB in world (3), omega in body frame (3),
    qdot_j]`` for a floating base, ``[qdot_j]`` otherwise.
"""

import numpy as np


def _skew(a):
    z = a[0] * 0.0
    return np.array([[z, -a[2], a[1]], [a[2], z, -a[0]], [-a[1], a[0], z]])


def mrp_to_rotation(psi):
    """Rotation matrix (body -> world) of a Modified Rodrigues vector."""
    psi = np.asarray(psi)
    s2 = psi @ psi
    sk = _skew(psi)
    den = (1.0 + s2) ** 2
    eye = np.eye(3, dtype=psi.dtype) if psi.dtype.kind == "c" else np.eye(3)
    return eye + (4.0 * (1.0 - s2) * sk + 8.0 * (sk @ sk)) / den


def _rot_axis(axis, theta):
    c = np.cos(theta)
    s = np.sin(theta)
    sk = _skew(axis)
    return c * np.eye(3) + s * sk + (1.0 - c) * np.outer(axis, axis)


def fk_pass(parent, off_R, off_p, axis, floating, q):
    """World pose of every body plus the world axis/anchor of every joint.

    Returns ``(R_w, p_w, s_w, anch_w)``; entries 0 of ``s_w``/``anch_w``
    are unused placeholders.
    """
    n_b = parent.shape[0]
    dtype = np.result_type(q, np.float64)
    R_w = np.zeros((n_b, 3, 3), dtype=dtype)
    p_w = np.zeros((n_b, 3), dtype=dtype)
    s_w = np.zeros((n_b, 3), dtype=dtype)
    anch_w = np.zeros((n_b, 3), dtype=dtype)

    if floating:
        p_w[0] = q[0:3]
        R_w[0] = mrp_to_rotation(q[3:6])
        off = 6
    else:
        R_w[0] = np.eye(3)
        off = 0

    for i in range(1, n_b):
        par = parent[i]
        R_j = R_w[par] @ off_R[i]
        p_j = p_w[par] + R_w[par] @ off_p[i]
        R_w[i] = R_j @ _rot_axis(axis[i], q[off + i - 1])
        p_w[i] = p_j
        s_w[i] = R_j @ axis[i]
        anch_w[i] = p_j
    return R_w, p_w, s_w, anch_w


def point_position(R_w, p_w, body, offset):
    return p_w[body] + R_w[body] @ offset


def point_jacobian(parent, floating, R_w, p_w, s_w, anch_w, body, offset):
    """3 x n_v Jacobian mapping generalized velocities to the world-frame
    linear velocity of a point rigidly attached to ``body``."""
    n_b = parent.shape[0]
    n_v = 6 + n_b - 1 if floating else n_b - 1
    x_w = point_position(R_w, p_w, body, offset)
    J = np.zeros((3, n_v), dtype=R_w.dtype)
    base = 0
    if floating:
        J[:, 0:3] = np.eye(3)
        J[:, 3:6] = -_skew(x_w - p_w[0]) @ R_w[0]
        base = 6
    i = body
    while i > 0:
        J[:, base + i - 1] = np.cross(s_w[i], x_w - anch_w[i])
        i = parent[i]
    return J


def rotation_jacobian(parent, floating, R_w, s_w, body):
    """3 x n_v Jacobian mapping generalized velocities to the world-frame
    angular velocity of ``body``."""
    n_b = parent.shape[0]
    n_v = 6 + n_b - 1 if floating else n_b - 1
    J = np.zeros((3, n_v), dtype=R_w.dtype)
    base = 0
    if floating:
        J[:, 3:6] = R_w[0]
        base = 6
    i = body
    while i > 0:
        J[:, base + i - 1] = s_w[i]
        i = parent[i]
    return J


def _world_coms_inertias(mass, com, inertia, R_w, p_w):
    n_b = mass.shape[0]
    c_w = np.zeros((n_b, 3), dtype=R_w.dtype)
    I_w = np.zeros((n_b, 3, 3), dtype=R_w.dtype)
    for i in range(n_b):
        c_w[i] = p_w[i] + R_w[i] @ com[i]
        I_w[i] = R_w[i] @ inertia[i] @ R_w[i].T
    return c_w, I_w


def crba(parent, mass, com, inertia, floating, R_w, p_w, s_w, anch_w):
    """Mass matrix via the Composite Rigid Body Algorithm (world frame)."""
    n_b = parent.shape[0]
    base = 6 if floating else 0
    n_v = base + n_b - 1
    dtype = R_w.dtype
    M = np.zeros((n_v, n_v), dtype=dtype)

    c_w, I_w = _world_coms_inertias(mass, com, inertia, R_w, p_w)
    cm = mass.astype(dtype).copy()
    cc = c_w.copy()
    cI = I_w.copy()
    # accumulate children into parents (reverse topological order)
    for i in range(n_b - 1, 0, -1):
        par = parent[i]
        m1, m2 = cm[par], cm[i]
        m = m1 + m2
        c = (m1 * cc[par] + m2 * cc[i]) / m
        d1 = cc[par] - c
        d2 = cc[i] - c
        cI[par] = (
            cI[par] + m1 * ((d1 @ d1) * np.eye(3) - np.outer(d1, d1))
            + cI[i] + m2 * ((d2 @ d2) * np.eye(3) - np.outer(d2, d2))
        )
        cm[par] = m
        cc[par] = c

    for i in range(1, n_b):
        col = base + i - 1
        s = s_w[i]
        r = cc[i] - anch_w[i]
        F = cm[i] * np.cross(s, r)
        N = cI[i] @ s + np.cross(r, F)  # moment about the joint anchor
        k = i
        while k > 0:
            Nk = N + np.cross(anch_w[i] - anch_w[k], F)
            M[base + k - 1, col] = s_w[k] @ Nk
            M[col, base + k - 1] = M[base + k - 1, col]
            k = parent[k]
        if floating:
            N0 = N + np.cross(anch_w[i] - p_w[0], F)
            M[0:3, col] = F
            M[col, 0:3] = F
            M[3:6, col] = R_w[0].T @ N0
            M[col, 3:6] = M[3:6, col]

    if floating:
        m_t = cm[0]
        d = cc[0] - p_w[0]
        M[0:3, 0:3] = m_t * np.eye(3)
        lin_ang = -m_t * _skew(d) @ R_w[0]
        M[0:3, 3:6] = lin_ang
        M[3:6, 0:3] = lin_ang.T
        I_p = cI[0] + m_t * ((d @ d) * np.eye(3) - np.outer(d, d))
        M[3:6, 3:6] = R_w[0].T @ I_p @ R_w[0]
    return M


def rnea(parent, mass, com, inertia, floating, R_w, p_w, s_w, anch_w, v, a, gravity):
    """Inverse dynamics: generalized forces for motion state (q, v, a).

    ``q`` enters through the forward-kinematics arrays.  With ``a = 0`` this
    is the bias vector h(q, v) including gravity.
    """
    n_b = parent.shape[0]
    base = 6 if floating else 0
    dtype = np.result_type(R_w.dtype, np.asarray(v).dtype, np.asarray(a).dtype)
    om = np.zeros((n_b, 3), dtype=dtype)
    al = np.zeros((n_b, 3), dtype=dtype)
    vo = np.zeros((n_b, 3), dtype=dtype)
    ao = np.zeros((n_b, 3), dtype=dtype)

    if floating:
        om[0] = R_w[0] @ v[3:6]
        al[0] = R_w[0] @ a[3:6]
        vo[0] = v[0:3]
        ao[0] = a[0:3]

    for i in range(1, n_b):
        par = parent[i]
        r = p_w[i] - p_w[par]
        vo[i] = vo[par] + np.cross(om[par], r)
        ao[i] = ao[par] + np.cross(al[par], r) + np.cross(om[par], np.cross(om[par], r))
        om[i] = om[par] + s_w[i] * v[base + i - 1]
        al[i] = al[par] + s_w[i] * a[base + i - 1] + np.cross(om[par], s_w[i]) * v[base + i - 1]

    c_w, I_w = _world_coms_inertias(mass, com, inertia, R_w, p_w)
    f = np.zeros((n_b, 3), dtype=dtype)
    n = np.zeros((n_b, 3), dtype=dtype)
    for i in range(n_b):
        d = c_w[i] - p_w[i]
        a_c = ao[i] + np.cross(al[i], d) + np.cross(om[i], np.cross(om[i], d))
        F = mass[i] * (a_c - gravity)
        N = I_w[i] @ al[i] + np.cross(om[i], I_w[i] @ om[i])
        f[i] = F
        n[i] = N + np.cross(d, F)

    out = np.zeros(base + n_b - 1, dtype=dtype)
    for i in range(n_b - 1, 0, -1):
        par = parent[i]
        out[base + i - 1] = s_w[i] @ n[i]
        f[par] += f[i]
        n[par] += n[i] + np.cross(p_w[i] - p_w[par], f[i])
    if floating:
        out[0:3] = f[0]
        out[3:6] = R_w[0].T @ n[0]
    return out
