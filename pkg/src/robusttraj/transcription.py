"""Direct transcription of the planning problem into a sparse NLP.

Owns the flat decision-vector layout {q_k, v_k, tau_k, lambda_k} (controls
and contact forces only up to the second-to-last knot), the explicit-Euler
defect constraints, friction pyramids, stationary feet, the gripper task,
and the G1/G2 objectives.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import dynamics as dyn
from .model import NORMAL_FORCE_FLOOR, tangent_basis
from .nlp import ConstraintBlock, NlpProblem, Objective

_CS_STEP = 1e-200  # complex-step size; derivatives exact to machine precision

BASE_POS_BOUND = 5.0
BASE_MRP_BOUND = 1.05
BASE_LIN_VEL_BOUND = 10.0
BASE_ANG_VEL_BOUND = 20.0


@dataclass(frozen=True)
class MeshGrid:
    M: int
    duration: float

    @property
    def N(self):
        return self.M - 1

    @property
    def h(self):
        return self.duration / self.N

    def t(self, k):
        return k * self.h


class DecisionLayout:
    """Offsets of every per-knot variable group in the flat vector.

    Knots are 0-based here: q_k, v_k exist for k = 0..M-1 and tau_k,
    lambda_k for k = 0..N-1.  The robust extension appends, per interval,
    one rho plus a row-major (n_s x 3) contact gain matrix.
    """

    def __init__(self, model, M, robust=False):
        self.model = model
        self.M = M
        self.N = M - 1
        self.n_q = model.n_q
        self.n_v = model.n_v
        self.n_j = model.n_j
        self.n_s = model.n_s
        self.robust = robust
        self._q = np.zeros(M, dtype=int)
        self._v = np.zeros(M, dtype=int)
        self._tau = np.zeros(self.N, dtype=int)
        self._lam = np.zeros(self.N, dtype=int)
        off = 0
        for k in range(M):
            self._q[k] = off
            off += self.n_q
            self._v[k] = off
            off += self.n_v
            if k < self.N:
                self._tau[k] = off
                off += self.n_j
                self._lam[k] = off
                off += self.n_s
        self.nominal_size = off
        self._rho = np.zeros(self.N, dtype=int)
        self._kbar = np.zeros(self.N, dtype=int)
        if robust:
            for k in range(self.N):
                self._rho[k] = off
                off += 1
                self._kbar[k] = off
                off += 3 * self.n_s
        self.size = off

    def q_idx(self, k):
        return np.arange(self._q[k], self._q[k] + self.n_q)

    def v_idx(self, k):
        return np.arange(self._v[k], self._v[k] + self.n_v)

    def tau_idx(self, k):
        return np.arange(self._tau[k], self._tau[k] + self.n_j)

    def lam_idx(self, k):
        return np.arange(self._lam[k], self._lam[k] + self.n_s)

    def rho_idx(self, k):
        return self._rho[k]

    def kbar_idx(self, k):
        return np.arange(self._kbar[k], self._kbar[k] + 3 * self.n_s)

    def pack(self, q, v, tau, lam, rho=None, kbar=None):
        xi = np.zeros(self.size)
        for k in range(self.M):
            xi[self.q_idx(k)] = q[k]
            xi[self.v_idx(k)] = v[k]
        for k in range(self.N):
            xi[self.tau_idx(k)] = tau[k]
            xi[self.lam_idx(k)] = lam[k]
            if self.robust:
                xi[self.rho_idx(k)] = 0.0 if rho is None else rho[k]
                if kbar is not None:
                    xi[self.kbar_idx(k)] = np.asarray(kbar[k]).reshape(-1)
        return xi

    def unpack(self, xi):
        q = np.stack([xi[self.q_idx(k)] for k in range(self.M)])
        v = np.stack([xi[self.v_idx(k)] for k in range(self.M)])
        tau = np.stack([xi[self.tau_idx(k)] for k in range(self.N)])
        lam = np.stack([xi[self.lam_idx(k)] for k in range(self.N)])
        out = {"q": q, "v": v, "tau": tau, "lam": lam}
        if self.robust:
            out["rho"] = np.array([xi[self.rho_idx(k)] for k in range(self.N)])
            out["kbar"] = np.stack(
                [xi[self.kbar_idx(k)].reshape(self.n_s, 3) for k in range(self.N)]
            )
        return out


def complex_step_jacobian(fun, x, dim):
    """Jacobian of an analytic vector function via complex-step columns."""
    J = np.zeros((dim, x.size))
    for j in range(x.size):
        xc = x.astype(complex)
        xc[j] += 1j * _CS_STEP
        J[:, j] = np.imag(np.asarray(fun(xc))) / _CS_STEP
    return J


def friction_residuals(lam_i, contact):
    """Five pyramid/floor residuals (<= 0 feasible) for one contact force."""
    lam_i = np.asarray(lam_i)
    A, b = contact_polytope_rows(contact)
    return A @ lam_i - b


def contact_polytope_rows(contact):
    """(A, b) with A f <= b iff f is in the linearized cone with the
    positive normal-force floor folded into the last row."""
    c = contact.mu / math.sqrt(2.0)
    t, bt, n = contact.tangent_t, contact.tangent_b, contact.normal
    A = np.stack([t - c * n, -t - c * n, bt - c * n, -bt - c * n, -n])
    b = np.array([0.0, 0.0, 0.0, 0.0, -NORMAL_FORCE_FLOOR])
    return A, b


def torque_polytope_rows(model):
    """(A, b) with A tau <= b iff the torque bounds hold."""
    n_j = model.n_j
    A = np.vstack([np.eye(n_j), -np.eye(n_j)])
    b = np.concatenate([model.tau_upper, -model.tau_lower])
    return A, b


def task_axis_basis(axis):
    """Two unit vectors spanning the plane orthogonal to the target axis."""
    return tangent_basis(np.asarray(axis, dtype=float))


def gripper_residuals(model, q, waypoint):
    """Five task equalities: end-effector placement plus the two axis
    projections that pin pitch and roll while leaving yaw free."""
    t1, t2 = task_axis_basis(waypoint.axis)
    pos = dyn.forward_kinematics(model, q, "ee")
    a = dyn.ee_axis(model, q)
    return np.concatenate([pos - waypoint.position, [a @ t1, a @ t2]])


def _variable_bounds(model, layout):
    lb = np.full(layout.size, -np.inf)
    ub = np.full(layout.size, np.inf)
    if model.floating_base:
        q_lb = np.concatenate(
            [[-BASE_POS_BOUND] * 3, [-BASE_MRP_BOUND] * 3, model.q_joint_lower]
        )
        q_ub = np.concatenate(
            [[BASE_POS_BOUND] * 3, [BASE_MRP_BOUND] * 3, model.q_joint_upper]
        )
        v_lim = np.concatenate(
            [[BASE_LIN_VEL_BOUND] * 3, [BASE_ANG_VEL_BOUND] * 3, model.v_joint_limit]
        )
    else:
        q_lb, q_ub = model.q_joint_lower, model.q_joint_upper
        v_lim = model.v_joint_limit
    for k in range(layout.M):
        lb[layout.q_idx(k)] = q_lb
        ub[layout.q_idx(k)] = q_ub
        lb[layout.v_idx(k)] = -v_lim
        ub[layout.v_idx(k)] = v_lim
    for k in range(layout.N):
        lb[layout.tau_idx(k)] = model.tau_lower
        ub[layout.tau_idx(k)] = model.tau_upper
    if layout.robust:
        for k in range(layout.N):
            lb[layout.rho_idx(k)] = 0.0
    return lb, ub


def _defect_block(model, scenario, layout, k):
    n_q, n_v, n_j, n_s = layout.n_q, layout.n_v, layout.n_j, layout.n_s
    h = MeshGrid(layout.M, scenario.duration_s).h
    gravity = scenario.gravity
    cols = np.concatenate(
        [
            layout.q_idx(k), layout.v_idx(k), layout.tau_idx(k), layout.lam_idx(k),
            layout.q_idx(k + 1), layout.v_idx(k + 1),
        ]
    )
    dim = n_q + n_v
    n_state = n_q + n_v
    n_ctrl = n_j + n_s

    def split(xl):
        q = xl[:n_q]
        v = xl[n_q : n_q + n_v]
        tau = xl[n_state : n_state + n_j]
        lam = xl[n_state + n_j : n_state + n_ctrl]
        qn = xl[n_state + n_ctrl : n_state + n_ctrl + n_q]
        vn = xl[n_state + n_ctrl + n_q :]
        return q, v, tau, lam, qn, vn

    def fun(xl):
        q, v, tau, lam, qn, vn = split(xl)
        qdot, vdot = dyn.state_derivative(model, q, v, tau, lam if n_s else None, gravity)
        return np.concatenate([qn - q - h * qdot, vn - v - h * vdot])

    def fdot(xl):
        q, v, tau, lam, qn, vn = split(xl)
        qdot, vdot = dyn.state_derivative(model, q, v, tau, lam if n_s else None, gravity)
        return np.concatenate([qdot, vdot])

    def jac(xl):
        xl = np.asarray(xl, dtype=float)
        J = np.zeros((dim, xl.size))
        # identity w.r.t. the next state
        J[:, n_state + n_ctrl :] = np.eye(n_state)
        # exact linear maps for the controls: d vdot = M^-1 [S^T  J_s^T]
        q, v, tau, lam, _, _ = split(xl)
        M = dyn.mass_matrix(model, q)
        rhs = np.zeros((n_v, n_ctrl))
        base = 6 if model.floating_base else 0
        rhs[base:, :n_j] = np.eye(n_j)
        if n_s:
            rhs[:, n_j:] = dyn.support_jacobian(model, q).T
        dvdot = np.linalg.solve(M, rhs)
        J[n_q:, n_state : n_state + n_ctrl] = -h * dvdot
        # complex step through the state dependence
        for j in range(n_state):
            xc = xl.astype(complex)
            xc[j] += 1j * _CS_STEP
            col = np.imag(fdot(xc)) / _CS_STEP
            J[:, j] -= h * col
            J[j, j] -= 1.0
        return J

    return ConstraintBlock(f"defect[{k}]", "eq", dim, cols, fun, jac)


def _feet_block(model, scenario, layout, k):
    anchors = scenario.anchors
    n_c = model.n_c
    cols = layout.q_idx(k)

    def fun(q):
        return np.concatenate(
            [dyn.forward_kinematics(model, q, i) - anchors[i] for i in range(n_c)]
        )

    def jac(q):
        return complex_step_jacobian(fun, np.asarray(q, dtype=float), 3 * n_c)

    return ConstraintBlock(f"feet[{k}]", "eq", 3 * n_c, cols, fun, jac)


def _task_block(model, layout, k, waypoint, label):
    cols = layout.q_idx(k)

    def fun(q):
        return gripper_residuals(model, q, waypoint)

    def jac(q):
        return complex_step_jacobian(fun, np.asarray(q, dtype=float), 5)

    return ConstraintBlock(f"task[{label}]", "eq", 5, cols, fun, jac)


def _friction_block(model, layout, k):
    rows = []
    for c in model.contacts:
        A, b = contact_polytope_rows(c)
        rows.append((A, b))
    A_full = np.zeros((5 * model.n_c, model.n_s))
    b_full = np.zeros(5 * model.n_c)
    for i, (A, b) in enumerate(rows):
        A_full[5 * i : 5 * i + 5, 3 * i : 3 * i + 3] = A
        b_full[5 * i : 5 * i + 5] = b
    cols = layout.lam_idx(k)

    def fun(lam):
        return A_full @ lam - b_full

    def jac(lam):
        return A_full.copy()

    return ConstraintBlock(f"friction[{k}]", "ineq", 5 * model.n_c, cols, fun, jac)


def _vfix_block(layout):
    cols = np.concatenate([layout.v_idx(0), layout.v_idx(layout.M - 1)])

    def fun(xl):
        return np.asarray(xl).copy()

    def jac(xl):
        return np.eye(len(cols))

    return ConstraintBlock("vfix", "eq", len(cols), cols, fun, jac)


def _objective(layout, tag):
    if tag == "G1":
        return None
    if tag == "G2":
        idx = np.concatenate([layout.tau_idx(k) for k in range(layout.N)])

        def fun(x):
            return float(x[idx] @ x[idx])

        def grad(x):
            g = np.zeros(layout.size)
            g[idx] = 2.0 * x[idx]
            return g

        def hess(x):
            d = np.zeros(layout.size)
            d[idx] = 2.0
            return sp.diags(d).tocsc()

        return Objective(fun, grad, hess)
    raise ValueError(f"unknown objective {tag!r}")


def build_problem(model, scenario, objective=None):
    """Nominal transcription: bounds, zero boundary velocities, friction
    pyramids, Euler defects, stationary feet, and the two task knots."""
    tag = objective or scenario.objective
    if tag == "G3":
        from .robustness import extend_problem

        nominal, _ = build_problem(model, scenario, objective="G1")
        robust = extend_problem(nominal, model, scenario)
        return robust, robust.meta["layout"]

    layout = DecisionLayout(model, scenario.mesh_points, robust=False)
    lb, ub = _variable_bounds(model, layout)
    blocks = [_vfix_block(layout)]
    for k in range(layout.N):
        blocks.append(_defect_block(model, scenario, layout, k))
    if model.n_c:
        for k in range(layout.M):
            blocks.append(_feet_block(model, scenario, layout, k))
        for k in range(layout.N):
            blocks.append(_friction_block(model, layout, k))
    blocks.append(_task_block(model, layout, 0, scenario.pick, "pick"))
    blocks.append(_task_block(model, layout, layout.M - 1, scenario.place, "place"))

    problem = NlpProblem(
        layout.size, lb, ub, _objective(layout, tag), blocks,
        meta={"layout": layout, "scenario": scenario, "model": model, "objective": tag},
    )
    return problem, layout


def default_seed(model, scenario, layout=None):
    """Constant standing pose, zero velocities, static torques from the
    joint rows of gravity compensation, equal weight share along normals."""
    layout = layout or DecisionLayout(model, scenario.mesh_points)
    if model.floating_base:
        q0 = np.concatenate(
            [scenario.seed_base_xyz, scenario.seed_base_mrp, scenario.seed_q_joints]
        )
    else:
        q0 = scenario.seed_q_joints.copy()
    v0 = np.zeros(model.n_v)
    td = dyn.tree_data(model)
    weight = float(td.mass.sum() * np.linalg.norm(scenario.gravity))
    lam0 = np.zeros(model.n_s)
    for i, c in enumerate(model.contacts):
        lam0[3 * i : 3 * i + 3] = (weight / max(model.n_c, 1)) * c.normal
    h_vec = dyn.bias_forces(model, q0, v0, scenario.gravity)
    rhs = h_vec.copy()
    if model.n_s:
        rhs -= dyn.support_jacobian(model, q0).T @ lam0
    base = 6 if model.floating_base else 0
    tau0 = np.clip(rhs[base:], model.tau_lower, model.tau_upper)
    q = np.tile(q0, (layout.M, 1))
    v = np.tile(v0, (layout.M, 1))
    tau = np.tile(tau0, (layout.N, 1))
    lam = np.tile(lam0, (layout.N, 1))
    return layout.pack(q, v, tau, lam)
