import json
import numpy as np
from robusttraj.model import parse_model
from robusttraj import dynamics as dyn

rng = np.random.default_rng(0)

two_link = {
    "name": "twolink",
    "floating_base": True,
    "bodies": [
        {"name": "base", "parent_joint": None, "mass": 3.0, "com": [0.01, -0.02, 0.03],
         "inertia": [0.05, 0.001, -0.002, 0.06, 0.003, 0.07]},
        {"name": "l1", "parent_joint": "j1", "mass": 1.0, "com": [0.1, 0.0, 0.0],
         "inertia": [0.002, 0.0, 0.0, 0.01, 0.0, 0.01]},
        {"name": "l2", "parent_joint": "j2", "mass": 0.7, "com": [0.12, 0.01, 0.0],
         "inertia": [0.002, 0.0, 0.0, 0.008, 0.0, 0.008]},
    ],
    "joints": [
        {"name": "j1", "parent_body": "base", "child_body": "l1", "axis": [0, 1, 0],
         "origin_xyz": [0.2, 0.1, 0.05], "origin_rpy": [0.1, -0.2, 0.3],
         "q_limits": [-2, 2], "v_limit": 10, "tau_limit": 30},
        {"name": "j2", "parent_body": "l1", "child_body": "l2", "axis": [0, 0, 1],
         "origin_xyz": [0.25, 0.0, 0.0], "origin_rpy": [0, 0.15, 0],
         "q_limits": [-2, 2], "v_limit": 10, "tau_limit": 30},
    ],
    "contacts": [{"body": "l2", "offset": [0.3, 0.0, 0.0]}],
    "end_effector": {"body": "l2", "offset": [0.3, 0.0, 0.0], "axis": [1, 0, 0]},
}
m = parse_model(json.dumps(two_link))
print("n_j", m.n_j, "n_v", m.n_v, "n_c", m.n_c)

# --- MRP: Rdot = R skew(omega) consistency
psi = rng.normal(size=3) * 0.4
om = rng.normal(size=3)
eps = 1e-7
psidot = dyn.mrp_rates(psi, om)
R0 = dyn.mrp_to_rotation(psi - eps * psidot)
R1 = dyn.mrp_to_rotation(psi + eps * psidot)
Rdot_fd = (R1 - R0) / (2 * eps)
R = dyn.mrp_to_rotation(psi)
sk = np.array([[0, -om[2], om[1]], [om[2], 0, -om[0]], [-om[1], om[0], 0]])
print("mrp kinematics err:", np.abs(Rdot_fd - R @ sk).max())

# --- rotation_to_mrp roundtrip
print("mrp roundtrip err:", np.abs(dyn.rotation_to_mrp(R) - psi).max())

# --- M v̇ + h == RNEA(v̇)
q = np.concatenate([rng.normal(size=3), rng.normal(size=3) * 0.3, rng.normal(size=2)])
v = rng.normal(size=m.n_v)
vd = rng.normal(size=m.n_v)
M = dyn.mass_matrix(m, q)
h = dyn.bias_forces(m, q, v)
idv = dyn.inverse_dynamics(m, q, v, vd)
print("M symm:", np.abs(M - M.T).max(), "eig min:", np.linalg.eigvalsh(M).min())
print("Mvdot+h vs RNEA:", np.abs(M @ vd + h - idv).max() / (1 + np.abs(idv).max()))

# --- point Jacobian vs finite differences through q ⊞ eps*v
def boxplus(q, v, eps):
    qd = dyn.position_rates(m, q, v)
    return q + eps * qd

for point in [0, "ee"]:
    J = dyn.point_jacobian(m, q, point)
    f0 = dyn.forward_kinematics(m, boxplus(q, v, -eps), point)
    f1 = dyn.forward_kinematics(m, boxplus(q, v, +eps), point)
    print(f"J({point}) fd err:", np.abs((f1 - f0) / (2 * eps) - J @ v).max())

# --- energy balance: dE/dt == v^T (S^T tau + J_s^T lam)
tau = rng.normal(size=m.n_j)
lam = rng.normal(size=m.n_s)

def energy(q, v):
    M = dyn.mass_matrix(m, q)
    coms = dyn.body_com_positions(m, q)
    td = dyn.tree_data(m)
    U = -sum(td.mass[i] * (dyn.GRAVITY @ coms[i]) for i in range(td.n_b))
    return 0.5 * v @ M @ v + U

def flow(q, v, dt):
    qd, vd = dyn.state_derivative(m, q, v, tau, lam)
    return q + dt * qd, v + dt * vd

dt = 1e-6
qm, vm = flow(q, v, -dt)
qp, vp = flow(q, v, +dt)
dE = (energy(qp, vp) - energy(qm, vm)) / (2 * dt)
Q = dyn.apply_actuation(m, tau) + dyn.support_jacobian(m, q).T @ lam
print("energy rate err:", abs(dE - v @ Q) / (1 + abs(v @ Q)))

# --- complex-step sanity: d fk / d q[0] via complex == fd
qc = q.astype(complex)
qc[4] += 1e-200j
g_cs = dyn.forward_kinematics(m, qc, "ee").imag / 1e-200
f0 = dyn.forward_kinematics(m, q - eps * np.eye(m.n_q)[4], "ee")
f1 = dyn.forward_kinematics(m, q + eps * np.eye(m.n_q)[4], "ee")
print("complex-step vs fd:", np.abs(g_cs - (f1 - f0) / (2 * eps)).max())

# --- mass matrix vs unit-acceleration inverse dynamics
h0 = dyn.bias_forces(m, q, v * 0)
Mcol = np.column_stack([
    dyn.inverse_dynamics(m, q, v * 0, e) - h0 for e in np.eye(m.n_v)
])
print("CRBA vs unit-accel RNEA:", np.abs(M - Mcol).max() / (1 + np.abs(M).max()))
