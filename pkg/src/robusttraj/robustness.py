"""Smallest-unrejectable-force (SUF) machinery.

The disturbance response is restricted to affine gains on the contact
forces; the torque gains are eliminated through the actuated rows of the
equations of motion, leaving the floating-base wrench balance as the only
explicit equality.  Conic rows are smoothed with sqrt(x.x + eps^2), which
never overstates robustness (smooth_norm >= ||x||).
"""

import numpy as np

from . import dynamics as dyn
from .nlp import ConstraintBlock, NlpProblem, Objective, SolverOptions, solve
from .transcription import (
    DecisionLayout,
    _variable_bounds,
    complex_step_jacobian,
    contact_polytope_rows,
    torque_polytope_rows,
)

NORM_EPS = 1e-6  # [N] conservative smoothing of the conic rows


def smooth_norm(x):
    """sqrt(x.x + eps^2); analytic everywhere, upper bound of the 2-norm."""
    x = np.asarray(x)
    return np.sqrt(x @ x + NORM_EPS**2)


class PolytopeRows:
    """Half-space descriptions of the admissible torques / contact forces."""

    def __init__(self, model):
        self.A_tau, self.b_tau = torque_polytope_rows(model)
        n_c, n_s = model.n_c, model.n_s
        self.A_lam = np.zeros((5 * n_c, n_s))
        self.b_lam = np.zeros(5 * n_c)
        for i, c in enumerate(model.contacts):
            A, b = contact_polytope_rows(c)
            self.A_lam[5 * i : 5 * i + 5, 3 * i : 3 * i + 3] = A
            self.b_lam[5 * i : 5 * i + 5] = b


def ktau_implicit(J_s, J_e, kbar_lam, rho, n_base=6):
    """Torque gains eliminated via the actuated rows: no inversion needed."""
    J_e = np.asarray(J_e)
    Kt = -(np.asarray(J_e)[:, n_base:].T * rho).astype(np.result_type(J_e, np.asarray(rho)))
    if J_s is not None and np.asarray(J_s).size:
        Kt = Kt - np.asarray(J_s)[:, n_base:].T @ np.asarray(kbar_lam)
    return Kt


def base_wrench_residual(J_s, J_e, kbar_lam, rho, n_base=6):
    """Floating-base block of the gain balance; must vanish at a solution."""
    J_e = np.asarray(J_e)
    res = (J_e[:, :n_base].T * rho).astype(np.result_type(J_e, np.asarray(rho)))
    if J_s is not None and np.asarray(J_s).size:
        res = res + np.asarray(J_s)[:, :n_base].T @ np.asarray(kbar_lam)
    return res


def torque_suf_residuals(tau, J_s, J_e, kbar_lam, rho, tau_lower, tau_upper, n_base=6):
    """2 n_j inequality residuals: +/- torque rows with the disturbance
    amplification term; <= 0 keeps the disturbed torque admissible."""
    Kt = ktau_implicit(J_s, J_e, kbar_lam, rho, n_base)
    n_j = Kt.shape[0]
    dtype = np.result_type(np.asarray(tau), Kt)
    out = np.zeros(2 * n_j, dtype=dtype)
    for j in range(n_j):
        amp = smooth_norm(Kt[j])
        out[j] = tau[j] + amp - tau_upper[j]
        out[n_j + j] = -tau[j] + amp + tau_lower[j]
    return out


def contact_suf_residuals(lam, kbar_lam, rows):
    """5 n_c inequality residuals over the contact polytope rows."""
    lam = np.asarray(lam)
    kbar_lam = np.asarray(kbar_lam)
    m = rows.A_lam.shape[0]
    dtype = np.result_type(lam, kbar_lam)
    out = np.zeros(m, dtype=dtype)
    for r in range(m):
        a = rows.A_lam[r]
        out[r] = a @ lam + smooth_norm(kbar_lam.T @ a) - rows.b_lam[r]
    return out


def _norm_curvature(g):
    """Hessian factor of smooth_norm at g: (I - w w^T) / n, PSD."""
    n = float(np.sqrt(g @ g + NORM_EPS**2))
    w = g / n
    return (np.eye(len(g)) - np.outer(w, w)) / n


def _suf_base_block(model, layout, k):
    n_q, n_s = layout.n_q, layout.n_s
    cols = np.concatenate([layout.q_idx(k), [layout.rho_idx(k)], layout.kbar_idx(k)])

    def split(xl):
        return xl[:n_q], xl[n_q], xl[n_q + 1 :].reshape(n_s, 3)

    def fun(xl):
        q, rho, kbar = split(xl)
        J_s, J_e = dyn.contact_jacobians(model, q)
        return base_wrench_residual(J_s, J_e, kbar, rho).reshape(-1)

    def jac(xl):
        xl = np.asarray(xl, dtype=float)
        q, rho, kbar = split(xl)
        J_s, J_e = dyn.contact_jacobians(model, q)
        J = np.zeros((18, xl.size))
        # linear in (rho, kbar) at fixed q
        Jst = J_s[:, :6].T  # (6, n_s)
        Jet = J_e[:, :6].T  # (6, 3)
        for i in range(6):
            for c in range(3):
                row = 3 * i + c
                J[row, n_q] = Jet[i, c]
                J[row, n_q + 1 + 3 * np.arange(n_s) + c] = Jst[i]
        # complex step through the Jacobians' q dependence
        for j in range(n_q):
            qc = q.astype(complex)
            qc[j] += 1j * 1e-200
            J_sc, J_ec = dyn.contact_jacobians(model, qc)
            col = base_wrench_residual(J_sc, J_ec, kbar, rho).reshape(-1)
            J[:, j] = np.imag(col) / 1e-200
        return J

    return ConstraintBlock(f"suf_base[{k}]", "eq", 18, cols, fun, jac)


def _suf_tau_block(model, layout, k):
    n_q, n_j, n_s = layout.n_q, layout.n_j, layout.n_s
    tau_lo, tau_hi = model.tau_lower, model.tau_upper
    n_base = 6 if model.floating_base else 0
    cols = np.concatenate(
        [layout.q_idx(k), layout.tau_idx(k), [layout.rho_idx(k)], layout.kbar_idx(k)]
    )
    i_tau = n_q
    i_rho = n_q + n_j
    i_kb = i_rho + 1

    def split(xl):
        return (
            xl[:n_q],
            xl[i_tau:i_rho],
            xl[i_rho],
            xl[i_kb:].reshape(n_s, 3),
        )

    def fun(xl):
        q, tau, rho, kbar = split(xl)
        J_s, J_e = dyn.contact_jacobians(model, q)
        return torque_suf_residuals(tau, J_s, J_e, kbar, rho, tau_lo, tau_hi, n_base)

    def jac(xl):
        xl = np.asarray(xl, dtype=float)
        q, tau, rho, kbar = split(xl)
        J_s, J_e = dyn.contact_jacobians(model, q)
        Kt = ktau_implicit(J_s, J_e, kbar, rho, n_base)
        J = np.zeros((2 * n_j, xl.size))
        for j in range(n_j):
            g = Kt[j]
            w = g / float(np.sqrt(g @ g + NORM_EPS**2))
            dn_drho = -w @ J_e[:, n_base + j]
            dn_dk = -np.outer(J_s[:, n_base + j], w) if n_s else None
            for row, sgn in ((j, 1.0), (n_j + j, -1.0)):
                J[row, i_tau + j] = sgn
                J[row, i_rho] = dn_drho
                if n_s:
                    J[row, i_kb:] = dn_dk.reshape(-1)
        # complex step through the q dependence of both Jacobians
        for jq in range(n_q):
            qc = q.astype(complex)
            qc[jq] += 1j * 1e-200
            J_sc, J_ec = dyn.contact_jacobians(model, qc)
            col = torque_suf_residuals(tau, J_sc, J_ec, kbar, rho, tau_lo, tau_hi, n_base)
            J[:, jq] = np.imag(col) / 1e-200
        return J

    def hess(xl, y):
        # Gauss-Newton curvature of the norm terms in (rho, kbar); exact at
        # fixed q, which carries the conic geometry the solver needs
        xl = np.asarray(xl, dtype=float)
        q, tau, rho, kbar = split(xl)
        J_s, J_e = dyn.contact_jacobians(model, q)
        Kt = ktau_implicit(J_s, J_e, kbar, rho, n_base)
        H = np.zeros((xl.size, xl.size))
        nloc = 1 + 3 * n_s
        for j in range(n_j):
            wgt = y[j] + y[n_j + j]
            if wgt == 0.0:
                continue
            # W maps (rho, kbar) -> g_j
            W = np.zeros((3, nloc))
            W[:, 0] = -J_e[:, n_base + j]
            if n_s:
                for c in range(3):
                    W[c, 1 + 3 * np.arange(n_s) + c] = -J_s[:, n_base + j]
            P = _norm_curvature(Kt[j])
            Hl = wgt * (W.T @ P @ W)
            H[i_rho:, i_rho:] += Hl
        return H

    return ConstraintBlock(f"suf_tau[{k}]", "ineq", 2 * n_j, cols, fun, jac, hess)


def _suf_cone_block(model, layout, k, rows):
    n_s = layout.n_s
    m = rows.A_lam.shape[0]
    cols = np.concatenate([layout.lam_idx(k), layout.kbar_idx(k)])

    def split(xl):
        return xl[:n_s], xl[n_s:].reshape(n_s, 3)

    def fun(xl):
        lam, kbar = split(xl)
        return contact_suf_residuals(lam, kbar, rows)

    def jac(xl):
        xl = np.asarray(xl, dtype=float)
        lam, kbar = split(xl)
        J = np.zeros((m, xl.size))
        for r in range(m):
            a = rows.A_lam[r]
            g = kbar.T @ a
            w = g / float(np.sqrt(g @ g + NORM_EPS**2))
            J[r, :n_s] = a
            J[r, n_s:] = np.outer(a, w).reshape(-1)
        return J

    def hess(xl, y):
        xl = np.asarray(xl, dtype=float)
        lam, kbar = split(xl)
        H = np.zeros((xl.size, xl.size))
        for r in range(m):
            if y[r] == 0.0:
                continue
            a = rows.A_lam[r]
            g = kbar.T @ a
            W = np.zeros((3, 3 * n_s))
            for c in range(3):
                W[c, 3 * np.arange(n_s) + c] = a
            P = _norm_curvature(g)
            H[n_s:, n_s:] += y[r] * (W.T @ P @ W)
        return H

    return ConstraintBlock(f"suf_cone[{k}]", "ineq", m, cols, fun, jac, hess)


def _g3_objective(layout):
    idx = np.array([layout.rho_idx(k) for k in range(layout.N)])

    def fun(x):
        return -float(x[idx].sum())

    def grad(x):
        g = np.zeros(layout.size)
        g[idx] = -1.0
        return g

    return Objective(fun, grad, None)


def extend_problem(nominal, model, scenario):
    """Robust NLP over the extended decision vector with the G3 objective;
    all nominal constraints are retained and the per-interval gain blocks
    are appended."""
    layout = DecisionLayout(model, scenario.mesh_points, robust=True)
    lb, ub = _variable_bounds(model, layout)
    rows = PolytopeRows(model)
    blocks = list(nominal.blocks)
    for k in range(layout.N):
        if model.floating_base:
            blocks.append(_suf_base_block(model, layout, k))
        blocks.append(_suf_tau_block(model, layout, k))
        if model.n_c:
            blocks.append(_suf_cone_block(model, layout, k, rows))
    meta = dict(nominal.meta)
    meta["layout"] = layout
    meta["objective"] = "G3"
    return NlpProblem(layout.size, lb, ub, _g3_objective(layout), blocks, meta=meta)


def _knot_suf_problem(model, q, tau, lam):
    """Small convex program over (rho, kbar) at a frozen knot."""
    n_s = model.n_s
    n_j = model.n_j
    n_base = 6 if model.floating_base else 0
    J_s, J_e = dyn.contact_jacobians(model, q)
    rows = PolytopeRows(model) if model.n_c else None
    n = 1 + 3 * n_s
    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    lb[0] = 0.0
    blocks = []

    if model.floating_base:
        def base_fun(xl):
            return base_wrench_residual(J_s, J_e, xl[1:].reshape(n_s, 3), xl[0], n_base).reshape(-1)

        def base_jac(xl):
            J = np.zeros((18, n))
            Jst = J_s[:, :6].T
            Jet = J_e[:, :6].T
            for i in range(6):
                for c in range(3):
                    J[3 * i + c, 0] = Jet[i, c]
                    J[3 * i + c, 1 + 3 * np.arange(n_s) + c] = Jst[i]
            return J

        blocks.append(ConstraintBlock("base", "eq", 18, np.arange(n), base_fun, base_jac))

    def tau_fun(xl):
        return torque_suf_residuals(
            tau, J_s, J_e, xl[1:].reshape(n_s, 3), xl[0],
            model.tau_lower, model.tau_upper, n_base,
        )

    def tau_jac(xl):
        Kt = ktau_implicit(J_s, J_e, xl[1:].reshape(n_s, 3), xl[0], n_base)
        J = np.zeros((2 * n_j, n))
        for j in range(n_j):
            w = Kt[j] / float(np.sqrt(Kt[j] @ Kt[j] + NORM_EPS**2))
            J[j, 0] = J[n_j + j, 0] = -w @ J_e[:, n_base + j]
            if n_s:
                dk = -np.outer(J_s[:, n_base + j], w).reshape(-1)
                J[j, 1:] = dk
                J[n_j + j, 1:] = dk
        return J

    def tau_hess(xl, y):
        Kt = ktau_implicit(J_s, J_e, xl[1:].reshape(n_s, 3), xl[0], n_base)
        H = np.zeros((n, n))
        for j in range(n_j):
            wgt = y[j] + y[n_j + j]
            if wgt == 0.0:
                continue
            W = np.zeros((3, n))
            W[:, 0] = -J_e[:, n_base + j]
            if n_s:
                for c in range(3):
                    W[c, 1 + 3 * np.arange(n_s) + c] = -J_s[:, n_base + j]
            H += wgt * (W.T @ _norm_curvature(Kt[j]) @ W)
        return H

    blocks.append(
        ConstraintBlock("tau_rows", "ineq", 2 * n_j, np.arange(n), tau_fun, tau_jac, tau_hess)
    )

    if model.n_c:
        m = rows.A_lam.shape[0]

        def cone_fun(xl):
            return contact_suf_residuals(lam, xl[1:].reshape(n_s, 3), rows)

        def cone_jac(xl):
            kbar = xl[1:].reshape(n_s, 3)
            J = np.zeros((m, n))
            for r in range(m):
                a = rows.A_lam[r]
                g = kbar.T @ a
                w = g / float(np.sqrt(g @ g + NORM_EPS**2))
                J[r, 1:] = np.outer(a, w).reshape(-1)
            return J

        def cone_hess(xl, y):
            kbar = xl[1:].reshape(n_s, 3)
            H = np.zeros((n, n))
            for r in range(m):
                if y[r] == 0.0:
                    continue
                a = rows.A_lam[r]
                W = np.zeros((3, n))
                for c in range(3):
                    W[c, 1 + 3 * np.arange(n_s) + c] = a
                H += y[r] * (W.T @ _norm_curvature(kbar.T @ a) @ W)
            return H

        blocks.append(ConstraintBlock("cone_rows", "ineq", m, np.arange(n), cone_fun, cone_jac, cone_hess))

    def obj_fun(x):
        return -float(x[0])

    def obj_grad(x):
        g = np.zeros(n)
        g[0] = -1.0
        return g

    return NlpProblem(n, lb, ub, Objective(obj_fun, obj_grad, None), blocks)


def solve_knot_suf(model, q, tau, lam, options=None):
    """(rho, kbar, report) for the per-knot SUF program at fixed (q, tau,
    lam).  Infeasible nominal rows (outside the cone floor or the torque
    box) yield rho = 0."""
    n_s = model.n_s
    rows = PolytopeRows(model) if model.n_c else None
    tol = 1e-7
    if np.any(tau > model.tau_upper + tol) or np.any(tau < model.tau_lower - tol):
        return 0.0, np.zeros((n_s, 3)), None
    if model.n_c and np.any(rows.A_lam @ lam - rows.b_lam > tol):
        return 0.0, np.zeros((n_s, 3)), None
    problem = _knot_suf_problem(model, q, tau, lam)
    opts = options or SolverOptions(
        tol_feas=1e-9, tol_opt=1e-8, max_iter=300, barrier_mu0=1.0
    )
    x0 = np.zeros(problem.n)
    x, rep = solve(problem, x0, opts)
    rho = float(max(x[0], 0.0))
    return rho, x[1:].reshape(n_s, 3), rep


def evaluate_suf_at_knot(model, q, v, tau, lam, options=None):
    """Reformulation SUF radius at one dynamically consistent knot; used to
    score trajectories produced under any objective.  ``v`` is part of the
    knot state but does not enter (no variation in accelerations)."""
    rho, _, _ = solve_knot_suf(model, q, tau, lam, options)
    return rho


def robust_warm_start(model, scenario, layout, xi_nominal):
    """Extend a nominal decision vector with per-knot optimal gains."""
    nominal_layout = DecisionLayout(model, scenario.mesh_points, robust=False)
    parts = nominal_layout.unpack(xi_nominal)
    xi = np.zeros(layout.size)
    xi[: nominal_layout.size] = xi_nominal[: nominal_layout.size]
    for k in range(layout.N):
        rho, kbar, _ = solve_knot_suf(model, parts["q"][k], parts["tau"][k], parts["lam"][k])
        xi[layout.rho_idx(k)] = rho
        xi[layout.kbar_idx(k)] = kbar.reshape(-1)
    return xi
