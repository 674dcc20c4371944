"""Primal-dual interior-point solver for sparse nonlinear programs.

Slack variables turn inequalities into equalities, bounds are handled with
log barriers, and damped Newton steps are taken on the primal-dual barrier
KKT system (monotone barrier reduction, fraction-to-boundary 0.995, l1
merit line search with a model-based penalty parameter and one
second-order correction on rejection).  Curvature comes from the objective
Hessian plus any block-provided Lagrangian contributions, with an
inertia-correcting diagonal shift escalated whenever a factorization
fails, a step is not a descent direction, or the dual step explodes.

Contract: on status "converged" the returned point satisfies
max constraint violation <= tol_feas and projected-KKT stationarity
<= tol_opt, both in the infinity norm.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

_FTB = 0.995  # fraction-to-boundary
_DELTA0 = 1e-8
_KAPPA_SIGMA = 1e10
_Y_HUGE = 1e8


@dataclass
class SolverOptions:
    tol_feas: float = 1e-6
    tol_opt: float = 1e-4
    max_iter: int = 500
    barrier_mu0: float = 0.1
    seed: int = 0
    mu_min: float = 1e-11
    delta_min: float = 0.0  # Levenberg floor on the primal diagonal
    verbose: bool = False


@dataclass
class SolveReport:
    status: str  # converged | max-iter | infeasible-detected | numerical-failure
    iterations: int
    violation: float
    stationarity: float
    objective: float
    wall_time_s: float
    message: str = ""


def _push_interior(x, lb, ub, k=1e-2):
    x = np.clip(x, lb, ub).astype(float)
    fin_l = np.isfinite(lb)
    fin_u = np.isfinite(ub)
    with np.errstate(invalid="ignore"):
        pad_l = np.where(
            fin_l & fin_u,
            np.minimum(k * np.maximum(1.0, np.abs(lb)), k * (ub - lb)),
            k * np.maximum(1.0, np.abs(lb)),
        )
        pad_u = np.where(
            fin_l & fin_u,
            np.minimum(k * np.maximum(1.0, np.abs(ub)), k * (ub - lb)),
            k * np.maximum(1.0, np.abs(ub)),
        )
        x = np.where(fin_l, np.maximum(x, np.where(fin_l, lb + pad_l, 0.0)), x)
        x = np.where(fin_u, np.minimum(x, np.where(fin_u, ub - pad_u, 0.0)), x)
    return x


def _max_step(v, dv, tau):
    """Largest alpha in (0, 1] with v + alpha dv >= (1 - tau) v (v > 0)."""
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, (-tau * v[neg] / dv[neg]).min()))


def solve(problem, x0, opts=None):
    """Minimize the problem from x0; returns (x, SolveReport)."""
    opts = opts or SolverOptions()
    t_start = time.perf_counter()
    n = problem.n
    lb, ub = problem.lower, problem.upper
    feasibility_only = problem.objective is None
    obj = problem.objective

    def f_of(x):
        if obj is None:
            return 0.0
        v = float(obj.fun(x))
        if not np.isfinite(v):
            raise FloatingPointError("objective returned a non-finite value")
        return v

    x = _push_interior(np.asarray(x0, dtype=float), lb, ub)
    try:
        f = f_of(x)
        c_eq, c_in = problem.eval_block_values(x)
    except FloatingPointError as e:
        return x, SolveReport("numerical-failure", 0, np.inf, np.inf, np.nan, 0.0, str(e))

    mE, mI = c_eq.size, c_in.size
    mu = float(opts.barrier_mu0)
    s = np.maximum(-c_in, 1e-3)
    yE = np.zeros(mE)
    yI = np.minimum(mu / s, 1e4)
    fin_l = np.isfinite(lb)
    fin_u = np.isfinite(ub)
    with np.errstate(invalid="ignore", divide="ignore"):
        zL = np.where(fin_l, np.clip(mu / np.maximum(x - lb, 1e-8), 1e-8, 1e4), 0.0)
        zU = np.where(fin_u, np.clip(mu / np.maximum(ub - x, 1e-8), 1e-8, 1e4), 0.0)

    delta = 0.0
    delta_c = 1e-8
    nu = 1e-4
    stalls = 0
    best = (np.inf, x.copy())
    status, message = "max-iter", ""
    it = 0
    viol = np.inf
    stat_err = np.inf
    dbg_dx = dbg_alpha = 0.0

    eq_off, in_off = {}, {}
    re_ = ri = 0
    for b in problem.blocks:
        if b.kind == "eq":
            eq_off[id(b)] = re_
            re_ += b.dim
        else:
            in_off[id(b)] = ri
            ri += b.dim

    def y_by_block():
        out = []
        for b in problem.blocks:
            if b.kind == "eq":
                off = eq_off[id(b)]
                out.append(yE[off : off + b.dim])
            else:
                off = in_off[id(b)]
                out.append(yI[off : off + b.dim])
        return out

    def barrier_value(x_, s_):
        val = 0.0
        if fin_l.any():
            g_ = (x_ - lb)[fin_l]
            if np.any(g_ <= 0):
                return np.inf
            val -= mu * np.log(g_).sum()
        if fin_u.any():
            g_ = (ub - x_)[fin_u]
            if np.any(g_ <= 0):
                return np.inf
            val -= mu * np.log(g_).sum()
        if s_.size:
            if np.any(s_ <= 0):
                return np.inf
            val -= mu * np.log(s_).sum()
        return val

    for it in range(1, opts.max_iter + 1):
        g = np.asarray(obj.grad(x), dtype=float) if obj is not None else np.zeros(n)
        try:
            JE, JI = problem.eval_jacobians(x)
        except (FloatingPointError, ValueError) as e:
            status, message = "numerical-failure", str(e)
            break

        r_stat = g.copy()
        if mE:
            r_stat += JE.T @ yE
        if mI:
            r_stat += JI.T @ yI
        r_stat -= zL
        r_stat += zU

        viol = 0.0
        if mE:
            viol = max(viol, float(np.abs(c_eq).max()))
        if mI:
            viol = max(viol, float(np.maximum(c_in, 0.0).max()))

        comp0 = 0.0
        with np.errstate(invalid="ignore"):
            if fin_l.any():
                comp0 = max(comp0, float(np.abs(((x - lb) * zL)[fin_l]).max()))
            if fin_u.any():
                comp0 = max(comp0, float(np.abs(((ub - x) * zU)[fin_u]).max()))
        if mI:
            comp0 = max(comp0, float(np.abs(s * yI).max()))
        stat_err = max(float(np.abs(r_stat).max(initial=0.0)), comp0)

        if viol < best[0]:
            best = (viol, x.copy())

        if opts.verbose:
            print(
                f"  it {it:3d}  mu={mu:.1e}  f={f: .6e}  viol={viol:.2e}"
                f"  stat={stat_err:.2e}  nu={nu:.1e}  delta={delta:.1e}"
                f"  |dx|={dbg_dx:.1e}  a={dbg_alpha:.1e}"
            )

        if viol <= opts.tol_feas and (feasibility_only or stat_err <= opts.tol_opt):
            status = "converged"
            if feasibility_only:
                stat_err = 0.0  # any feasible point is a KKT point of f == 0
            break

        # barrier subproblem error drives the monotone mu reduction
        e_mu = float(np.abs(r_stat).max(initial=0.0))
        if mE:
            e_mu = max(e_mu, float(np.abs(c_eq).max()))
        if mI:
            e_mu = max(e_mu, float(np.abs(c_in + s).max()))
            e_mu = max(e_mu, float(np.abs(s * yI - mu).max()))
        with np.errstate(invalid="ignore"):
            if fin_l.any():
                e_mu = max(e_mu, float(np.abs(((x - lb) * zL)[fin_l] - mu).max()))
            if fin_u.any():
                e_mu = max(e_mu, float(np.abs(((ub - x) * zU)[fin_u] - mu).max()))
        if e_mu <= 10.0 * mu and mu > opts.mu_min:
            mu = max(mu / 5.0, opts.mu_min)

        with np.errstate(invalid="ignore", divide="ignore"):
            DL = np.where(fin_l, zL / np.maximum(x - lb, 1e-300), 0.0)
            DU = np.where(fin_u, zU / np.maximum(ub - x, 1e-300), 0.0)
            bgrad = -np.where(fin_l, mu / np.maximum(x - lb, 1e-300), 0.0)
            bgrad += np.where(fin_u, mu / np.maximum(ub - x, 1e-300), 0.0)

        r1 = -(g + bgrad)
        if mE:
            r1 -= JE.T @ yE
        if mI:
            r1 -= JI.T @ yI
        r2 = -c_eq
        r3 = -c_in - mu / yI if mI else np.zeros(0)
        rhs = np.concatenate([r1, r2, r3])

        try:
            H = problem.lagrangian_hessian(x, y_by_block())
        except (FloatingPointError, ValueError) as e:
            status, message = "numerical-failure", str(e)
            break

        # inertia/robustness loop: factor, check step quality, escalate
        accepted = False
        dx = dyE = dyI = ds = None
        dphi = 0.0
        pen0 = (np.abs(c_eq).sum() if mE else 0.0) + (
            np.abs(c_in + s).sum() if mI else 0.0
        )
        for attempt in range(16):
            W = (H + sp.diags(DL + DU + max(delta, opts.delta_min))).tocsc()
            rows = [[W, JE.T if mE else None, JI.T if mI else None]]
            if mE:
                rows.append([JE, sp.diags(np.full(mE, -delta_c)), None])
            if mI:
                rows.append([JI, None, sp.diags(-(s / yI) - delta_c)])
            KKT = sp.bmat(rows, format="csc")
            try:
                step = splu(KKT).solve(rhs)
            except RuntimeError:
                delta = max(delta * 10.0, _DELTA0)
                continue
            if not np.all(np.isfinite(step)):
                delta = max(delta * 10.0, _DELTA0)
                continue
            dx = step[:n]
            dyE = step[n : n + mE]
            dyI = step[n + mE :]
            ds = (-(c_in + s) - JI @ dx) if mI else np.zeros(0)

            y_next_inf = 0.0
            if mE:
                y_next_inf = max(y_next_inf, float(np.abs(yE + dyE).max(initial=0.0)))
            if mI:
                y_next_inf = max(y_next_inf, float(np.abs(yI + dyI).max(initial=0.0)))
            if y_next_inf > _Y_HUGE:
                delta_c = min(delta_c * 100.0, 1e-2)
                delta = max(delta * 10.0, _DELTA0)
                continue

            # directional derivative of the merit function (model-based nu)
            d0 = float(g @ dx)
            with np.errstate(invalid="ignore"):
                d0 -= float((mu * dx / np.maximum(x - lb, 1e-300))[fin_l].sum())
                d0 += float((mu * dx / np.maximum(ub - x, 1e-300))[fin_u].sum())
            if mI:
                d0 -= float((mu * ds / s).sum())
            if pen0 > 1e-14:
                nu_req = d0 / (0.5 * pen0)  # guarantees dphi <= -0.5 nu pen0
                nu = min(max(nu_req * 1.1, 1e-4, 0.3 * nu), 1e9)
            dphi = d0 - nu * pen0
            if dphi < 0.0 or pen0 <= 1e-14:
                accepted = True
                break
            delta = max(delta * 10.0, _DELTA0)
        if not accepted:
            status, message = "numerical-failure", "could not obtain a descent direction"
            break

        # fraction-to-boundary caps
        a_pri = 1.0
        if mI:
            a_pri = min(a_pri, _max_step(s, ds, _FTB))
        if fin_l.any():
            a_pri = min(a_pri, _max_step((x - lb)[fin_l], dx[fin_l], _FTB))
        if fin_u.any():
            a_pri = min(a_pri, _max_step((ub - x)[fin_u], -dx[fin_u], _FTB))
        with np.errstate(invalid="ignore", divide="ignore"):
            dzL = np.where(fin_l, mu / np.maximum(x - lb, 1e-300) - zL - DL * dx, 0.0)
            dzU = np.where(fin_u, mu / np.maximum(ub - x, 1e-300) - zU + DU * dx, 0.0)
        a_dual = 1.0
        if fin_l.any():
            a_dual = min(a_dual, _max_step(zL[fin_l], dzL[fin_l], _FTB))
        if fin_u.any():
            a_dual = min(a_dual, _max_step(zU[fin_u], dzU[fin_u], _FTB))
        if mI:
            a_dual = min(a_dual, _max_step(yI, dyI, _FTB))

        phi0 = f + barrier_value(x, s) + nu * pen0
        alpha = a_pri
        ok = False
        soc_done = False
        x_t = x
        s_t = s
        f_t, c_eq_t, c_in_t = f, c_eq, c_in
        for _ in range(40):
            x_t = x + alpha * dx
            s_t = s + alpha * ds if mI else s
            try:
                f_t = f_of(x_t)
                c_eq_t, c_in_t = problem.eval_block_values(x_t)
            except FloatingPointError:
                alpha *= 0.5
                continue
            pen_t = (np.abs(c_eq_t).sum() if mE else 0.0) + (
                np.abs(c_in_t + s_t).sum() if mI else 0.0
            )
            phi_t = f_t + barrier_value(x_t, s_t) + nu * pen_t
            if phi_t <= phi0 + 1e-4 * alpha * dphi:
                ok = True
                break
            if not soc_done and alpha == a_pri and pen_t > pen0:
                # second-order correction: retarget the constraints at the
                # trial point with the same KKT factorization structure
                soc_done = True
                rhs_soc = rhs.copy()
                if mE:
                    rhs_soc[n : n + mE] = -c_eq_t
                if mI:
                    rhs_soc[n + mE :] = -c_in_t - mu / yI
                try:
                    step_soc = splu(KKT).solve(rhs_soc)
                except RuntimeError:
                    alpha *= 0.5
                    continue
                dx_soc = step_soc[:n]
                ds_soc = (-(c_in_t + s) - JI @ dx_soc) if mI else np.zeros(0)
                a_soc = a_pri
                if mI:
                    a_soc = min(a_soc, _max_step(s, ds_soc, _FTB))
                if fin_l.any():
                    a_soc = min(a_soc, _max_step((x - lb)[fin_l], dx_soc[fin_l], _FTB))
                if fin_u.any():
                    a_soc = min(a_soc, _max_step((ub - x)[fin_u], -dx_soc[fin_u], _FTB))
                try:
                    x_s = x + a_soc * dx_soc
                    s_s = s + a_soc * ds_soc if mI else s
                    f_s = f_of(x_s)
                    c_eq_s, c_in_s = problem.eval_block_values(x_s)
                    pen_s = (np.abs(c_eq_s).sum() if mE else 0.0) + (
                        np.abs(c_in_s + s_s).sum() if mI else 0.0
                    )
                    phi_s = f_s + barrier_value(x_s, s_s) + nu * pen_s
                    if phi_s <= phi0 + 1e-4 * a_soc * dphi:
                        x_t, s_t = x_s, s_s
                        f_t, c_eq_t, c_in_t = f_s, c_eq_s, c_in_s
                        alpha = a_soc
                        ok = True
                        break
                except FloatingPointError:
                    pass
                alpha *= 0.5
                continue
            alpha *= 0.5
        dbg_dx = float(np.abs(dx).max(initial=0.0))
        dbg_alpha = alpha
        if not ok:
            stalls += 1
            delta = max(delta * 10.0, _DELTA0)
            if mI:
                s = np.maximum(s, -c_in)  # slack reset absorbs drift
            if stalls > 8:
                status, message = "numerical-failure", "line search stalled"
                break
            continue
        stalls = 0

        x = x_t
        f, c_eq, c_in = f_t, c_eq_t, c_in_t
        if mI:
            s = s_t
            yI = np.maximum(yI + alpha * dyI, 1e-14)
        if mE:
            yE = yE + alpha * dyE
        zL = np.where(fin_l, zL + a_dual * dzL, 0.0)
        zU = np.where(fin_u, zU + a_dual * dzU, 0.0)
        # keep bound duals sigma-bounded relative to mu (IPOPT safeguard)
        with np.errstate(invalid="ignore", divide="ignore"):
            gl = np.maximum(x - lb, 1e-300)
            gu = np.maximum(ub - x, 1e-300)
            zL = np.where(
                fin_l, np.clip(zL, mu / (_KAPPA_SIGMA * gl), _KAPPA_SIGMA * mu / gl), 0.0
            )
            zU = np.where(
                fin_u, np.clip(zU, mu / (_KAPPA_SIGMA * gu), _KAPPA_SIGMA * mu / gu), 0.0
            )
        delta = 0.0 if delta <= _DELTA0 else delta / 5.0

    wall = time.perf_counter() - t_start
    if status == "converged":
        return x, SolveReport(
            "converged", it, viol, 0.0 if feasibility_only else stat_err, f, wall, message
        )
    viol_best = problem.constraint_violation(best[1])
    try:
        f_best = f_of(best[1])
    except FloatingPointError:
        f_best = np.nan
    return best[1], SolveReport(status, it, viol_best, np.inf, f_best, wall, message)
