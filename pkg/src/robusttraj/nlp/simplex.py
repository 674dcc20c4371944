"""Dense two-phase simplex with Bland's rule.

Small and exact enough to serve as independent oracle machinery; optimality
is certified through the dual solution recovered from the final basis.
"""

from dataclasses import dataclass

import numpy as np

_PIV_TOL = 1e-10
_COST_TOL = 1e-9
_FEAS_TOL = 1e-9


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray = None
    fun: float = None
    dual_obj: float = None
    duality_gap: float = None


class _Infeasible(Exception):
    pass


class _Unbounded(Exception):
    pass


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _bland_iterate(T, basis, cost, ncols):
    """Optimize min cost over the tableau in place (Bland's rule)."""
    m = T.shape[0]
    while True:
        # reduced costs: c_j - c_B B^-1 A_j
        red = cost[:ncols] - cost[basis] @ T[:, :ncols]
        enter = -1
        for j in range(ncols):
            if red[j] < -_COST_TOL:
                enter = j
                break
        if enter < 0:
            return
        leave = -1
        best = np.inf
        for i in range(m):
            a = T[i, enter]
            if a > _PIV_TOL:
                ratio = T[i, -1] / a
                if ratio < best - 1e-12 or (
                    abs(ratio - best) <= 1e-12 and (leave < 0 or basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            raise _Unbounded
        _pivot(T, basis, leave, enter)


def _standard_form(A_ub, b_ub, A_eq, b_eq, c, bounds):
    """Rewrite with shifted/split variables so every variable is >= 0.

    Returns (A, b, cs, const, recover) with A u = b, u >= 0 after slacks are
    appended by the caller; ``recover(u)`` maps back to x-space.
    """
    n = len(c)
    if bounds is None:
        bounds = [(None, None)] * n
    cols = []  # (var index, sign, shift)
    extra_ub = []  # (col index in u-space, cap) for two-sided bounds
    for j, (lo, hi) in enumerate(bounds):
        if lo is not None:
            cols.append((j, 1.0, float(lo)))
            if hi is not None:
                extra_ub.append((len(cols) - 1, float(hi) - float(lo)))
        elif hi is not None:
            cols.append((j, -1.0, float(hi)))
        else:
            cols.append((j, 1.0, 0.0))
            cols.append((j, -1.0, 0.0))

    nu = len(cols)
    T_map = np.zeros((n, nu))
    t0 = np.zeros(n)
    for k, (j, sgn, shift) in enumerate(cols):
        T_map[j, k] = sgn
        t0[j] = shift
    # two-sided bounds already counted; assemble row data in u space
    A_ub_u = A_ub @ T_map if A_ub is not None and len(A_ub) else np.zeros((0, nu))
    b_ub_u = (
        np.asarray(b_ub, dtype=float) - A_ub @ t0
        if A_ub is not None and len(A_ub)
        else np.zeros(0)
    )
    if extra_ub:
        rows = np.zeros((len(extra_ub), nu))
        caps = np.zeros(len(extra_ub))
        for r, (k, cap) in enumerate(extra_ub):
            rows[r, k] = 1.0
            caps[r] = cap
        A_ub_u = np.vstack([A_ub_u, rows])
        b_ub_u = np.concatenate([b_ub_u, caps])
    A_eq_u = A_eq @ T_map if A_eq is not None and len(A_eq) else np.zeros((0, nu))
    b_eq_u = (
        np.asarray(b_eq, dtype=float) - A_eq @ t0
        if A_eq is not None and len(A_eq)
        else np.zeros(0)
    )
    c_u = np.asarray(c, dtype=float) @ T_map
    const = float(np.asarray(c, dtype=float) @ t0)

    def recover(u):
        return T_map @ u + t0

    return A_ub_u, b_ub_u, A_eq_u, b_eq_u, c_u, const, recover


def lp_solve(A_ub, b_ub, A_eq, b_eq, c, bounds):
    """Minimize c @ x subject to A_ub x <= b_ub, A_eq x = b_eq, and per
    variable (lower, upper) bounds (None = unbounded)."""
    c = np.asarray(c, dtype=float)
    A_ub = np.asarray(A_ub, dtype=float) if A_ub is not None else None
    A_eq = np.asarray(A_eq, dtype=float) if A_eq is not None else None
    A_ub_u, b_ub_u, A_eq_u, b_eq_u, c_u, const, recover = _standard_form(
        A_ub, b_ub, A_eq, b_eq, c, bounds
    )
    n_ub = len(b_ub_u)
    nu = c_u.shape[0]

    # slacks turn inequalities into equalities
    A = np.zeros((n_ub + len(b_eq_u), nu + n_ub))
    b = np.concatenate([b_ub_u, b_eq_u])
    if n_ub:
        A[:n_ub, :nu] = A_ub_u
        A[:n_ub, nu : nu + n_ub] = np.eye(n_ub)
    if len(b_eq_u):
        A[n_ub:, :nu] = A_eq_u
    cs = np.concatenate([c_u, np.zeros(n_ub)])

    m = A.shape[0]
    flip = b < 0
    A[flip] *= -1.0
    b = np.abs(b)
    n_real = A.shape[1]

    # phase 1: artificial basis
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = list(range(n_real, n_real + m))
    cost1 = np.concatenate([np.zeros(n_real), np.ones(m), [0.0]])
    try:
        _bland_iterate(T, basis, cost1[:-1], n_real + m)
    except _Unbounded:  # phase 1 is always bounded below by 0
        return LpResult(status="infeasible")
    phase1 = cost1[basis] @ T[:, -1]
    if phase1 > 1e-8 * (1.0 + np.abs(b).max(initial=0.0)):
        return LpResult(status="infeasible")

    # drive leftover artificials out of the basis (or drop redundant rows)
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= n_real:
            piv = -1
            for j in range(n_real):
                if abs(T[i, j]) > _PIV_TOL:
                    piv = j
                    break
            if piv >= 0:
                _pivot(T, basis, i, piv)
            else:
                keep[i] = False
    if not keep.all():
        T = T[keep]
        basis = [bv for bv, k in zip(basis, keep) if k]
        A = A[keep]
        b = b[keep]
        m = T.shape[0]

    # phase 2
    T = np.hstack([T[:, :n_real], T[:, -1:]])
    cost2 = np.concatenate([cs, [0.0]])
    basis = np.asarray(basis, dtype=np.intp)
    try:
        _bland_iterate(T, basis, cost2[:-1], n_real)
    except _Unbounded:
        return LpResult(status="unbounded")

    u = np.zeros(n_real)
    u[basis] = T[:, -1]
    x = recover(u[:nu])
    fun = float(cs @ u) + const

    # dual certificate from the final basis (on the sign-normalized system)
    B = A[:, basis]
    try:
        y = np.linalg.solve(B.T, cs[basis])
        dual = float(y @ b) + const
        gap = abs(fun - dual)
    except np.linalg.LinAlgError:
        dual, gap = None, None
    return LpResult(status="optimal", x=x, fun=fun, dual_obj=dual, duality_gap=gap)
