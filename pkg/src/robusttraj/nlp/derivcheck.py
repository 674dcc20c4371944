"""Finite-difference verification of the problem's analytic derivatives."""

from dataclasses import dataclass, field

import numpy as np

FLAG_TOL = 1e-5


@dataclass
class DerivReport:
    errors: dict = field(default_factory=dict)  # block name -> max relative error
    flagged: list = field(default_factory=list)

    @property
    def max_error(self):
        return max(self.errors.values()) if self.errors else 0.0

    def __str__(self):
        lines = [f"{name}: {err:.3e}" for name, err in sorted(self.errors.items())]
        if self.flagged:
            lines.append(f"FLAGGED (> {FLAG_TOL:g}): {', '.join(self.flagged)}")
        return "\n".join(lines)


def _central_jacobian(fun, x, dim):
    J = np.zeros((dim, x.size))
    for j in range(x.size):
        h = 1e-6 * (1.0 + abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, j] = (np.asarray(fun(xp)) - np.asarray(fun(xm))) / (2.0 * h)
    return J


def check_derivatives(problem, x, seed=0, max_cols=None):
    """Compare analytic block Jacobians (and the objective gradient) against
    central finite differences; blocks over FLAG_TOL relative error are
    flagged.  ``max_cols`` subsamples wide blocks (seeded, reproducible)."""
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    report = DerivReport()

    for b in problem.blocks:
        xl = x[b.cols].copy()
        J_an = np.asarray(b.jac(xl), dtype=float)
        if max_cols is not None and xl.size > max_cols:
            sub = np.sort(rng.choice(xl.size, size=max_cols, replace=False))
        else:
            sub = np.arange(xl.size)
        J_fd = np.zeros((b.dim, sub.size))
        for k, j in enumerate(sub):
            h = 1e-6 * (1.0 + abs(xl[j]))
            xp = xl.copy()
            xm = xl.copy()
            xp[j] += h
            xm[j] -= h
            J_fd[:, k] = (np.asarray(b.fun(xp)) - np.asarray(b.fun(xm))) / (2.0 * h)
        scale = 1.0 + np.abs(J_an).max(initial=0.0)
        err = float(np.abs(J_an[:, sub] - J_fd).max(initial=0.0) / scale)
        report.errors[b.name] = err
        if err > FLAG_TOL:
            report.flagged.append(b.name)

    if problem.objective is not None:
        g_an = np.asarray(problem.objective.grad(x), dtype=float)
        g_fd = _central_jacobian(lambda z: [problem.objective.fun(z)], x, 1)[0]
        scale = 1.0 + np.abs(g_an).max(initial=0.0)
        err = float(np.abs(g_an - g_fd).max(initial=0.0) / scale)
        report.errors["objective"] = err
        if err > FLAG_TOL:
            report.flagged.append("objective")
    return report


def verify_sparsity(problem, x, seed=0, trials=20):
    """Randomized probing that each block only responds to declared columns.

    Blocks receive only their declared slice, so this mostly guards the
    plumbing (column index bookkeeping) rather than the callbacks themselves.
    """
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    for b in problem.blocks:
        outside = np.setdiff1d(np.arange(problem.n), b.cols)
        if outside.size == 0:
            continue
        v0 = np.asarray(b.fun(x[b.cols]))
        for _ in range(trials):
            xp = x.copy()
            xp[rng.choice(outside)] += rng.normal()
            v1 = np.asarray(b.fun(xp[b.cols]))
            if not np.array_equal(v0, v1):
                return False, b.name
    return True, None
