"""Sparse constrained NLP container.

A problem is a variable box plus a list of constraint blocks.  Each block is
a pure function of the variables it declares in ``cols`` (declared sparsity
is therefore structural: a block cannot read undeclared variables), returns
its residual vector and a dense local Jacobian, and may expose a local
Lagrangian-Hessian contribution for curvature-carrying rows.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass
class ConstraintBlock:
    name: str
    kind: str  # "eq" (c = 0) or "ineq" (c <= 0)
    dim: int
    cols: np.ndarray
    fun: callable  # fun(x_local) -> (dim,)
    jac: callable  # jac(x_local) -> (dim, len(cols))
    hess: callable = None  # hess(x_local, y_block) -> (ncols, ncols), optional

    def __post_init__(self):
        self.cols = np.asarray(self.cols, dtype=np.intp)
        if self.kind not in ("eq", "ineq"):
            raise ValueError(f"block {self.name}: kind must be eq or ineq")


@dataclass
class Objective:
    fun: callable  # fun(x) -> float
    grad: callable  # grad(x) -> (n,)
    hess: callable = None  # hess(x) -> sparse (n, n), optional


@dataclass
class NlpProblem:
    n: int
    lower: np.ndarray
    upper: np.ndarray
    objective: Objective | None  # None: pure feasibility problem
    blocks: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != (self.n,) or self.upper.shape != (self.n,):
            raise ValueError("bounds must have length n")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    def eq_blocks(self):
        return [b for b in self.blocks if b.kind == "eq"]

    def ineq_blocks(self):
        return [b for b in self.blocks if b.kind == "ineq"]

    def eval_block_values(self, x):
        """(c_eq, c_ineq) stacked in block order; raises on non-finite."""
        eq, ineq = [], []
        for b in self.blocks:
            v = np.asarray(b.fun(x[b.cols]), dtype=float)
            if not np.all(np.isfinite(v)):
                raise FloatingPointError(f"constraint block {b.name!r} returned non-finite values")
            (eq if b.kind == "eq" else ineq).append(v)
        c_eq = np.concatenate(eq) if eq else np.zeros(0)
        c_in = np.concatenate(ineq) if ineq else np.zeros(0)
        return c_eq, c_in

    def eval_jacobians(self, x):
        """(J_eq, J_ineq) as CSR matrices in the same row order as values."""
        tr_eq, tr_in = [], []
        r_eq = r_in = 0
        for b in self.blocks:
            J = np.asarray(b.jac(x[b.cols]), dtype=float)
            if J.shape != (b.dim, len(b.cols)):
                raise ValueError(f"block {b.name!r}: jacobian shape {J.shape}")
            rows = np.repeat(np.arange(b.dim), len(b.cols))
            cols = np.tile(b.cols, b.dim)
            if b.kind == "eq":
                tr_eq.append((rows + r_eq, cols, J.ravel()))
                r_eq += b.dim
            else:
                tr_in.append((rows + r_in, cols, J.ravel()))
                r_in += b.dim

        def build(trips, m):
            if not trips:
                return sp.csr_matrix((m, self.n))
            rows = np.concatenate([t[0] for t in trips])
            cols = np.concatenate([t[1] for t in trips])
            vals = np.concatenate([t[2] for t in trips])
            return sp.coo_matrix((vals, (rows, cols)), shape=(m, self.n)).tocsr()

        return build(tr_eq, r_eq), build(tr_in, r_in)

    def constraint_violation(self, x):
        """max-norm violation of all constraints and bounds at x."""
        c_eq, c_in = self.eval_block_values(x)
        v = 0.0
        if c_eq.size:
            v = max(v, float(np.abs(c_eq).max()))
        if c_in.size:
            v = max(v, float(np.maximum(c_in, 0.0).max()))
        v = max(v, float(np.maximum(self.lower - x, 0.0).max(initial=0.0)))
        v = max(v, float(np.maximum(x - self.upper, 0.0).max(initial=0.0)))
        return v

    def lagrangian_hessian(self, x, y_by_block, delta=0.0):
        """Assembled curvature: objective Hessian plus block contributions."""
        H = sp.coo_matrix((self.n, self.n))
        if self.objective is not None and self.objective.hess is not None:
            H = H + self.objective.hess(x)
        parts = [H.tocoo()]
        for b, y in zip(self.blocks, y_by_block):
            if b.hess is None:
                continue
            Hl = np.asarray(b.hess(x[b.cols], y))
            ii, jj = np.meshgrid(b.cols, b.cols, indexing="ij")
            parts.append(
                sp.coo_matrix((Hl.ravel(), (ii.ravel(), jj.ravel())), shape=(self.n, self.n))
            )
        if delta:
            parts.append(sp.coo_matrix((np.full(self.n, delta), (np.arange(self.n), np.arange(self.n))), shape=(self.n, self.n)))
        return sum(parts[1:], parts[0]).tocsc()
