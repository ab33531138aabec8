"""Laplacian solve contract: given connected g and b orthogonal to the
all-one vector, return x with L x ~= b and x orthogonal to all-ones.

Backed by preconditioned conjugate gradients.  For small systems a Jacobi
(diagonal) preconditioner is used; for larger ones a smoothed-aggregation
AMG preconditioner (pyamg) keeps iteration counts flat.  The interface is a
contract, so a different backend can replace it without touching callers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph

AMG_NODE_THRESHOLD = 3000


class SolveError(ValueError):
    """Right-hand side violates the solve contract."""


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual: float
    converged: bool


class LaplacianSolver:
    """Reusable solver for one graph Laplacian (amortizes preconditioner setup)."""

    def __init__(self, g: Graph, tol: float = 1e-8, max_iter: int | None = None):
        self.g = g
        self.tol = tol
        self.max_iter = max_iter if max_iter is not None else 10 * g.n
        self._lap = g.laplacian()
        d = g.degrees()
        if np.any(d <= 0):
            raise SolveError("graph has an isolated node; Laplacian solve undefined")
        self._apply_m = self._build_preconditioner(d)

    def _build_preconditioner(self, d: np.ndarray):
        if self.g.n <= AMG_NODE_THRESHOLD:
            dinv = 1.0 / d
            return lambda r: dinv * r
        import pyamg

        # tiny diagonal shift removes the nullspace for the AMG setup only
        shift = 1e-8 * d.mean()
        a = (self._lap + shift * sp.eye(self.g.n)).tocsr()
        ml = pyamg.smoothed_aggregation_solver(a, max_coarse=50)
        m = ml.aspreconditioner(cycle="V")
        return lambda r: m @ r

    def solve(self, b) -> tuple[np.ndarray, SolveReport]:
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (self.g.n,):
            raise SolveError("right-hand side has wrong length")
        bnorm = float(np.linalg.norm(b))
        if bnorm == 0.0:
            return np.zeros(self.g.n), SolveReport(0, 0.0, True)
        if abs(b.sum()) > 1e-8 * bnorm:
            raise SolveError("right-hand side must be orthogonal to the all-one vector")
        x, its, res = _pcg(self._lap, b, self._apply_m, self.tol, self.max_iter)
        x -= x.mean()
        return x, SolveReport(its, res, res <= self.tol)


def solve_laplacian(g: Graph, b, tol: float = 1e-8,
                    max_iter: int | None = None) -> tuple[np.ndarray, SolveReport]:
    """One-shot Laplacian solve; see ``LaplacianSolver`` for repeated solves."""
    return LaplacianSolver(g, tol=tol, max_iter=max_iter).solve(b)


def _pcg(a, b, apply_m, tol, max_iter):
    """Preconditioned CG on the singular SPD system, iterates kept mean-free."""
    n = b.shape[0]
    x = np.zeros(n)
    r = b.copy()
    r -= r.mean()
    bnorm = np.linalg.norm(b)
    z = apply_m(r)
    z -= z.mean()
    p = z.copy()
    rz = float(r @ z)
    res = np.linalg.norm(r) / bnorm
    its = 0
    while res > tol and its < max_iter:
        ap = a @ p
        pap = float(p @ ap)
        if pap <= 0:
            break
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        r -= r.mean()
        res = np.linalg.norm(r) / bnorm
        its += 1
        if res <= tol:
            break
        z = apply_m(r)
        z -= z.mean()
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, its, float(res)
