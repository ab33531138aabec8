"""Solution refinement by weighted-Jacobi smoothing.

Vectors lifted from a reduced graph carry high-frequency error relative to
the fine Laplacian; a few damped Jacobi sweeps filter that error out.  The
shifted variant relaxes (L - lambda B) y = 0 and is what the multilevel
eigensolver uses between levels.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, GraphError

DEFAULT_THETA = 2.0 / 3.0
DEFAULT_ITERS = 10


def jacobi_smooth(g: Graph, vectors, theta: float = DEFAULT_THETA,
                  iters: int = DEFAULT_ITERS) -> np.ndarray:
    """Apply iters sweeps of x <- (1 - theta) x + theta D^-1 A x per vector.

    ``vectors`` is (n,) or (n, k); the smoothed array has the same shape.
    """
    if not (0 <= theta <= 1):
        raise GraphError("theta must lie in [0, 1]")
    if iters < 0:
        raise GraphError("iteration count must be >= 0")
    x = np.array(vectors, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    if x.shape[0] != g.n:
        raise GraphError("vector length does not match graph")
    d = g.degrees()
    if np.any(d == 0):
        raise GraphError("isolated node: Jacobi smoothing undefined")
    a = g.adjacency()
    dinv = (1.0 / d)[:, None]
    for _ in range(iters):
        x = (1 - theta) * x + theta * dinv * (a @ x)
    return x[:, 0] if squeeze else x


def eigen_smooth(g: Graph, b_mode: str, lam: float, y, theta: float = DEFAULT_THETA,
                 iters: int = DEFAULT_ITERS) -> np.ndarray:
    """Weighted-Jacobi relaxation of (L - lambda B) y = 0, unit-normalized.

    ``b_mode`` is "identity" (ratio cut) or "degree" (normalized cut).
    """
    if b_mode not in ("identity", "degree"):
        raise GraphError("b_mode must be 'identity' or 'degree'")
    if not (0 <= theta <= 1):
        raise GraphError("theta must lie in [0, 1]")
    y = np.array(y, dtype=np.float64)
    if y.shape != (g.n,):
        raise GraphError("vector length does not match graph")
    d = g.degrees()
    if np.any(d == 0):
        raise GraphError("isolated node: smoothing undefined")
    b_diag = np.ones(g.n) if b_mode == "identity" else d
    diag = d - lam * b_diag  # off-diagonal of L - lambda B is just -A
    # rows where the shift exactly hits the diagonal impose no constraint on
    # their own entry; those entries are left untouched by the sweep
    zero = np.abs(diag) <= 1e-12 * np.abs(d)
    if np.all(zero):
        raise GraphError("shift hits every degree: nothing to relax")
    safe_diag = np.where(zero, 1.0, diag)
    a = g.adjacency()
    for _ in range(iters):
        upd = (1 - theta) * y + theta * (a @ y) / safe_diag
        y = np.where(zero, y, upd)
    nrm = np.linalg.norm(y)
    if nrm == 0:
        raise GraphError("smoothing collapsed the vector to zero")
    return y / nrm
