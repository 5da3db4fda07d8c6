"""Non-negative least squares via the Lawson-Hanson active-set method.

Solves min ||A x - b||_2 subject to x >= 0. Problem sizes here are tiny
(one column per graph neighbor, typically a few dozen), so an exact
active-set solve beats iterative methods.
"""

from __future__ import annotations

import numpy as np


def nnls(A: np.ndarray, b: np.ndarray, tol: float = 1e-10, max_iter: int | None = None) -> np.ndarray:
    """Nonnegative x minimizing ||A x - b||, to KKT convergence within `tol`.

    x = 0 is always feasible, so the solver cannot fail; it terminates when
    every zero coordinate has gradient component <= tol (KKT) or at the
    iteration cap.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"A must be 2-d, got shape {A.shape}")
    m, n = A.shape
    if n < 1:
        raise ValueError("A needs at least one column")
    if b.shape != (m,):
        raise ValueError(f"b has shape {b.shape}, expected ({m},)")
    if max_iter is None:
        max_iter = 3 * n + 30

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)  # complement is the active (zero) set

    for _ in range(max_iter):
        w = A.T @ (b - A @ x)  # negative gradient of the objective
        candidates = ~passive
        if not candidates.any() or w[candidates].max() <= tol:
            return x
        j = int(np.flatnonzero(candidates)[np.argmax(w[candidates])])
        passive[j] = True

        while True:
            z = np.zeros(n)
            cols = np.flatnonzero(passive)
            z[cols], *_ = np.linalg.lstsq(A[:, cols], b, rcond=None)
            if z[cols].min() > 0:
                x = z
                break
            # step toward z as far as feasibility allows, then shrink passive set
            blocking = passive & (z <= 0)
            denom = x[blocking] - z[blocking]
            # denom == 0 only when x_j = z_j = 0; that coordinate forces a zero step
            steps = np.where(denom > 0, np.divide(x[blocking], denom, where=denom > 0), 0.0)
            step = steps.min()
            x = x + step * (z - x)
            passive &= x > tol
            x[~passive] = 0.0
            if not passive.any():
                break

    return x
