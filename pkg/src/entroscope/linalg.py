"""Nonnegative-matrix spectral helpers.

Power iteration is written for irreducible nonnegative matrices (dense or
scipy-sparse: large lazily-generated windows need sparse storage):
iterating on A + I makes periodic cases (cycles) converge, and the
Collatz-Wielandt quotients min_i (Bx)_i/x_i <= lambda <= max_i (Bx)_i/x_i
give a certified bracket around the Perron root of the shifted matrix at
every step.  Reducible matrices (product graphs usually are) go through
dense eigvals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse


class ConvergenceError(RuntimeError):
    """Iteration cap reached before the requested tolerance."""


@dataclass
class PerronResult:
    value: float
    vector: np.ndarray
    iterations: int
    bracket: tuple[float, float]   # Collatz-Wielandt bounds on the Perron root


def perron_root(
    A,
    tol: float = 1e-12,
    max_iter: int = 10**5,
    vector_tol: float | None = None,
) -> PerronResult:
    """Leading eigenvalue and positive eigenvector of an irreducible
    nonnegative matrix (ndarray or scipy sparse), by power iteration on A + I.

    Stops once successive eigenvalue estimates are Cauchy within ``tol``
    (and, when ``vector_tol`` is given, the sup-normalized iterate moved by
    at most that much, for callers that need the eigenvector itself).
    Raises ConvergenceError at the iteration cap.
    """
    n = A.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    if sparse.issparse(A):
        B = (A + sparse.identity(n, format="csr")).tocsr()
    else:
        B = A + np.eye(n)
    x = np.ones(n)
    prev_est = None
    for it in range(1, max_iter + 1):
        y = B @ x
        quot = y / x
        lo, hi = float(quot.min()), float(quot.max())
        est = (lo + hi) / 2.0
        x_new = y / y.max()
        moved = float(np.max(np.abs(x_new - x)))
        x = x_new
        if prev_est is not None and abs(est - prev_est) <= tol:
            if vector_tol is None or moved <= vector_tol:
                return PerronResult(
                    value=est - 1.0,
                    vector=x,
                    iterations=it,
                    bracket=(lo - 1.0, hi - 1.0),
                )
        prev_est = est
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def spectral_radius(A: np.ndarray) -> float:
    """max |eigenvalue|; works for reducible nonnegative matrices."""
    if A.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))
