"""Independent reference computations used to pin expected test values.

These deliberately avoid the library's own code paths: the NNLS oracle
enumerates every active set with plain least squares, and the integral
oracle applies the trapezoid rule on a grid containing every knot (exact
for piecewise-linear integrands).
"""

from itertools import combinations

import numpy as np


def brute_force_nnls(x, y):
    """Minimize ||X b - y|| over b >= 0 by trying every column subset.

    For each subset, the unconstrained least-squares solution restricted
    to those columns is a candidate iff it is non-negative; the best
    feasible candidate is the NNLS optimum.  Returns (beta, objective).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n_cols = x.shape[1]
    best_beta = np.zeros(n_cols)
    best_obj = float(y @ y)  # empty active set
    for size in range(1, n_cols + 1):
        for subset in combinations(range(n_cols), size):
            cols = list(subset)
            coef, *_ = np.linalg.lstsq(x[:, cols], y, rcond=None)
            if np.any(coef < -1e-12):
                continue
            beta = np.zeros(n_cols)
            beta[cols] = np.clip(coef, 0.0, None)
            residual = x @ beta - y
            obj = float(residual @ residual)
            if obj < best_obj:
                best_obj = obj
                best_beta = beta
    return best_beta, best_obj


def kkt_residuals(x, y, beta):
    """Max violation of the NNLS optimality conditions at beta.

    Returns (stationarity, dual): |gradient| over the positive support and
    the most negative gradient over the zero coefficients (sign-flipped so
    both should be ~0 at an optimum).
    """
    gradient = x.T @ (x @ beta - y)
    positive = beta > 0
    stationarity = float(np.abs(gradient[positive]).max()) if positive.any() else 0.0
    dual = float(max(0.0, -(gradient[~positive].min()))) if (~positive).any() else 0.0
    return stationarity, dual


def exact_piecewise_linear_integral(func, breakpoints):
    """Integral of a function linear between consecutive breakpoints."""
    grid = np.asarray(breakpoints, dtype=float)
    values = np.array([func(t) for t in grid])
    return float(np.trapezoid(values, grid))
