"""Poisson regression by iteratively reweighted least squares, with a
heteroskedasticity-robust (HC0 / Huber sandwich) covariance.

The designs used here are saturated in binary regressors (intercept +
treatment, optionally + covariate + interaction), so the fitted cell
means must equal the sample cell means; tests hold the solver to that
closed form.  Count outcomes are typically over-dispersed relative to
the Poisson variance assumption, hence the sandwich covariance
A^-1 B A^-1 with A = sum_i x_i x_i' mu_i and
B = sum_i x_i x_i' (y_i - mu_i)^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ITERATIONS = 100
STEP_TOLERANCE = 1e-10
_MEAN_GUARD = 1e-8  # keeps the intercept start finite for all-zero outcomes


class NonIdentifiedError(ValueError):
    """A design cell has no positive outcome mass; its coefficient is undefined."""

    def __init__(self, cell: str):
        self.cell = cell
        super().__init__(f"design cell {cell} has all-zero outcomes; coefficient not identified")


class CollinearDesignError(ValueError):
    def __init__(self, columns: list[str]):
        self.columns = columns
        super().__init__(f"design matrix is singular; collinear columns: {columns}")


@dataclass(frozen=True)
class PoissonFit:
    coefficients: np.ndarray
    fitted: np.ndarray
    converged: bool
    iterations: int
    n_obs: int
    column_names: tuple[str, ...]


def _cell_label(row: np.ndarray, names: tuple[str, ...]) -> str:
    parts = [f"{name}={row[i]:g}" for i, name in enumerate(names) if name != "intercept"]
    return ",".join(parts) if parts else "intercept"


def check_identification(y: np.ndarray, design: np.ndarray, names: tuple[str, ...]) -> None:
    """Every distinct design row needs at least one positive outcome."""
    cells, inverse = np.unique(design, axis=0, return_inverse=True)
    for c in range(cells.shape[0]):
        if y[inverse == c].sum() == 0:
            raise NonIdentifiedError(_cell_label(cells[c], names))


def _column_names(design: np.ndarray, names) -> tuple[str, ...]:
    if names is not None:
        return tuple(names)
    return ("intercept", *(f"x{j}" for j in range(1, design.shape[1])))


def fit_poisson(
    y,
    design,
    column_names=None,
    tol: float = STEP_TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
) -> PoissonFit:
    """Maximize the Poisson log-likelihood for log E[y] = design @ beta.

    Convergence: max absolute coefficient step below ``tol``.  Raises
    NonIdentifiedError for an all-zero design cell and
    CollinearDesignError for a rank-deficient design; non-convergence
    is flagged on the returned fit rather than raised.
    """
    y = np.asarray(y, dtype=np.float64)
    X = np.asarray(design, dtype=np.float64)
    if y.ndim != 1 or X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"incompatible shapes y{y.shape}, design{X.shape}")
    if y.shape[0] == 0:
        raise ValueError("no observations")
    if np.any(~np.isfinite(y)) or np.any(y < 0):
        raise ValueError("y must be finite and non-negative")
    names = _column_names(X, column_names)
    check_identification(y, X, names)

    beta = np.zeros(X.shape[1])
    beta[0] = np.log(y.mean() + _MEAN_GUARD)
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        eta = np.clip(X @ beta, -700.0, 700.0)
        mu = np.exp(eta)
        info = (X * mu[:, None]).T @ X
        score = X.T @ (y - mu)
        try:
            step = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            raise _collinearity(X, names) from None
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            converged = True
            break
    mu = np.exp(np.clip(X @ beta, -700.0, 700.0))
    return PoissonFit(
        coefficients=beta,
        fitted=mu,
        converged=converged,
        iterations=iterations,
        n_obs=y.shape[0],
        column_names=names,
    )


def _collinearity(X: np.ndarray, names: tuple[str, ...]) -> CollinearDesignError:
    # Columns expressible as combinations of the others, by least squares.
    involved = []
    for j in range(X.shape[1]):
        others = np.delete(X, j, axis=1)
        if others.shape[1] == 0:
            continue
        _, residual, *_ = np.linalg.lstsq(others, X[:, j], rcond=None)
        total = float((X[:, j] ** 2).sum())
        misfit = float(residual[0]) if residual.size else float(
            ((others @ np.linalg.lstsq(others, X[:, j], rcond=None)[0] - X[:, j]) ** 2).sum()
        )
        if misfit <= 1e-10 * max(total, 1.0):
            involved.append(names[j])
    return CollinearDesignError(involved or list(names))


def hc0_covariance(design, y, fitted) -> np.ndarray:
    """Sandwich covariance A^-1 B A^-1 at the fitted means.

    A = sum x x' mu,  B = sum x x' (y - mu)^2.  The result is
    symmetrized to remove floating-point drift; raises
    CollinearDesignError when A is singular.
    """
    X = np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    mu = np.asarray(fitted, dtype=np.float64)
    bread = (X * mu[:, None]).T @ X
    residual_sq = (y - mu) ** 2
    meat = (X * residual_sq[:, None]).T @ X
    names = _column_names(X, None)
    try:
        bread_inv = np.linalg.inv(bread)
    except np.linalg.LinAlgError:
        raise _collinearity(X, names) from None
    cov = bread_inv @ meat @ bread_inv
    return (cov + cov.T) / 2.0
