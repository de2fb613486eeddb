"""IRLS Poisson fits against closed forms and a grid-search oracle."""

from __future__ import annotations

import math

import numpy as np
import pytest

from draftguide.analysis import (
    CollinearDesignError,
    NonIdentifiedError,
    fit_poisson,
)


def binary_design(z: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones_like(z, dtype=float), z.astype(float)])


def saturated_design(z: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones_like(z, dtype=float), z, x, z * x])


def cell_data(means: dict[tuple[int, int], float], per_cell: int = 50):
    zs, xs, ys = [], [], []
    for (z, x), mean in means.items():
        zs.append(np.full(per_cell, z, dtype=float))
        xs.append(np.full(per_cell, x, dtype=float))
        ys.append(np.full(per_cell, mean, dtype=float))
    return np.concatenate(zs), np.concatenate(xs), np.concatenate(ys)


def poisson_loglik(y, design, beta):
    eta = design @ beta
    return float(np.sum(y * eta - np.exp(eta)))


def test_binary_closed_form_and_grid_search_oracle():
    rng = np.random.default_rng(11)
    y = np.concatenate([rng.poisson(1.0, 1000), rng.poisson(2.0, 1000)]).astype(float)
    z = np.concatenate([np.zeros(1000), np.ones(1000)])
    design = binary_design(z)
    fit = fit_poisson(y, design, column_names=("intercept", "treated"))
    assert fit.converged

    mean0, mean1 = y[:1000].mean(), y[1000:].mean()
    assert abs(fit.coefficients[0] - math.log(mean0)) < 1e-8
    assert abs(fit.coefficients[1] - math.log(mean1 / mean0)) < 1e-8

    # Independent oracle: likelihood grid around the truth; no grid
    # point may beat the IRLS optimum.
    best = poisson_loglik(y, design, fit.coefficients)
    alphas = np.linspace(fit.coefficients[0] - 0.5, fit.coefficients[0] + 0.5, 41)
    betas = np.linspace(fit.coefficients[1] - 0.5, fit.coefficients[1] + 0.5, 41)
    grid_best = max(
        poisson_loglik(y, design, np.array([a, b])) for a in alphas for b in betas
    )
    assert grid_best <= best + 1e-9


def test_equal_means_give_zero_effect():
    y = np.concatenate([np.full(400, 3.0), np.full(400, 3.0)])
    z = np.concatenate([np.zeros(400), np.ones(400)])
    fit = fit_poisson(y, binary_design(z))
    assert abs(fit.coefficients[1]) < 1e-12


def test_saturated_interaction_is_log_ratio_of_ratios():
    z, x, y = cell_data({(0, 0): 1.0, (1, 0): 2.0, (0, 1): 3.0, (1, 1): 12.0})
    fit = fit_poisson(y, saturated_design(z, x))
    assert abs(fit.coefficients[3] - math.log((12.0 / 3.0) / (2.0 / 1.0))) < 1e-10
    assert abs(fit.coefficients[3] - math.log(2.0)) < 1e-10
    # Cell-mean oracle: all four fitted coefficients from cell means.
    expected = (
        math.log(1.0),
        math.log(2.0 / 1.0),
        math.log(3.0 / 1.0),
        math.log((12.0 / 3.0) / (2.0 / 1.0)),
    )
    assert np.allclose(fit.coefficients, expected, atol=1e-10)


def test_randomized_closed_form_agreement():
    rng = np.random.default_rng(404)
    for _ in range(40):
        n0, n1 = rng.integers(20, 200, size=2)
        mu0, mu1 = rng.uniform(0.2, 8.0, size=2)
        y = np.concatenate([rng.poisson(mu0, n0), rng.poisson(mu1, n1)]).astype(float)
        if y[:n0].sum() == 0 or y[n0:].sum() == 0:
            continue
        z = np.concatenate([np.zeros(n0), np.ones(n1)])
        fit = fit_poisson(y, binary_design(z))
        assert abs(fit.coefficients[0] - math.log(y[:n0].mean())) < 1e-8
        assert abs(fit.coefficients[1] - math.log(y[n0:].mean() / y[:n0].mean())) < 1e-8


def test_scale_equivariance():
    rng = np.random.default_rng(7)
    z, x, y = cell_data({(0, 0): 2.0, (1, 0): 3.0, (0, 1): 1.0, (1, 1): 5.0}, per_cell=30)
    y = y + rng.integers(0, 3, size=y.shape[0])
    design = saturated_design(z, x)
    base = fit_poisson(y, design).coefficients
    scaled = fit_poisson(7 * y, design).coefficients
    assert abs(scaled[0] - (base[0] + math.log(7))) < 1e-8
    assert np.all(np.abs(scaled[1:] - base[1:]) < 1e-8)


def test_label_swap_negates_treatment_coefficient():
    rng = np.random.default_rng(9)
    y = rng.poisson(2.5, 600).astype(float)
    z = rng.integers(0, 2, 600).astype(float)
    beta = fit_poisson(y, binary_design(z)).coefficients[1]
    beta_swapped = fit_poisson(y, binary_design(1 - z)).coefficients[1]
    assert abs(beta + beta_swapped) < 1e-9


def test_all_zero_cell_is_named():
    y = np.concatenate([np.full(50, 2.0), np.zeros(50)])
    z = np.concatenate([np.zeros(50), np.ones(50)])
    with pytest.raises(NonIdentifiedError) as err:
        fit_poisson(y, binary_design(z), column_names=("intercept", "treated"))
    assert "treated=1" in str(err.value)


def test_collinear_design_is_named():
    z = np.concatenate([np.zeros(50), np.ones(50)])
    y = np.concatenate([np.full(50, 1.0), np.full(50, 2.0)])
    design = np.column_stack([np.ones(100), z, z])  # duplicated column
    with pytest.raises(CollinearDesignError) as err:
        fit_poisson(y, design, column_names=("intercept", "treated", "dup"))
    assert "treated" in err.value.columns and "dup" in err.value.columns


def test_unconverged_fit_is_flagged_not_raised():
    rng = np.random.default_rng(3)
    y = rng.poisson(2.0, 100).astype(float)
    z = rng.integers(0, 2, 100).astype(float)
    fit = fit_poisson(y, binary_design(z), max_iterations=1)
    assert not fit.converged
    assert fit.iterations == 1


def test_input_validation():
    with pytest.raises(ValueError):
        fit_poisson(np.array([1.0, -1.0]), binary_design(np.array([0.0, 1.0])))
    with pytest.raises(ValueError):
        fit_poisson(np.array([]), np.zeros((0, 2)))
