import numpy as np
import pytest

from stressinfill.domain import CartesianGrid, ScalarField, build_grid
from stressinfill.models.error import InvalidRadiusError
from stressinfill.optimization.filtering import (
    DensityFilter,
    cone_kernel,
    density_filter,
    filter_adjoint,
    heaviside_derivative,
    heaviside_project,
)


def test_cone_kernel_weights() -> None:
    # Act
    kernel = cone_kernel(1.5)

    # Assert
    assert kernel.shape == (3, 3)
    assert kernel[1, 1] == pytest.approx(1.5)
    assert kernel[0, 1] == pytest.approx(0.5)
    assert kernel[0, 0] == pytest.approx(1.5 - np.sqrt(2.0))


@pytest.mark.parametrize("radius", [0.5, 1.0])
def test_small_radius_is_identity(small_grid: CartesianGrid, rng, radius: float) -> None:
    # Prepare
    values = rng.random(small_grid.n_elements)

    # Act
    filtered = DensityFilter.build(small_grid, radius)

    # Assert
    assert filtered.is_identity
    np.testing.assert_array_equal(filtered.apply(values), values)


def test_filter_preserves_constants_on_masked_grid() -> None:
    # Prepare
    mask = np.ones((10, 14), dtype=bool)
    mask[4:7, 5:9] = False
    grid = build_grid(14, 10, mask)

    # Act
    filtered = density_filter(ScalarField.constant(grid, 0.42), 2.6)

    # Assert
    np.testing.assert_allclose(filtered.values, 0.42, rtol=1e-12)


def test_filter_adjoint_identity(small_grid: CartesianGrid, rng) -> None:
    # Prepare
    a = rng.random(small_grid.n_elements)
    b = rng.random(small_grid.n_elements)
    filtered = DensityFilter.build(small_grid, 2.2)

    # Act / Assert
    assert filtered.apply(a) @ b == pytest.approx(a @ filter_adjoint(b, 2.2, small_grid), rel=1e-12)


def test_filter_rejects_nonpositive_radius(small_grid: CartesianGrid) -> None:
    with pytest.raises(InvalidRadiusError):
        DensityFilter.build(small_grid, 0.0)


@pytest.mark.parametrize("beta", [1.0, 8.0, 128.0])
def test_heaviside_fixed_points(beta: float) -> None:
    np.testing.assert_allclose(heaviside_project(np.array([0.0, 0.5, 1.0]), beta), [0.0, 0.5, 1.0])


@pytest.mark.parametrize("beta", [1.0, 8.0])
def test_heaviside_derivative_matches_finite_differences(beta: float) -> None:
    # Prepare
    x = np.linspace(0.05, 0.95, 19)
    h = 1e-6

    # Act
    numeric = (heaviside_project(x + h, beta) - heaviside_project(x - h, beta)) / (2 * h)

    # Assert
    np.testing.assert_allclose(heaviside_derivative(x, beta), numeric, rtol=1e-6, atol=1e-9)


@pytest.mark.parametrize("beta", [1.0, 8.0, 128.0])
def test_heaviside_is_monotone(beta: float) -> None:
    # Prepare
    x = np.linspace(-0.2, 1.2, 281)

    # Act
    projected = heaviside_project(x, beta)

    # Assert
    assert np.all(np.diff(projected) >= 0.0)
    assert np.all(heaviside_derivative(x, beta) >= 0.0)
