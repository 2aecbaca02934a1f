import math

import numpy as np
import pytest

from stressinfill.domain import ScalarField, build_grid
from stressinfill.fem import assemble_and_solve
from stressinfill.io.config import build_boundary_conditions, build_domain, parse_config
from stressinfill.models.error import OutsideDomainError
from stressinfill.models.material import MaterialModel
from stressinfill.stress import (
    NodalTensorField,
    StressTensor,
    principal_arrays,
    principal_decomposition,
    recover_nodal_stress,
)


def test_decomposition_of_diagonal_tensor() -> None:
    # Act
    result = principal_decomposition(StressTensor(1.0, 0.0, 0.0))

    # Assert
    assert (result.sigma1, result.sigma2) == (1.0, 0.0)
    assert result.v1 == (1.0, 0.0)
    assert result.v2 == (0.0, 1.0)
    assert not result.degenerate


def test_decomposition_of_pure_shear() -> None:
    # Act
    result = principal_decomposition(StressTensor(0.0, 0.0, 1.0))

    # Assert
    assert result.sigma1 == pytest.approx(1.0)
    assert result.sigma2 == pytest.approx(-1.0)
    np.testing.assert_allclose(result.v1, (math.sqrt(0.5), math.sqrt(0.5)))
    np.testing.assert_allclose(result.v2, (math.sqrt(0.5), -math.sqrt(0.5)))


def test_decomposition_of_isotropic_tensor() -> None:
    # Act
    result = principal_decomposition(StressTensor(2.0, 2.0, 0.0))

    # Assert
    assert result.degenerate
    assert result.sigma1 == result.sigma2 == 2.0


def test_decomposition_reconstructs_tensor(rng) -> None:
    for sxx, syy, txy in rng.normal(size=(50, 3)):
        # Prepare
        tensor = StressTensor(float(sxx), float(syy), float(txy))

        # Act
        result = principal_decomposition(tensor)

        # Assert
        np.testing.assert_allclose(result.reconstruct(), tensor, atol=1e-12)
        assert result.sigma1 >= result.sigma2
        assert result.v1[0] >= 0.0 and result.v2[0] >= 0.0
        assert abs(np.dot(result.v1, result.v2)) < 1e-12


def test_decomposition_rotates_with_the_tensor(rng) -> None:
    for (sxx, syy, txy), theta in zip(rng.normal(size=(30, 3)), rng.uniform(0.0, math.pi, 30)):
        # Prepare
        rotation = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        tensor = StressTensor(float(sxx), float(syy), float(txy))
        rotated = rotation @ tensor.matrix() @ rotation.T

        # Act
        original = principal_decomposition(tensor)
        turned = principal_decomposition(
            StressTensor(rotated[0, 0], rotated[1, 1], 0.5 * (rotated[0, 1] + rotated[1, 0]))
        )

        # Assert
        assert turned.sigma1 == pytest.approx(original.sigma1, abs=1e-12)
        assert turned.sigma2 == pytest.approx(original.sigma2, abs=1e-12)
        assert abs(np.dot(turned.v1, rotation @ original.v1)) == pytest.approx(1.0, abs=1e-9)
        assert abs(np.dot(turned.v2, rotation @ original.v2)) == pytest.approx(1.0, abs=1e-9)


def test_principal_arrays_agree_with_scalar_decomposition(rng) -> None:
    # Prepare
    components = rng.normal(size=(20, 3))

    # Act
    table = principal_arrays(components)

    # Assert
    for k, row in enumerate(components):
        result = principal_decomposition(StressTensor(*row))
        assert table["sigma1"][k] == pytest.approx(result.sigma1)
        assert table["sigma2"][k] == pytest.approx(result.sigma2)
        angle = math.radians(table["angle"][k])
        np.testing.assert_allclose((math.cos(angle), math.sin(angle)), result.v1, atol=1e-9)


def test_bilinear_evaluation_reproduces_linear_field() -> None:
    # Prepare
    grid = build_grid(5, 4)
    field = NodalTensorField.from_function(grid, lambda x, y: (2.0 * x - y, 3.0, x * 0.5 + y))

    # Act
    tensor = field.eval_tensor(2.3, 1.7)

    # Assert
    np.testing.assert_allclose(tensor, (2.9, 3.0, 2.85), atol=1e-12)
    np.testing.assert_allclose(field.eval_tensor(5.0, 4.0), (6.0, 3.0, 6.5), atol=1e-12)


def test_eval_tensor_outside_domain_raises() -> None:
    # Prepare
    mask = np.ones((2, 2), dtype=bool)
    mask[1, 1] = False
    field = NodalTensorField(build_grid(2, 2, mask), np.zeros((9, 3)))

    # Act / Assert
    with pytest.raises(OutsideDomainError):
        field.eval_tensor(1.5, 1.5)
    with pytest.raises(OutsideDomainError):
        field.eval_tensor(-0.1, 0.5)


def test_uniform_tension_recovers_exact_stress(uniaxial_yaml: str, material: MaterialModel) -> None:
    # Prepare
    config = parse_config(uniaxial_yaml)
    grid = build_domain(config)
    bc = build_boundary_conditions(config, grid)
    U, _ = assemble_and_solve(grid, ScalarField.constant(grid, 1.0), bc, material)

    # Act
    field = recover_nodal_stress(grid, U, material)

    # Assert
    np.testing.assert_allclose(field.values[:, 0], 1.0, atol=1e-10)
    np.testing.assert_allclose(field.values[:, 1:], 0.0, atol=1e-10)
    np.testing.assert_allclose(field.anisotropy(), 1.0, atol=1e-10)


def test_anisotropy_of_shear_and_isotropic_cells() -> None:
    # Prepare
    grid = build_grid(1, 1)
    shear = NodalTensorField(grid, np.tile([0.0, 0.0, 2.0], (4, 1)))
    hydrostatic = NodalTensorField(grid, np.tile([-3.0, -3.0, 0.0], (4, 1)))

    # Act / Assert
    np.testing.assert_allclose(shear.anisotropy(), [1.0])
    np.testing.assert_allclose(hydrostatic.anisotropy(), [0.0])
