import pytest
from pydantic import ValidationError

from stressinfill.models.material import MaterialModel, PlaneMode


def test_material_defaults() -> None:
    # Act
    material = MaterialModel()

    # Assert
    assert material.E0 == 1.0
    assert material.nu == 0.3
    assert material.gamma == 3.0
    assert material.Emin == pytest.approx(1.0e-6)
    assert material.plane is PlaneMode.STRESS


def test_void_modulus_follows_solid_modulus() -> None:
    # Act
    material = MaterialModel(E0=200.0)

    # Assert
    assert material.Emin == pytest.approx(2.0e-4)


def test_void_modulus_must_stay_below_solid_modulus() -> None:
    with pytest.raises(ValidationError):
        MaterialModel(E0=1.0, Emin=2.0)


@pytest.mark.parametrize("nu", [0.5, -1.0, 0.7])
def test_poisson_ratio_out_of_range(nu: float) -> None:
    with pytest.raises(ValidationError):
        MaterialModel(nu=nu)


def test_plane_strain_effective_constants() -> None:
    # Act
    material = MaterialModel(nu=0.25, plane="strain")

    # Assert
    assert material.effective_nu == pytest.approx(0.25 / 0.75)
    assert material.modulus_scale == pytest.approx(1.0 / (1.0 - 0.0625))
