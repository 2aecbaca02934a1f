from unittest.mock import AsyncMock

import pytest
from fastapi import FastAPI
from starlette.testclient import TestClient

from stressinfill.controllers.pipeline import PipelineController
from stressinfill.dependencies import get_pipeline_controller
from stressinfill.io.config import parse_config
from stressinfill.models.error import SingularSystemError


@pytest.mark.asyncio
async def test_analyze_solid_domain(
    pipeline_controller: PipelineController, app: FastAPI, client: TestClient, cantilever_yaml: str
) -> None:
    # Prepare
    analysis = await pipeline_controller.run_analysis(parse_config(cantilever_yaml))

    def _mock_run_analysis():
        pipeline_controller.run_analysis = AsyncMock(return_value=analysis)
        return pipeline_controller

    app.dependency_overrides[get_pipeline_controller] = _mock_run_analysis

    # Act
    response = client.post("/analysis/", json={"config": cantilever_yaml})

    # Assert
    assert response.status_code == 200
    body = response.json()
    assert (body["nx"], body["ny"], body["active_elements"]) == (24, 12, 288)
    assert body["compliance"] == pytest.approx(analysis.compliance)
    assert len(body["degenerate_points"]) == len(analysis.skeleton.points)
    assert len(body["separatrices"]) == len(analysis.skeleton.separatrices)
    pipeline_controller.run_analysis.assert_awaited_once()


def test_analyze_uniform_tension(
    pipeline_controller: PipelineController, app: FastAPI, client: TestClient, uniaxial_yaml: str
) -> None:
    # Prepare
    app.dependency_overrides[get_pipeline_controller] = lambda: pipeline_controller

    # Act
    response = client.post("/analysis/", json={"config": uniaxial_yaml})

    # Assert
    assert response.status_code == 200
    body = response.json()
    assert body["degenerate_points"] == []
    assert body["separatrices"] == []
    assert body["compliance"] > 0.0


def test_analyze_rejects_invalid_configuration(
    pipeline_controller: PipelineController, app: FastAPI, client: TestClient, cantilever_yaml: str
) -> None:
    # Prepare
    app.dependency_overrides[get_pipeline_controller] = lambda: pipeline_controller

    # Act
    response = client.post("/analysis/", json={"config": cantilever_yaml.replace("r: 1.5", "r: 9")})

    # Assert
    assert response.status_code == 422
    assert response.json()["name"] == "ConfigurationError"


def test_analyze_reports_numerical_failure(
    pipeline_controller: PipelineController, app: FastAPI, client: TestClient, cantilever_yaml: str
) -> None:
    # Prepare
    def _mock_run_analysis():
        pipeline_controller.run_analysis = AsyncMock(
            side_effect=SingularSystemError(detail="zero pivot")
        )
        return pipeline_controller

    app.dependency_overrides[get_pipeline_controller] = _mock_run_analysis

    # Act
    response = client.post("/analysis/", json={"config": cantilever_yaml})

    # Assert
    assert response.status_code == 500
    assert response.json() == {
        "message": "Linear system could not be solved: zero pivot.",
        "name": "SingularSystemError",
        "status_code": 500,
    }
