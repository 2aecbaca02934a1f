from dataclasses import asdict

from fastapi import APIRouter, Depends

from stressinfill.controllers.pipeline import PipelineController
from stressinfill.dependencies import get_pipeline_controller
from stressinfill.io.config import parse_config
from stressinfill.models.request import MetricsRequest
from stressinfill.models.view import MetricsView

router = APIRouter(
    prefix="/metrics",
    tags=["metrics"],
    responses={422: {"description": "Invalid configuration"}},
)


@router.post("/", response_model=MetricsView)
async def evaluate_density(
    request: MetricsRequest,
    pipeline_controller: PipelineController = Depends(get_pipeline_controller),
) -> MetricsView:
    config = parse_config(request.config)
    metrics = await pipeline_controller.metrics_for_lattice(config, request.density)
    return MetricsView(**asdict(metrics))
