from fastapi import APIRouter, Depends

from stressinfill.controllers.pipeline import PipelineController
from stressinfill.dependencies import get_pipeline_controller
from stressinfill.io.config import parse_config
from stressinfill.models.request import AnalysisRequest
from stressinfill.models.view import AnalysisView, DegeneratePointView, SeparatrixView

router = APIRouter(
    prefix="/analysis",
    tags=["analysis"],
    responses={422: {"description": "Invalid configuration"}},
)


@router.post("/", response_model=AnalysisView)
async def analyze_solid_domain(
    request: AnalysisRequest,
    pipeline_controller: PipelineController = Depends(get_pipeline_controller),
) -> AnalysisView:
    config = parse_config(request.config)
    analysis = await pipeline_controller.run_analysis(config)
    return AnalysisView(
        nx=analysis.grid.nx,
        ny=analysis.grid.ny,
        active_elements=analysis.grid.n_elements,
        compliance=analysis.compliance,
        relative_residual=analysis.summary.relative_residual,
        degenerate_points=[
            DegeneratePointView.from_point(point) for point in analysis.skeleton.points
        ],
        separatrices=[
            SeparatrixView(
                source=separatrix.source,
                family=separatrix.line.family,
                launch_angle=separatrix.launch_angle,
                termination=separatrix.line.termination,
                length=separatrix.line.length,
                vertex_count=len(separatrix.line.vertices),
            )
            for separatrix in analysis.skeleton.separatrices
        ],
    )
