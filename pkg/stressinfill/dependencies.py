from stressinfill.controllers.pipeline import PipelineController
from stressinfill.settings import Settings


def get_settings() -> Settings:
    return Settings()


def get_pipeline_controller() -> PipelineController:
    return PipelineController(get_settings())
