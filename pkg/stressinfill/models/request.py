from pydantic import BaseModel, Field


class AnalysisRequest(BaseModel):
    config: str = Field(min_length=1, description="YAML run configuration")


class MetricsRequest(BaseModel):
    config: str = Field(min_length=1, description="YAML run configuration")
    density: list[list[float | None]] = Field(
        min_length=1, description="ny rows of nx densities, top row first, null where masked"
    )
