from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", env_prefix="STRESSINFILL_"
    )
    output_root: str = "runs"
    log_level: str = "INFO"
    log_file_name: str = "run.log"
    log_period: int = 10
    n_jobs: int = -1
    api_host: str = "127.0.0.1"
    api_port: int = 7000
