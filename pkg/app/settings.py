from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    DATA_DIR: str = "data"
    MASTER_SEED: int = 0
    WORKER_LIMIT: int = 4
    AGENT_TIMEOUT_SECONDS: float = 300.0
    FETCH_TIMEOUT_SECONDS: float = 120.0
    SNAP_BASE_URL: str = "https://snap.stanford.edu/data"
    LOG_LEVEL: str = "INFO"
    LOG_JSON_FORMAT: bool = False
    LOG_DIR: str = "data/logs"

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")


settings = Settings()
