from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Run store (search results and checkpoints)
    DATABASE_URL: str = "sqlite:///./extremal_runs.db"

    # Application Configuration
    DEBUG: bool = False
    LOG_LEVEL: str = "WARNING"
    JOBS: int = 1

    # Spectral estimator defaults
    DEFAULT_STARTS: int = 64
    DEFAULT_MAX_ITERS: int = 500
    DEFAULT_TOL: float = 1e-12
    DEFAULT_SEED: int = 0

    # Search / verification budgets
    SEARCH_STARTS: int = 16
    POLISH_STARTS: int = 256
    TABLE_STARTS: int = 256
    CHUNK_SIZE: int = 256
    CHECKPOINT_EVERY: int = 8
    MAX_ENUMERATION_BITS: int = 30

    # App Metadata
    PROJECT_NAME: str = "extremal"
    VERSION: str = "1.0.0"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="EXTREMAL_",
        case_sensitive=False,
    )

    @property
    def effective_log_level(self) -> str:
        return "DEBUG" if self.DEBUG else self.LOG_LEVEL.upper()


# Global setting instance
settings = Settings()
