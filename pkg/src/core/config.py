from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_file=".env", env_prefix="BAITMENU_", case_sensitive=True, extra="ignore"
    )

    SEED: int = 0
    SAMPLES: int = 1_000_000
    CHUNK_SIZE: int = 1 << 17

    TOLERANCE: float = 1e-9

    DP_ACCEPTANCE: float = 1 / 3
    SURVIVAL_THRESHOLD: float = 11 / 12
    TOP_THRESHOLD: float = 1 / 12

    RATIO_FLOOR: float = 0.5
    RATIO_FLAG: float = 0.9

    MAX_SEARCH_SPACE: int = 10_000_000
    SINGLE_PAGE_FAMILY_CAP: int = 500

    LOG_LEVEL: str = "WARNING"


settings = Settings()
