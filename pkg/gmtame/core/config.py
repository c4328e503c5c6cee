from typing import List, Literal, Optional
import os

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Application settings
    APP_NAME: str = "gmtame - Brieskorn lattices of tame polynomials"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # API settings
    API_V1_PREFIX: str = "/api/v1"
    API_PORT: int = int(os.getenv("API_PORT", "50000"))

    # Brieskorn generator caps: k <= k_init + K_EXTRA_MAX, l <= L_FACTOR * k
    K_EXTRA_MAX: int = 40
    L_FACTOR: int = 4

    # V-filtration saturation and window caps
    SATURATION_MAX: int = 64
    WINDOW_MAX: int = 64

    # Good basis elimination cap = GOODBASIS_CAP_FACTOR * mu * (level span)^2
    GOODBASIS_CAP_FACTOR: int = 10

    # Mean-value retry loop of the pipeline
    MEAN_RETRY_MAX: int = 40
    K_STRIDE: int = 1

    # Invariant checks: off | fast | full
    CHECKS: str = os.getenv("GMTAME_CHECKS", "fast")

    # Corpus verification parallelism
    JOBS: int = 1

    # CORS settings
    BACKEND_CORS_ORIGINS: list = ["*"]

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "allow"  # Allow extra fields from .env

settings = Settings()


class RunConfig(BaseModel):
    """Per-run options; unset caps fall back to settings"""

    vars: Optional[List[str]] = None
    format: Literal["text", "json"] = "text"
    checks: Literal["off", "fast", "full"] = Field(default_factory=lambda: settings.CHECKS)
    k_max: Optional[int] = Field(default=None, gt=0)
    mean_retry_max: int = Field(default_factory=lambda: settings.MEAN_RETRY_MAX, gt=0)
    k_stride: int = Field(default_factory=lambda: settings.K_STRIDE, gt=0)
    verbose: bool = False
    jobs: int = Field(default_factory=lambda: settings.JOBS, gt=0)

    @field_validator("vars")
    @classmethod
    def vars_distinct(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("variable list is empty")
        if len(set(v)) != len(v):
            raise ValueError(f"duplicate variable names in {v}")
        return v
