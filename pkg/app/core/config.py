from pydantic_settings import BaseSettings
from pydantic import ConfigDict, field_validator
import logging


class Settings(BaseSettings):
    """
    Numerical policy and runtime settings.
    All settings can be overridden via .env file or environment variables.
    """

    PROJECT_NAME: str = "nilflow"
    VERSION: str = "1.0.0"

    # Closed form vs first-principles comparisons
    REL_TOL: float = 1e-9
    ABS_TOL: float = 1e-12
    # Instanton, pluriclosed and balanced predicates (normalized coefficients)
    INSTANTON_TOL: float = 1e-10
    STATIONARY_TIE: float = 1e-12
    # Exterior and closed-form balanced residuals may straddle INSTANTON_TOL up to this factor
    BALANCED_BAND: float = 1e3

    # Integrators
    DEFAULT_DT: float = 1e-3
    DEFAULT_T_MAX: float = 10.0
    H_FLOOR: float = 1e-8
    DERIVATIVE_CEILING: float = 1e8
    MAX_STEP_HALVINGS: int = 40
    COLLAPSE_RATIO: float = 1e-2

    # Verification runs
    VERIFY_DRAWS: int = 100
    DEFAULT_SEED: int = 20240101

    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = "nilflow.log"

    @field_validator("REL_TOL", "ABS_TOL", "INSTANTON_TOL", "STATIONARY_TIE", "H_FLOOR", "COLLAPSE_RATIO")
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        """Validates that a tolerance is strictly positive and below one"""
        if not 0 < v < 1:
            raise ValueError("tolerances must lie in (0, 1)")
        return v

    @field_validator("DEFAULT_DT", "DEFAULT_T_MAX", "DERIVATIVE_CEILING", "BALANCED_BAND")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Validates that step sizes and ceilings are positive"""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("MAX_STEP_HALVINGS", "VERIFY_DRAWS")
    @classmethod
    def validate_count(cls, v: int) -> int:
        """Validates that counters are non-negative"""
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validates the log level name"""
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {v}")
        return level

    model_config = ConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True
    )


# Create global settings instance
settings = Settings()

# Configure logging
logging.basicConfig(
    level=settings.LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(),
        logging.FileHandler(settings.LOG_FILE)
    ]
)

logger = logging.getLogger(__name__)
