"""
Configuration settings for wrightlevy
"""
import os

from pydantic_settings import BaseSettings as PydanticBaseSettings


class Settings(PydanticBaseSettings):
    # CLI program name and log file stem
    PROJECT_NAME: str = os.getenv("PROJECT_NAME", "wrightlevy")

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Default seed for simulation and `verify` runs
    WRIGHTLEVY_SEED: int = int(os.getenv("WRIGHTLEVY_SEED", "20240101"))

    # Series evaluation
    SERIES_TERM_CAP: int = int(os.getenv("SERIES_TERM_CAP", "20000"))
    DEFAULT_TOL: float = float(os.getenv("DEFAULT_TOL", "1e-12"))
    POLE_THRESHOLD: float = 1e-6
    # Ceiling for the extended-precision fallback (decimal digits)
    MAX_WORKING_DPS: int = int(os.getenv("MAX_WORKING_DPS", "400"))

    # Root finding
    BISECTION_XTOL: float = 1e-12

    # Inner 1Psi1 memo used by the transition density
    INNER_CACHE_SIZE: int = int(os.getenv("INNER_CACHE_SIZE", "4096"))

    # Significant digits for CSV output
    OUTPUT_DIGITS: int = 17

    model_config = {
        "case_sensitive": True,
        "env_file": ".env",  # Use pydantic-settings built-in .env loading
        "extra": "ignore",
    }


settings = Settings()
