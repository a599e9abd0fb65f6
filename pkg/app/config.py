"""
Configuration management for interdict.
Handles loading and validation of environment variables.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load .env file from project root
project_root = Path(__file__).parent.parent
env_path = project_root / ".env"
load_dotenv(dotenv_path=env_path)


class Config:
    """Application configuration loaded from environment variables."""

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()
    LOG_FILE: str = os.getenv("LOG_FILE", "logs/interdict.log")
    LOG_ROTATION: bool = os.getenv("LOG_ROTATION", "true").lower() == "true"
    LOG_MAX_SIZE: int = int(os.getenv("LOG_MAX_SIZE", "10"))
    LOG_BACKUP_COUNT: int = int(os.getenv("LOG_BACKUP_COUNT", "5"))

    # Monte Carlo
    MC_TRIALS: int = int(os.getenv("MC_TRIALS", "100000"))
    MC_MAX_STEPS: int = int(os.getenv("MC_MAX_STEPS", "10000"))
    MC_BLOCK_SIZE: int = int(os.getenv("MC_BLOCK_SIZE", "4096"))

    # Exhaustive search
    BRUTE_FORCE_GUARD: int = int(os.getenv("BRUTE_FORCE_GUARD", str(2**24)))

    # Report Configuration
    REPORT_FORMAT: str = os.getenv("REPORT_FORMAT", "json").lower()
    RATIO_SLACK: float = float(os.getenv("RATIO_SLACK", "1e-9"))
    FAMILIES_FILE: str = os.getenv("FAMILIES_FILE", "families.yaml")
    JOBS: int = int(os.getenv("JOBS", "1"))

    # Run history (empty disables)
    HISTORY_DB: str = os.getenv("HISTORY_DB", "data/interdict_history.db")

    @classmethod
    def validate(cls) -> tuple:
        """Validate configuration values."""
        from app.config_validator import ConfigValidator

        return ConfigValidator.validate()

    @classmethod
    def get_summary(cls) -> dict:
        """Get configuration summary."""
        return {
            "log_level": cls.LOG_LEVEL,
            "log_file": cls.LOG_FILE,
            "log_rotation": cls.LOG_ROTATION,
            "mc_trials": cls.MC_TRIALS,
            "mc_max_steps": cls.MC_MAX_STEPS,
            "mc_block_size": cls.MC_BLOCK_SIZE,
            "brute_force_guard": cls.BRUTE_FORCE_GUARD,
            "report_format": cls.REPORT_FORMAT,
            "ratio_slack": cls.RATIO_SLACK,
            "families_file": cls.FAMILIES_FILE,
            "jobs": cls.JOBS,
            "history_enabled": bool(cls.HISTORY_DB),
        }
