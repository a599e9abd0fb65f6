from typing import Tuple, Optional
from app.config import Config


class ConfigValidator:
    """Validator for application configuration."""

    @staticmethod
    def validate() -> Tuple[bool, Optional[str]]:
        """Validate configuration values.

        Returns:
            Tuple of (is_valid, error_message)
        """
        if Config.REPORT_FORMAT not in ["json", "text", "html", "both"]:
            return (
                False,
                f"REPORT_FORMAT must be 'json', 'text', 'html', or 'both', got '{Config.REPORT_FORMAT}'",
            )

        if Config.LOG_LEVEL not in ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]:
            return (
                False,
                f"LOG_LEVEL must be one of: DEBUG, INFO, WARNING, ERROR, CRITICAL, got '{Config.LOG_LEVEL}'",
            )

        if Config.MC_TRIALS < 1:
            return False, f"MC_TRIALS must be at least 1, got {Config.MC_TRIALS}"

        if Config.MC_MAX_STEPS < 1:
            return False, f"MC_MAX_STEPS must be at least 1, got {Config.MC_MAX_STEPS}"

        if Config.MC_BLOCK_SIZE < 1:
            return (
                False,
                f"MC_BLOCK_SIZE must be at least 1, got {Config.MC_BLOCK_SIZE}",
            )

        if not (1 <= Config.BRUTE_FORCE_GUARD <= 2**40):
            return (
                False,
                f"BRUTE_FORCE_GUARD must be between 1 and 2**40, got {Config.BRUTE_FORCE_GUARD}",
            )

        if not (0 <= Config.RATIO_SLACK < 1):
            return (
                False,
                f"RATIO_SLACK must be in [0, 1), got {Config.RATIO_SLACK}",
            )

        if Config.JOBS < 1:
            return False, f"JOBS must be at least 1, got {Config.JOBS}"

        return True, None
