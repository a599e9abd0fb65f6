import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from app.config import Config

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_configured = False


def setup_logging(level: str = None):
    """Setup structured logging for the application.

    Console output goes to stderr so stdout stays free for JSON documents.
    """
    global _configured
    log_level = getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO)

    logger = logging.getLogger()
    logger.setLevel(log_level)
    if _configured:
        return logger

    # Create logs directory if it doesn't exist
    log_file = Config.LOG_FILE
    log_dir = os.path.dirname(log_file)
    if log_dir and not os.path.exists(log_dir):
        os.makedirs(log_dir, exist_ok=True)

    formatter = logging.Formatter(LOG_FORMAT)

    # Console handler
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # File handler with rotation
    if Config.LOG_ROTATION:
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=Config.LOG_MAX_SIZE * 1024 * 1024,  # MB to bytes
            backupCount=Config.LOG_BACKUP_COUNT,
        )
    else:
        file_handler = logging.FileHandler(log_file)
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    _configured = True
    logging.info(f"Logging initialized at level {logging.getLevelName(log_level)}")
    return logger


def get_logger(name):
    """Get a named logger."""
    return logging.getLogger(name)
