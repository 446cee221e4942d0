import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

from dotenv import load_dotenv

PROJECT_ROOT = Path(__file__).resolve().parent.parent
load_dotenv(dotenv_path=PROJECT_ROOT / "instance" / ".env")

LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _env_path(name: str, default: Path | None) -> Path | None:
    value = os.getenv(name)
    if value:
        return Path(value).expanduser()
    return default


class Config:
    APP_VERSION = os.getenv("APP_VERSION", "v_1.0.0")
    JSON_SORT_KEYS = False

    DATA_DIR = _env_path("TAXFRAME_DATA_DIR", PROJECT_ROOT / "fixtures" / "idn2016-synthetic")
    SECTORS_FILE = os.getenv("TAXFRAME_SECTORS_FILE", "sectors.csv")
    HOUSEHOLDS_FILE = os.getenv("TAXFRAME_HOUSEHOLDS_FILE", "households.csv")
    POPULATION_WEIGHTS = os.getenv("TAXFRAME_POPULATION_WEIGHTS", "")

    # Published IO tables are rounded, so balances are only checked to 0.5%.
    BALANCE_TOLERANCE = float(os.getenv("TAXFRAME_BALANCE_TOLERANCE", "0.005"))
    RESIDUAL_TOLERANCE = 1e-9
    NEGATIVITY_TOLERANCE = 1e-10
    CONSUMPTION_SHARE_SLACK = 1e-12
    SPECTRAL_ITERATIONS = int(os.getenv("TAXFRAME_SPECTRAL_ITERATIONS", "100"))
    SPECTRAL_THRESHOLD = 1 - 1e-9
    WEIGHT_TOLERANCE = 1e-12

    DEFAULT_TAX_RATE = 30.0  # Rp per kg CO2e
    DEFAULT_PASS_THROUGH = 1.0
    REGRESSIVITY_THRESHOLD = 0.5

    SCENARIO_RATE_LIMIT = os.getenv("TAXFRAME_SCENARIO_RATE_LIMIT", "30 per minute")
    RATELIMIT_ENABLED = True
    RATELIMIT_STORAGE_URI = os.getenv("RATELIMIT_STORAGE_URI", "memory://")

    LOG_DIR = _env_path("TAXFRAME_LOG_DIR", None)
    LOG_FILE = "taxframe.log"
    LOG_LEVEL = os.getenv("MIYAZAWA_LOG", "warn").lower()
    LOG_MAX_BYTES = int(os.getenv("LOG_MAX_BYTES", "10485760"))
    LOG_BACKUP_COUNT = int(os.getenv("LOG_BACKUP_COUNT", "5"))

    @classmethod
    def log_level(cls) -> int:
        level = os.getenv("MIYAZAWA_LOG", cls.LOG_LEVEL).lower()
        return LOG_LEVELS.get(level, logging.WARNING)

    @classmethod
    def _handlers(cls) -> list[logging.Handler]:
        formatter = logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT)
        stream = logging.StreamHandler(sys.stderr)
        stream.setFormatter(formatter)
        handlers: list[logging.Handler] = [stream]
        if cls.LOG_DIR is not None:
            cls.LOG_DIR.mkdir(parents=True, exist_ok=True)
            rotating = RotatingFileHandler(
                cls.LOG_DIR / cls.LOG_FILE,
                maxBytes=cls.LOG_MAX_BYTES,
                backupCount=cls.LOG_BACKUP_COUNT,
            )
            rotating.setFormatter(formatter)
            handlers.append(rotating)
        return handlers

    @classmethod
    def init_logging(cls) -> logging.Logger:
        logger = logging.getLogger("taxframe")
        level = cls.log_level()
        logger.setLevel(level)
        # Re-running the CLI in one process must not stack handlers.
        for handler in list(logger.handlers):
            if getattr(handler, "_taxframe", False):
                logger.removeHandler(handler)
                handler.close()
        for handler in cls._handlers():
            handler.setLevel(level)
            handler._taxframe = True
            logger.addHandler(handler)
        return logger

    @classmethod
    def init_app(cls, app):
        # app.logger is the "taxframe" logger, so init_logging already covers it.
        cls.init_logging()
        app.logger.setLevel(cls.log_level())


class DevelopmentConfig(Config):
    DEBUG = True


class ProductionConfig(Config):
    DEBUG = False


class TestingConfig(Config):
    TESTING = True
    RATELIMIT_ENABLED = False
