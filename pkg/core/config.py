import os
from typing import Dict, Optional
from dotenv import load_dotenv, dotenv_values
from pydantic_settings import BaseSettings, SettingsConfigDict

from core.exceptions import InputError

load_dotenv()

VERSION = "0.1.0"


class Settings(BaseSettings):
    """
    Consists of system wide configuration settings
    """
    model_config = SettingsConfigDict(env_prefix="STRUCHMIRLS_", extra="ignore")

    LOG_LEVEL: str = "INFO"
    SEED: int = 0
    WORKERS: int = 1
    SHOW_PROGRESS: bool = True

    # solver defaults
    DECAY_ALPHA: float = 0.9
    TOL: float = 1e-6
    MAX_OUTER: int = 500
    CG_TOL: float = 1e-10
    OVERSAMPLING: int = 10
    POWER_ITERS: int = 2
    EPS_FLOOR: float = 1e-10

    # experiments
    SUCCESS_THRESHOLD: float = 1e-3

    # largest min(d1, d2) handled with dense SVDs
    DENSE_LIMIT: int = 256


settings = Settings()


def load_key_value_file(path: Optional[str]) -> Dict[str, str]:
    """Read a ``key=value`` configuration file.

    Keys are normalized to lower case with ``-`` replaced by ``_`` so that
    ``max-outer`` and ``MAX_OUTER`` address the same option.

    Args:
        path (str): Location of the file, or None.

    Returns:
        dict: Normalized keys mapped to their raw string values.
    """
    if not path:
        return {}
    if not os.path.isfile(path):
        raise InputError(f"Config file not found: {path}")
    values = dotenv_values(path)
    return {
        key.strip().lower().replace("-", "_"): value
        for key, value in values.items()
        if value is not None
    }
