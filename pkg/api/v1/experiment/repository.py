import pandas as pd

from core.config import VERSION
from utils.file import FileUtils


class ExperimentRepository:
    """Experiment grids as long-format CSV behind a ``# struchmirls v..., seed=...`` line."""

    def write_grid(self, path: str, frame: pd.DataFrame, seed: int) -> str:
        return FileUtils.write_table(path, frame, header_line=f"struchmirls v{VERSION}, seed={seed}")

    def read_grid(self, path: str) -> pd.DataFrame:
        return pd.read_csv(path, comment="#")
