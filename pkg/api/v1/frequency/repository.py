import pandas as pd

from utils.file import FileUtils
from .schema import FreqEstimate


class FrequencyRepository:
    """FreqEstimate as CSV ``method,f_1,...,f_r``, one row per estimate."""

    def estimate_frame(self, *estimates: FreqEstimate) -> pd.DataFrame:
        r = max(estimate.freqs.size for estimate in estimates)
        columns = ["method"] + [f"f_{i}" for i in range(1, r + 1)]
        rows = [[estimate.method, *estimate.freqs.tolist()] for estimate in estimates]
        return pd.DataFrame(rows, columns=columns)

    def write_estimates(self, path: str, *estimates: FreqEstimate) -> str:
        return FileUtils.write_table(path, self.estimate_frame(*estimates))
