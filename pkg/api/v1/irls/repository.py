import numpy as np
import pandas as pd

from utils.file import FileUtils
from api.v1.hankel.repository import GeneratorRepository
from .schema import IrlsReport


class IrlsRepository:
    """Writes solver output: the recovered generator and the iteration report."""

    REPORT_COLUMNS = ["iter", "objective", "eps", "change"]

    def __init__(self):
        self.generator_repository = GeneratorRepository()

    def report_frame(self, report: IrlsReport) -> pd.DataFrame:
        return pd.DataFrame({
            "iter": np.arange(1, report.outer_iters + 1),
            "objective": report.objective_history,
            "eps": report.eps_history,
            "change": report.iterate_change_history,
        }, columns=self.REPORT_COLUMNS)

    def write_report(self, path: str, report: IrlsReport) -> str:
        return FileUtils.write_table(path, self.report_frame(report))

    def read_report(self, path: str) -> pd.DataFrame:
        return FileUtils.read_numeric_table(path, self.REPORT_COLUMNS)
