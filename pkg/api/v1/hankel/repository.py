import numpy as np
import pandas as pd

from core.exceptions import InputError
from utils.file import FileUtils
from .schema import Generator, as_generator


class GeneratorRepository:
    """Generators on disk as CSV rows ``index,re,im`` (header optional)."""

    COLUMNS = ["index", "re", "im"]

    def read_generator(self, path: str) -> Generator:
        frame = FileUtils.read_numeric_table(path, self.COLUMNS)
        index = frame["index"].to_numpy()
        if not np.all(index == np.round(index)):
            raise InputError(f"{path}: indices must be integers")
        order = np.argsort(index, kind="stable")
        index = index[order].astype(int)
        if not np.array_equal(index, np.arange(len(index))):
            raise InputError(f"{path}: indices must be exactly 0..{len(index) - 1}")
        values = frame["re"].to_numpy()[order] + 1j * frame["im"].to_numpy()[order]
        return as_generator(values)

    def write_generator(self, path: str, z: Generator) -> str:
        z = as_generator(z)
        frame = pd.DataFrame({"index": np.arange(len(z)), "re": z.real, "im": z.imag})
        return FileUtils.write_table(path, frame)
