import io
import os
from typing import List, Optional
import pandas as pd

from core.exceptions import InputError


class FileUtils:
    """CSV helpers shared by the feature repositories."""

    FLOAT_FORMAT = "%.17g"

    @staticmethod
    def read_numeric_table(path: str, columns: List[str], header_token: Optional[str] = None) -> pd.DataFrame:
        """Read a headerless-or-headed numeric CSV into named float columns.

        Args:
            path (str): File location.
            columns (list): Expected column names, in file order.
            header_token (str): First cell of an optional header row.

        Returns:
            pd.DataFrame: One float column per entry of ``columns``.

        Raises:
            InputError: If the file is missing, has the wrong width or
                non-numeric cells.
        """
        if not os.path.isfile(path):
            raise InputError(f"File not found: {path}")
        try:
            frame = pd.read_csv(path, header=None, dtype=str, comment="#", skipinitialspace=True)
        except pd.errors.EmptyDataError:
            raise InputError(f"{path}: file is empty")
        except pd.errors.ParserError as e:
            raise InputError(f"{path}: malformed CSV ({e})")

        header_token = header_token or columns[0]
        if str(frame.iloc[0, 0]).strip().lower() == header_token:
            frame = frame.iloc[1:]
        if frame.empty:
            raise InputError(f"{path}: no data rows")
        if frame.shape[1] != len(columns):
            raise InputError(f"{path}: expected {len(columns)} columns, found {frame.shape[1]}")

        frame.columns = columns
        try:
            # float() rounds correctly, so %.17g text comes back bit-exact
            numeric = frame.apply(lambda col: col.str.strip().map(float)).astype(float)
        except (ValueError, TypeError, AttributeError) as e:
            raise InputError(f"{path}: non-numeric value ({e})")
        if numeric.isna().any().any():
            raise InputError(f"{path}: missing values")
        return numeric.reset_index(drop=True)

    @staticmethod
    def write_table(path: str, frame: pd.DataFrame, header_line: Optional[str] = None) -> str:
        """Write ``frame`` as CSV, optionally preceded by a ``#`` comment line.

        Returns:
            str: The text that was written.
        """
        buffer = io.StringIO()
        if header_line:
            buffer.write(f"# {header_line}\n")
        frame.to_csv(buffer, index=False, float_format=FileUtils.FLOAT_FORMAT, lineterminator="\n")
        text = buffer.getvalue()
        if path:
            directory = os.path.dirname(os.path.abspath(path))
            os.makedirs(directory, exist_ok=True)
            with open(path, "w", newline="") as handle:
                handle.write(text)
        return text
