class InputError(ValueError):
    """Invalid shapes, indices, files or violated preconditions."""

    exit_code = 2


class SolverError(RuntimeError):
    """Numerical failure inside a solver (non-finite values, indefinite operators)."""

    exit_code = 1


class EstimationError(SolverError):
    """Frequency retrieval could not be carried out on the given signal."""
