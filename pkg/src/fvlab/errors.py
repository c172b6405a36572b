"""Exception types raised across fvlab."""


class InvalidMeshError(ValueError):
    """Coordinates do not describe a valid partition of [0, 1]."""


class MeshFormatError(ValueError):
    """A mesh text file could not be parsed."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class CapacityError(RuntimeError):
    """A dense diagnostic was requested on a problem that is too large."""


class ConvergenceError(RuntimeError):
    """An iterative solve stopped without reaching its tolerance.

    The partial :class:`~fvlab.solver.SolveReport` is attached as ``report``.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class StudyAborted(RuntimeError):
    """A convergence study failed at some level; ``rows`` holds the finished levels."""

    def __init__(self, message, rows, level, report=None):
        super().__init__(message)
        self.rows = rows
        self.level = level
        self.report = report
