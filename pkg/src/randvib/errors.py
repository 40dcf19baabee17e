"""Exception types raised by the simulator.

Each maps to one CLI exit code (see :mod:`randvib.cli`).
"""


class ConfigurationError(ValueError):
    """Invalid parameters, unknown tags, or inconsistent inputs."""


class AlignmentError(ConfigurationError):
    """Trajectory and driving path do not share one grid."""


class UnsupportedOperationError(ConfigurationError):
    """The model lacks something an operation needs (e.g. a derivative chain)."""


class DivergenceError(RuntimeError):
    """The state became non-finite while stepping.

    ``step`` is the index of the grid interval being advanced and ``state``
    the last finite state before it.  ``trajectory`` is filled in by the
    harness with the records accumulated so far.
    """

    def __init__(self, message, step=None, state=None):
        super().__init__(message)
        self.step = step
        self.state = state
        self.trajectory = None


class JumpDivergenceError(DivergenceError):
    """The jump-path ODE blew up before reaching the jump size."""

    def __init__(self, message, reached=None, step=None, state=None):
        super().__init__(message, step=step, state=state)
        self.reached = reached


class SeriesDivergenceError(DivergenceError):
    """A partial sum of the jump-correction series is non-finite."""


class OutputError(OSError):
    """Writing an output file failed."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path
