"""Exception hierarchy shared by every module of the package."""


class KaczmarzError(Exception):
    """Base class for all package errors."""


class ZeroRowError(KaczmarzError, ValueError):
    """A row with (numerically) zero norm cannot be standardized."""


class BadBlockCount(KaczmarzError, ValueError):
    """Requested number of paving blocks is outside ``1..n_rows``."""


class ObtusifyFailed(KaczmarzError, RuntimeError):
    """The sign-flip sweep hit its pass cap with positive pairs remaining.

    The partially flipped system is kept on ``system`` and the number of
    remaining positive pairs on ``positive_pairs``.
    """

    def __init__(self, message, system=None, positive_pairs=None):
        super().__init__(message)
        self.system = system
        self.positive_pairs = positive_pairs


class NotConverged(KaczmarzError, RuntimeError):
    """Solver exhausted its iteration budget; carries the final iterate and trace."""

    def __init__(self, message, x=None, trace=None):
        super().__init__(message)
        self.x = x
        self.trace = trace


class InvalidParams(KaczmarzError, ValueError):
    """Rate parameters missing or yielding a factor outside ``[0, 1)``."""


class RankDeficient(KaczmarzError, ValueError):
    """Matrix is not of full column rank where that is required."""


class OracleNotConverged(KaczmarzError, RuntimeError):
    """Dykstra projection did not settle within ``max_sweeps``."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
