"""Exception types raised across the package."""


class SumimoError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SumimoError, ValueError):
    """Bad sizes, ranges or incompatible configuration values."""


class NumericalDegeneracyError(SumimoError):
    """A Toeplitz system stopped being positive definite."""

    def __init__(self, order, error_var):
        self.order = order
        self.error_var = error_var
        super().__init__(
            f"prediction error variance {error_var!r} collapsed at order {order}"
        )


class NumericalFailureError(SumimoError):
    """A trellis recursion produced an all-zero row."""

    def __init__(self, index, stage="recursion"):
        self.index = index
        self.stage = stage
        super().__init__(f"all-zero {stage} row at trellis step {index}")


class InfiniteSinrError(SumimoError):
    """No interference and no noise: the SINR is unbounded."""


class UnreachableTargetError(SumimoError):
    """The requested SINR lies at or above the noiseless upper bound."""

    def __init__(self, target_db, ub_db):
        self.target_db = target_db
        self.ub_db = ub_db
        super().__init__(
            f"target SINR {target_db:.3f} dB is not below the upper bound {ub_db:.3f} dB"
        )


class DegenerateFrameError(SumimoError):
    """No decoder output qualified for the semi-analytic estimate."""
