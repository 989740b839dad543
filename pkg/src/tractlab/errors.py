"""Exception types shared across the package."""


class ParameterDomainError(ValueError):
    """A model or sequence parameter violates a required invariant."""


class SpectrumOverflowError(OverflowError):
    """The trace overflows float64; ``log_trace`` carries the usable value."""

    def __init__(self, log_trace):
        super().__init__(f"trace overflows float64 (log-trace = {log_trace:.17g})")
        self.log_trace = log_trace


class ComplexityCapExceeded(RuntimeError):
    """The information complexity exceeds the configured cap.

    ``tail_at_cap`` is the eigenvalue tail after ``cap`` terms and ``target`` the
    squared error level that was not reached, so the caller can report the bracket.
    """

    def __init__(self, cap, tail_at_cap, target):
        super().__init__(
            f"complexity exceeds cap {cap}: tail({cap}) = {tail_at_cap:.6g} > target {target:.6g}"
        )
        self.cap = cap
        self.tail_at_cap = tail_at_cap
        self.target = target


class TruncationError(RuntimeError):
    """A mode truncation cannot meet its accuracy target below the cap."""

    def __init__(self, message, required_k=None):
        super().__init__(message)
        self.required_k = required_k


class RankDeficiencyError(RuntimeError):
    """The least-squares design matrix is numerically rank deficient."""


class SubsampleFailure(RuntimeError):
    """Subsampling could not reach the requested frame bounds."""

    def __init__(self, message, certificate):
        super().__init__(message)
        self.certificate = certificate
