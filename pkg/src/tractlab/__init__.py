"""Spectra, information complexity, tractability and sampling recovery for periodic Korobov-type kernels."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ComplexityCapExceeded,
    ParameterDomainError,
    RankDeficiencyError,
    SpectrumOverflowError,
    SubsampleFailure,
    TruncationError,
)
from .model import Family, KernelModel, load_model  # noqa: E402
from .sequences import SequenceFamily  # noqa: E402
