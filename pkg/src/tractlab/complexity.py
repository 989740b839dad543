"""Minimal errors and information complexity for L-infinity approximation.

With arbitrary linear information the n-th minimal error is

    a_{n+1} = (sum_{k > n} lambda_k) ** 0.5,

so everything here reduces to eigenvalue tails.  For function values we only
evaluate the upper bound n(eps; std) <= 2 c1 n(eps / c2; all).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import ComplexityCapExceeded, ParameterDomainError
from .model import KernelModel
from .spectrum import Spectrum, shared_spectrum

DEFAULT_CAP = 10**7
DEFAULT_C1 = 43200
DEFAULT_C2 = 30.0


class Criterion(str, Enum):
    ABS = "abs"
    NOR = "nor"

    @classmethod
    def parse(cls, value) -> Criterion:
        if isinstance(value, Criterion):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterDomainError(f"unknown error criterion {value!r} (use abs or nor)") from None


def _spectrum(obj) -> Spectrum:
    if isinstance(obj, Spectrum):
        return obj
    if isinstance(obj, KernelModel):
        return shared_spectrum(obj)
    raise TypeError(f"expected KernelModel or Spectrum, got {type(obj).__name__}")


def initial_error(obj) -> float:
    return math.sqrt(_spectrum(obj).trace)


def criterion_scale(obj, criterion) -> float:
    """CRI_d: 1 for the absolute criterion, the initial error for the normalized one."""
    if Criterion.parse(criterion) is Criterion.ABS:
        return 1.0
    return initial_error(obj)


def approx_number(obj, n: int) -> float:
    """a_{n+1}, the minimal worst-case error of rank-n linear algorithms."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return math.sqrt(_spectrum(obj).tail(n))


def lq_error_bound(model: KernelModel, n: int, q: float) -> float:
    """Upper bound (sum_{k>n} lambda_k^{q/(q-2)})^{(q-2)/(2q)} for the L_q error, 2 < q < inf."""
    if not q > 2:
        raise ParameterDomainError(f"q must exceed 2, got {q}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    s = q / (q - 2.0)
    tail = shared_spectrum(model.powered(s)).tail(n)
    return tail ** ((q - 2.0) / (2.0 * q))


def info_complexity(obj, epsilon: float, criterion="abs", cap: int = DEFAULT_CAP) -> int:
    """Smallest n with a_{n+1} <= epsilon * CRI_d.

    Tails are generated in geometrically growing blocks until the threshold is
    met, then the first crossing is located inside the block.  Raises
    ``ComplexityCapExceeded`` if no n <= cap works.
    """
    if not epsilon > 0:
        raise ParameterDomainError(f"epsilon must be positive, got {epsilon}")
    spec = _spectrum(obj)
    threshold = epsilon * criterion_scale(spec, criterion)
    if math.sqrt(spec.trace) <= threshold:
        return 0
    done = 0
    block = 256
    while done < cap:
        upto = min(cap, done + block)
        seg = np.sqrt(spec.tail_slice(done + 1, upto + 1))
        hit = np.flatnonzero(seg <= threshold)
        if hit.size:
            return done + 1 + int(hit[0])
        done = upto
        block *= 2
    raise ComplexityCapExceeded(cap, spec.tail(cap), threshold**2)


def std_complexity_bound(obj, epsilon: float, criterion="abs", c1: float = DEFAULT_C1,
                         c2: float = DEFAULT_C2, cap: int = DEFAULT_CAP) -> int:
    """Upper bound 2 * c1 * n(epsilon / c2; all) on the complexity with function values."""
    if not c1 >= 1 or not c2 >= 1:
        raise ParameterDomainError(f"constants must satisfy c1 >= 1 and c2 >= 1, got c1={c1}, c2={c2}")
    n_all = info_complexity(obj, epsilon / c2, criterion, cap=cap)
    return int(math.ceil(2 * c1 * n_all))


@dataclass
class ComplexityResult:
    epsilon: float
    d: int
    criterion: Criterion
    n_all: int | None
    n_std_bound: int | None
    a_next: float | None = None  # a_{n_all + 1}
    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2
    status: str = "ok"
    detail: dict = field(default_factory=dict)


def complexity_table(model: KernelModel, epsilons: Iterable[float], criterion="abs",
                     c1: float = DEFAULT_C1, c2: float = DEFAULT_C2,
                     cap: int = DEFAULT_CAP) -> list[ComplexityResult]:
    """One result per epsilon.  Cap overruns are reported in-row instead of raised."""
    crit = Criterion.parse(criterion)
    spec = shared_spectrum(model)
    rows = []
    for eps in epsilons:
        res = ComplexityResult(float(eps), model.d, crit, None, None, c1=c1, c2=c2)
        try:
            res.n_all = info_complexity(spec, eps, crit, cap=cap)
            res.a_next = approx_number(spec, res.n_all)
        except ComplexityCapExceeded as exc:
            res.status = "cap_exceeded"
            res.detail = {"cap": exc.cap, "tail_at_cap": exc.tail_at_cap}
            rows.append(res)
            continue
        try:
            res.n_std_bound = std_complexity_bound(spec, eps, crit, c1=c1, c2=c2, cap=cap)
        except ComplexityCapExceeded as exc:
            res.status = "std_cap_exceeded"
            res.detail = {"cap": exc.cap, "tail_at_cap": exc.tail_at_cap}
        rows.append(res)
    return rows
