"""Analytic descriptors for the weight and smoothness sequences of a kernel family.

Every closed-form kind is a special case of

    s_j = c * rho**j * ln(j + 1)**gamma * j**(-beta),    j = 1, 2, ...

which is what the tractability classifiers reason about.  Tabulated sequences
carry a finite prefix and optionally a closed-form tail rule; without one they
are padded by their last value when a concrete term is needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import ParameterDomainError

KINDS = ("constant", "power", "logpower", "exp", "tabulated")

_ALIASES = {
    "const": "constant",
    "constant": "constant",
    "power": "power",
    "powerlaw": "power",
    "power_law": "power",
    "logpower": "logpower",
    "log_power": "logpower",
    "exp": "exp",
    "expgrowth": "exp",
    "exp_growth": "exp",
    "tabulated": "tabulated",
    "table": "tabulated",
}


@dataclass(frozen=True)
class SequenceFamily:
    kind: str
    c: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0
    rho: float = 1.0
    table: tuple[float, ...] = ()
    tail: SequenceFamily | None = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterDomainError(f"unknown sequence kind {self.kind!r}")
        if self.kind == "tabulated":
            if not self.table:
                raise ParameterDomainError("tabulated sequence needs at least one value")
            if any(not (v > 0 and math.isfinite(v)) for v in self.table):
                raise ParameterDomainError("tabulated sequence values must be positive and finite")
            if self.tail is not None and self.tail.kind == "tabulated":
                raise ParameterDomainError("tail rule of a tabulated sequence must be closed form")
        else:
            if not (self.c > 0 and math.isfinite(self.c)):
                raise ParameterDomainError(f"sequence scale c must be positive, got {self.c}")
            if not (self.rho > 0 and math.isfinite(self.rho)):
                raise ParameterDomainError(f"sequence ratio rho must be positive, got {self.rho}")

    # constructors -------------------------------------------------------

    @classmethod
    def constant(cls, c: float) -> SequenceFamily:
        return cls("constant", c=float(c))

    @classmethod
    def power_law(cls, c: float, beta: float) -> SequenceFamily:
        """``c * j**(-beta)``; negative ``beta`` gives polynomial growth."""
        return cls("power", c=float(c), beta=float(beta))

    @classmethod
    def log_power(cls, c: float, gamma: float, beta: float = 0.0) -> SequenceFamily:
        return cls("logpower", c=float(c), gamma=float(gamma), beta=float(beta))

    @classmethod
    def exp_growth(cls, c: float, rho: float) -> SequenceFamily:
        return cls("exp", c=float(c), rho=float(rho))

    @classmethod
    def tabulated(cls, values: Sequence[float], tail: SequenceFamily | None = None) -> SequenceFamily:
        return cls("tabulated", table=tuple(float(v) for v in values), tail=tail)

    # evaluation ---------------------------------------------------------

    def closed_form(self) -> tuple[float, float, float, float] | None:
        """Parameters ``(c, rho, gamma, beta)`` governing the asymptotics, if known."""
        if self.kind == "tabulated":
            return self.tail.closed_form() if self.tail is not None else None
        return (self.c, self.rho, self.gamma, self.beta)

    def value(self, j: int) -> float:
        if j < 1:
            raise ValueError("sequence index starts at 1")
        if self.kind == "tabulated":
            if j <= len(self.table):
                return self.table[j - 1]
            if self.tail is not None:
                return self.tail.value(j)
            return self.table[-1]
        c, rho, gamma, beta = self.closed_form()
        return c * rho**j * math.log(j + 1) ** gamma * j ** (-beta)

    def values(self, n: int) -> np.ndarray:
        """First ``n`` terms as an array (index 0 holds s_1)."""
        if self.kind == "tabulated":
            return np.array([self.value(j) for j in range(1, n + 1)], dtype=float)
        c, rho, gamma, beta = self.closed_form()
        j = np.arange(1, n + 1, dtype=float)
        # log domain keeps exp growth from overflowing early
        with np.errstate(over="ignore", divide="ignore"):
            logs = math.log(c) + j * math.log(rho) + gamma * np.log(np.log(j + 1)) - beta * np.log(j)
            return np.exp(logs)

    def describe(self) -> str:
        if self.kind == "constant":
            return f"{self.c:g}"
        if self.kind == "power":
            return f"{self.c:g}*j^{-self.beta:g}"
        if self.kind == "logpower":
            return f"{self.c:g}*ln(j+1)^{self.gamma:g}*j^{-self.beta:g}"
        if self.kind == "exp":
            return f"{self.c:g}*{self.rho:g}^j"
        tail = f", tail={self.tail.describe()}" if self.tail is not None else ""
        return f"table[{len(self.table)}]{tail}"

    # parsing ------------------------------------------------------------

    @classmethod
    def parse(cls, spec: Any) -> SequenceFamily:
        """Build from a number, a list, a mapping or a ``kind:key=val,...`` string."""
        if isinstance(spec, SequenceFamily):
            return spec
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            return cls.constant(spec)
        if isinstance(spec, (list, tuple)):
            return cls.tabulated(spec)
        if isinstance(spec, Mapping):
            return cls._from_mapping(dict(spec))
        if isinstance(spec, str):
            head, _, rest = spec.partition(":")
            params: dict[str, Any] = {"kind": head.strip()}
            for item in filter(None, (s.strip() for s in rest.split(","))):
                key, eq, val = item.partition("=")
                if not eq:
                    raise ParameterDomainError(f"malformed sequence parameter {item!r} in {spec!r}")
                params[key.strip()] = float(val)
            return cls._from_mapping(params)
        raise ParameterDomainError(f"cannot interpret sequence spec {spec!r}")

    @classmethod
    def _from_mapping(cls, params: dict) -> SequenceFamily:
        kind = _ALIASES.get(str(params.pop("kind", "")).lower())
        if kind is None:
            raise ParameterDomainError(f"unknown sequence kind in {params!r}")
        try:
            if kind == "constant":
                return cls.constant(params.pop("c"))
            if kind == "power":
                return cls.power_law(params.pop("c", 1.0), params.pop("beta"))
            if kind == "logpower":
                return cls.log_power(params.pop("c", 1.0), params.pop("gamma"), params.pop("beta", 0.0))
            if kind == "exp":
                return cls.exp_growth(params.pop("c", 1.0), params.pop("rho"))
            tail = params.pop("tail", None)
            return cls.tabulated(params.pop("values"), cls.parse(tail) if tail is not None else None)
        except KeyError as exc:
            raise ParameterDomainError(f"sequence kind {kind!r} is missing field {exc.args[0]!r}") from None

    def to_dict(self) -> dict:
        if self.kind == "tabulated":
            out: dict = {"kind": "tabulated", "values": list(self.table)}
            if self.tail is not None:
                out["tail"] = self.tail.to_dict()
            return out
        out = {"kind": self.kind, "c": self.c}
        if self.kind in ("power", "logpower"):
            out["beta"] = self.beta
        if self.kind == "logpower":
            out["gamma"] = self.gamma
        if self.kind == "exp":
            out["rho"] = self.rho
        return out
