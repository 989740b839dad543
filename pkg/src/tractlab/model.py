"""Kernel model descriptions and model-file I/O."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import ParameterDomainError
from .sequences import SequenceFamily


class Family(str, Enum):
    WEIGHTED_KOROBOV = "weighted_korobov"
    EXP_KOROBOV = "exp_korobov"

    @classmethod
    def parse(cls, name: str) -> Family:
        key = str(name).replace("-", "_").replace(" ", "_").lower()
        aliases = {
            "weighted_korobov": cls.WEIGHTED_KOROBOV,
            "weightedkorobov": cls.WEIGHTED_KOROBOV,
            "wk": cls.WEIGHTED_KOROBOV,
            "exp_korobov": cls.EXP_KOROBOV,
            "expkorobov": cls.EXP_KOROBOV,
            "ek": cls.EXP_KOROBOV,
        }
        if key not in aliases:
            raise ParameterDomainError(f"field 'family': unknown kernel family {name!r}")
        return aliases[key]


def _materialize(name: str, spec: Any, d: int) -> tuple[SequenceFamily, tuple[float, ...]]:
    seq = SequenceFamily.parse(spec)
    vals = tuple(float(v) for v in seq.values(d))
    if any(not math.isfinite(v) for v in vals):
        raise ParameterDomainError(f"field {name!r}: sequence is not finite on j = 1..{d}")
    return seq, vals


@dataclass(frozen=True)
class KernelModel:
    """Tensor-product periodic kernel: weighted Korobov ``(r, g)`` or exponential-weight ``(a, b, omega)``.

    Sequence fields hold the first ``d`` terms.  ``sequences`` keeps the analytic
    descriptors they came from, for the tractability classifiers.
    """

    family: Family
    d: int
    r: tuple[float, ...] = ()
    g: tuple[float, ...] = ()
    a: tuple[float, ...] = ()
    b: tuple[float, ...] = ()
    omega: float | None = None
    sequences: Mapping[str, SequenceFamily] = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.d, int) or isinstance(self.d, bool) or self.d < 1:
            raise ParameterDomainError(f"field 'd': dimension must be a positive integer, got {self.d!r}")
        if self.family is Family.WEIGHTED_KOROBOV:
            self._check_weighted()
        else:
            self._check_exp()

    def _check_weighted(self):
        r, g, d = self.r, self.g, self.d
        if len(r) != d or len(g) != d:
            raise ParameterDomainError("fields 'r' and 'g' must have d entries")
        if not 1.0 >= g[0]:
            raise ParameterDomainError(f"field 'g': requires 1 >= g_1, got g_1 = {g[0]}")
        for j in range(d):
            if not g[j] > 0:
                raise ParameterDomainError(f"field 'g': requires g_j > 0, got g_{j + 1} = {g[j]}")
            if j and not g[j - 1] >= g[j]:
                raise ParameterDomainError(f"field 'g': requires g nonincreasing, g_{j} < g_{j + 1}")
            if not r[j] > 0.5:
                raise ParameterDomainError(f"field 'r': requires r_j > 1/2, got r_{j + 1} = {r[j]}")
            if j and not r[j - 1] <= r[j]:
                raise ParameterDomainError(f"field 'r': requires r nondecreasing, r_{j} > r_{j + 1}")

    def _check_exp(self):
        a, b, d, om = self.a, self.b, self.d, self.omega
        if len(a) != d or len(b) != d:
            raise ParameterDomainError("fields 'a' and 'b' must have d entries")
        if om is None or not 0.0 < om < 1.0:
            raise ParameterDomainError(f"field 'omega': requires 0 < omega < 1, got {om}")
        for j in range(d):
            if not a[j] > 0:
                raise ParameterDomainError(f"field 'a': requires a_j > 0, got a_{j + 1} = {a[j]}")
            if j and not a[j - 1] <= a[j]:
                raise ParameterDomainError(f"field 'a': requires a nondecreasing, a_{j} > a_{j + 1}")
            if not b[j] > 0:
                raise ParameterDomainError(f"field 'b': requires b_j > 0 (inf b_j > 0), got b_{j + 1} = {b[j]}")

    # constructors -------------------------------------------------------

    @classmethod
    def weighted_korobov(cls, d: int, r: Any, g: Any) -> KernelModel:
        r_seq, r_vals = _materialize("r", r, d)
        g_seq, g_vals = _materialize("g", g, d)
        return cls(Family.WEIGHTED_KOROBOV, d, r=r_vals, g=g_vals, sequences={"r": r_seq, "g": g_seq})

    @classmethod
    def exp_korobov(cls, d: int, a: Any, b: Any, omega: float) -> KernelModel:
        a_seq, a_vals = _materialize("a", a, d)
        b_seq, b_vals = _materialize("b", b, d)
        return cls(Family.EXP_KOROBOV, d, a=a_vals, b=b_vals, omega=float(omega),
                   sequences={"a": a_seq, "b": b_seq})

    def with_dimension(self, d: int) -> KernelModel:
        if self.family is Family.WEIGHTED_KOROBOV:
            return KernelModel.weighted_korobov(d, self._seq("r"), self._seq("g"))
        return KernelModel.exp_korobov(d, self._seq("a"), self._seq("b"), self.omega)

    def _seq(self, name: str) -> SequenceFamily:
        if name in self.sequences:
            return self.sequences[name]
        return SequenceFamily.tabulated(getattr(self, name))

    def powered(self, s: float) -> KernelModel:
        """Model whose eigenvalues are this model's raised to the power ``s >= 1``.

        Ranks are unchanged because the map is increasing.
        """
        if self.family is Family.WEIGHTED_KOROBOV:
            return KernelModel(self.family, self.d, r=tuple(s * x for x in self.r),
                               g=tuple(x**s for x in self.g))
        return KernelModel(self.family, self.d, a=tuple(s * x for x in self.a), b=self.b, omega=self.omega)

    # serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"family": self.family.value, "d": self.d}
        if self.family is Family.WEIGHTED_KOROBOV:
            out["r"] = list(self.r)
            out["g"] = list(self.g)
        else:
            out["a"] = list(self.a)
            out["b"] = list(self.b)
            out["omega"] = self.omega
        return out

    @property
    def model_id(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return f"{self.family.value}-d{self.d}-{hashlib.sha256(blob).hexdigest()[:10]}"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> KernelModel:
        if "family" not in data:
            raise ParameterDomainError("field 'family' is required")
        family = Family.parse(data["family"])
        if "d" not in data:
            raise ParameterDomainError("field 'd' is required")
        d = data["d"]
        if not isinstance(d, int) or isinstance(d, bool):
            raise ParameterDomainError(f"field 'd': expected an integer, got {d!r}")
        if family is Family.WEIGHTED_KOROBOV:
            missing = [k for k in ("r", "g") if k not in data]
            if missing:
                raise ParameterDomainError(f"field {missing[0]!r} is required for weighted_korobov")
            return cls.weighted_korobov(d, data["r"], data["g"])
        missing = [k for k in ("a", "b", "omega") if k not in data]
        if missing:
            raise ParameterDomainError(f"field {missing[0]!r} is required for exp_korobov")
        omega = data["omega"]
        if not isinstance(omega, (int, float)) or isinstance(omega, bool):
            raise ParameterDomainError(f"field 'omega': expected a number, got {omega!r}")
        return cls.exp_korobov(d, data["a"], data["b"], omega)


def load_model(path: str | Path) -> KernelModel:
    """Read a model from a ``.toml`` or ``.json`` file."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParameterDomainError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    else:
        try:
            import tomllib  # type: ignore[import-not-found]
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            data = tomllib.loads(raw.decode())
        except tomllib.TOMLDecodeError as exc:
            raise ParameterDomainError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ParameterDomainError(f"{path}: top level must be a table")
    data = data.get("model", data)
    try:
        return KernelModel.from_dict(data)
    except ParameterDomainError as exc:
        raise ParameterDomainError(f"{path}: {exc}") from None


def dump_model(model: KernelModel, path: str | Path) -> None:
    path = Path(path)
    data = model.to_dict()
    for name, seq in model.sequences.items():
        if seq.kind != "tabulated":
            data[name] = seq.to_dict()
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return
    lines = []
    for key, val in data.items():
        lines.append(f"{key} = {_toml_value(val)}")
    path.write_text("\n".join(lines) + "\n")


def _toml_value(val: Any) -> str:
    if isinstance(val, str):
        return json.dumps(val)
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, (int, float)):
        return repr(val)
    if isinstance(val, Sequence):
        return "[" + ", ".join(_toml_value(v) for v in val) + "]"
    if isinstance(val, Mapping):
        return "{ " + ", ".join(f"{k} = {_toml_value(v)}" for k, v in val.items()) + " }"
    raise TypeError(f"cannot encode {val!r} as TOML")
