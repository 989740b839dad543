"""Algebraic and exponential tractability of L-infinity approximation for the two kernel families.

Every verdict comes from an analytic criterion on the weight sequences, evaluated
symbolically on the closed form

    s_j = c * rho**j * ln(j + 1)**gamma * j**(-beta).

Sequences known only through a finite table fall back to ``estimate_liminf``,
which may support a Yes/No for liminf-type criteria and otherwise yields Unknown.

Comparison policy: if a criterion's quantity equals its threshold exactly, the
strict or non-strict inequality decides.  If it only agrees to within 1e-12
(relative) because it went through floating arithmetic, the verdict is Boundary.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .complexity import Criterion
from .errors import ParameterDomainError
from .model import Family, KernelModel
from .sequences import SequenceFamily

NEAR_TOL = 1e-12
POLY_DECAY_NOTE = "polynomial eigenvalue decay"


class Holds(str, Enum):
    YES = "yes"
    NO = "no"
    BOUNDARY = "boundary"
    UNKNOWN = "unknown"


class Mode(str, Enum):
    ALG = "alg"
    EXP = "exp"

    @classmethod
    def parse(cls, value) -> Mode:
        if isinstance(value, Mode):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterDomainError(f"unknown tractability mode {value!r} (use alg or exp)") from None


_NOTION_ORDER = ("spt", "pt", "qpt", "uwt", "wt")
_ST_RE = re.compile(r"^\(?\s*([0-9.eE+-]+)\s*,\s*([0-9.eE+-]+)\s*\)?$")


@dataclass(frozen=True)
class Notion:
    kind: str
    s: float | None = None
    t: float | None = None

    def __post_init__(self):
        if self.kind not in _NOTION_ORDER + ("st_wt",):
            raise ParameterDomainError(f"unknown tractability notion {self.kind!r}")
        if self.kind == "st_wt":
            if self.s is None or self.t is None or not (self.s > 0 and self.t > 0):
                raise ParameterDomainError("(s,t)-WT needs s > 0 and t > 0")

    @classmethod
    def st(cls, s: float, t: float) -> Notion:
        return cls("st_wt", float(s), float(t))

    @classmethod
    def parse(cls, text) -> Notion:
        """Accepts ``spt``, ``pt``, ``qpt``, ``uwt``, ``wt``, ``(s,t)-wt``, ``st_wt(s,t)`` or ``st_wt:s=..,t=..``."""
        if isinstance(text, Notion):
            return text
        key = str(text).strip().lower().replace("-", "_").replace(" ", "")
        if key in _NOTION_ORDER:
            return cls(key)
        for prefix in ("st_wt", "stwt"):
            if key.startswith(prefix):
                rest = key[len(prefix):].lstrip(":")
                if "=" in rest:
                    kv = dict(item.split("=", 1) for item in rest.split(","))
                    return cls.st(float(kv["s"]), float(kv["t"]))
                m = _ST_RE.match(rest)
                if m:
                    return cls.st(float(m.group(1)), float(m.group(2)))
        if key.endswith("_wt"):
            m = _ST_RE.match(key[:-3])
            if m:
                return cls.st(float(m.group(1)), float(m.group(2)))
        raise ParameterDomainError(f"cannot parse tractability notion {text!r}")

    @property
    def label(self) -> str:
        if self.kind == "st_wt":
            return f"({self.s:g},{self.t:g})-WT"
        return self.kind.upper()


@dataclass
class TractabilityVerdict:
    notion: Notion
    mode: Mode
    criterion: Criterion
    holds: Holds
    condition: str
    certificate: dict = field(default_factory=dict)

    def summary(self) -> str:
        parts = [f"{k}={_fmt(v)}" for k, v in self.certificate.items()]
        return "; ".join(parts)


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


# ---------------------------------------------------------------------------
# numeric liminf estimation for tabulated sequences


_TRANSFORMS = {
    "log_inv_over_log": lambda j, v: np.log(1.0 / v) / np.log(j),
    "over_log": lambda j, v: v / np.log(j),
    "log_over_j": lambda j, v: np.log(v) / j,
    "log_over_log": lambda j, v: np.log(v) / np.log(j),
    "identity": lambda j, v: v,
}


@dataclass(frozen=True)
class LiminfEstimate:
    estimate: float
    trend: str  # rising | falling | flat
    confidence: str  # high | medium | low
    window: tuple[int, int]
    slope: float


def estimate_liminf(values: Sequence[float], transform: str = "log_inv_over_log",
                    window: tuple[int, int] | None = None) -> LiminfEstimate:
    """Heuristic liminf of ``transform(j, v_j)`` from a finite table (``values[0]`` is j = 1).

    The estimate is the minimum over the second half of the window; the trend is
    the least-squares slope against ln j, scaled to the change it implies across
    the window.  A "flat" trend means that change is within 1% of the estimate.
    """
    if transform not in _TRANSFORMS:
        raise ValueError(f"unknown transform {transform!r}; choose from {sorted(_TRANSFORMS)}")
    v = np.asarray(values, dtype=float)
    n = v.size
    uses_log_j = transform != "log_over_j" and transform != "identity"
    if window is None:
        lo = max(2 if uses_log_j else 1, n // 10)
        window = (lo, n)
    j0, j1 = int(window[0]), int(window[1])
    if uses_log_j and j0 < 2:
        raise ValueError("window must start at j >= 2 for transforms dividing by ln j")
    if j0 < 1 or j1 > n or j1 < j0:
        raise ValueError(f"window {window} outside the table 1..{n}")
    if j1 - j0 + 1 < 8:
        raise ValueError("window too short: need at least 8 points")
    j = np.arange(j0, j1 + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = _TRANSFORMS[transform](j, v[j0 - 1 : j1])
    half = f[f.size // 2 :]
    est = float(np.min(half))
    x = np.log(j)
    slope = float(np.polyfit(x, f, 1)[0]) if np.all(np.isfinite(f)) else float("nan")
    change = slope * (x[-1] - x[0])
    scale = max(1.0, abs(est))
    if not math.isfinite(change):
        trend = "flat" if math.isinf(est) else "rising"
    elif abs(change) <= 0.01 * scale:
        trend = "flat"
    else:
        trend = "rising" if change > 0 else "falling"
    npts = f.size
    spread = float(np.max(half) - np.min(half)) if np.all(np.isfinite(half)) else float("inf")
    if trend != "flat" or npts < 32:
        confidence = "low"
    elif npts >= 1000 and spread <= 0.05 * scale:
        confidence = "high"
    else:
        confidence = "medium"
    return LiminfEstimate(est, trend, confidence, (j0, j1), slope)


def _numeric_decision(est: LiminfEstimate, threshold: float, strict: bool) -> Holds:
    if est.trend != "flat" or est.confidence == "low":
        return Holds.UNKNOWN
    margin = 0.05 * max(1.0, abs(threshold))
    if est.estimate >= threshold + margin:
        return Holds.YES
    if est.estimate <= threshold - margin:
        return Holds.NO
    return Holds.UNKNOWN


# ---------------------------------------------------------------------------
# asymptotics of the closed form c * rho^j * ln(j+1)^gamma * j^-beta


def _cmp(x: float, thr: float) -> str:
    """'gt', 'lt', 'eq' (exactly equal) or 'near' (within NEAR_TOL relative)."""
    if x == thr:
        return "eq"
    if math.isinf(x) or math.isinf(thr):
        return "gt" if x > thr else "lt"
    if abs(x - thr) <= NEAR_TOL * max(1.0, abs(thr)):
        return "near"
    return "gt" if x > thr else "lt"


def _tends_to_zero(cf) -> bool:
    c, rho, gamma, beta = cf
    if rho != 1.0:
        return rho < 1.0
    if beta != 0.0:
        return beta > 0.0
    return gamma < 0.0


def _tends_to_inf(cf) -> bool:
    c, rho, gamma, beta = cf
    if rho != 1.0:
        return rho > 1.0
    if beta != 0.0:
        return beta < 0.0
    return gamma > 0.0


def _log_inv_over_log(cf) -> float:
    """lim ln(1/s_j) / ln j."""
    c, rho, gamma, beta = cf
    if rho != 1.0:
        return math.inf if rho < 1.0 else -math.inf
    return beta


def _over_log(cf) -> float:
    """lim s_j / ln j."""
    c, rho, gamma, beta = cf
    if rho != 1.0:
        return math.inf if rho > 1.0 else 0.0
    if beta != 0.0:
        return math.inf if beta < 0.0 else 0.0
    if gamma != 1.0:
        return math.inf if gamma > 1.0 else 0.0
    return c


def _recip_summable(cf) -> bool:
    """Whether sum_j 1/s_j converges."""
    c, rho, gamma, beta = cf
    if rho != 1.0:
        return rho > 1.0
    if beta != -1.0:
        return beta < -1.0
    return gamma > 1.0


def _check_g(seq: SequenceFamily):
    cf = seq.closed_form()
    if cf is not None:
        c, rho, gamma, beta = cf
        if rho > 1.0 or (rho == 1.0 and (beta < 0.0 or (beta == 0.0 and gamma > 0.0))):
            raise ParameterDomainError(f"field 'g': sequence {seq.describe()} is not eventually nonincreasing")
    if seq.value(1) > 1.0:
        raise ParameterDomainError(f"field 'g': requires g_1 <= 1, got {seq.value(1)}")
    return cf


def _check_a(seq: SequenceFamily):
    cf = seq.closed_form()
    if cf is not None:
        c, rho, gamma, beta = cf
        if rho < 1.0 or (rho == 1.0 and (beta > 0.0 or (beta == 0.0 and gamma < 0.0))):
            raise ParameterDomainError(f"field 'a': sequence {seq.describe()} is not eventually nondecreasing")
    return cf


def _check_b(seq: SequenceFamily):
    cf = seq.closed_form()
    if cf is not None:
        c, rho, gamma, beta = cf
        if rho < 1.0 or (rho == 1.0 and (beta > 0.0 or (beta == 0.0 and gamma < 0.0))):
            raise ParameterDomainError(f"field 'b': sequence {seq.describe()} tends to 0, need inf b_j > 0")
    return cf


def _tab_values(seq: SequenceFamily) -> np.ndarray:
    return np.asarray(seq.table, dtype=float)


# ---------------------------------------------------------------------------
# weighted Korobov


def classify_weighted_korobov(g, r=None, notion="spt", criterion="abs", mode="alg",
                              uwt_rule: str = "boundary") -> TractabilityVerdict:
    """Tractability of the weighted Korobov family with weights ``g`` (smoothness ``r`` only validated).

    ``uwt_rule`` decides UWT when liminf ln(1/g_j)/ln j is exactly 1:
    "boundary" (default), "ge" (holds) or "gt" (fails).
    """
    g = SequenceFamily.parse(g)
    if r is not None:
        r = SequenceFamily.parse(r)
        if r.value(1) <= 0.5:
            raise ParameterDomainError(f"field 'r': requires r_j > 1/2, got r_1 = {r.value(1)}")
    notion, crit, mode = Notion.parse(notion), Criterion.parse(criterion), Mode.parse(mode)
    if uwt_rule not in ("boundary", "ge", "gt"):
        raise ValueError("uwt_rule must be 'boundary', 'ge' or 'gt'")
    cf = _check_g(g)

    def verdict(holds, condition, **cert):
        return TractabilityVerdict(notion, mode, crit, holds, condition, cert)

    if mode is Mode.EXP:
        return _wk_exp(notion, crit, verdict)

    k = notion.kind
    if k == "st_wt" and notion.t > 1:
        return verdict(Holds.YES, "always holds for t > 1", t=notion.t)
    if k == "wt" or (k == "st_wt" and notion.t == 1):
        cond = "lim g_j = 0"
        if cf is None:
            return verdict(Holds.UNKNOWN, cond, note="no closed form for g")
        return verdict(Holds.YES if _tends_to_zero(cf) else Holds.NO, cond, g=g.describe())
    if k in ("spt", "pt", "uwt"):
        strict = k != "uwt"
        cond = "liminf ln(1/g_j)/ln j " + (">" if strict else ">=") + " 1"
        if cf is None:
            est = estimate_liminf(_tab_values(g), "log_inv_over_log")
            return verdict(_numeric_decision(est, 1.0, strict), cond, liminf_estimate=est.estimate,
                           trend=est.trend, confidence=est.confidence, threshold=1.0)
        L = _log_inv_over_log(cf)
        rel = _cmp(L, 1.0)
        if rel == "gt":
            holds = Holds.YES
        elif rel == "lt":
            holds = Holds.NO
        elif rel == "near":
            holds = Holds.BOUNDARY
        elif strict:
            holds = Holds.NO
        else:
            holds = {"boundary": Holds.BOUNDARY, "ge": Holds.YES, "gt": Holds.NO}[uwt_rule]
            if holds is Holds.BOUNDARY and _wk_qpt_nor(cf)[0] is Holds.YES:
                return verdict(Holds.YES, cond, liminf=L, threshold=1.0,
                               note="implied by QPT under NOR (sum g_j ln+(1/g_j) grows at most like ln d)")
        return verdict(holds, cond, liminf=L, threshold=1.0)
    if k == "qpt":
        cond = "sup_d (1/ln+ d) sum_{j<=d} g_j ln+(1/g_j) < inf"
        if crit is Criterion.NOR:
            if cf is None:
                return verdict(Holds.UNKNOWN, cond, note="no closed form for g")
            holds, note = _wk_qpt_nor(cf)
            return verdict(holds, cond, note=note)
        return _by_implication(lambda n: classify_weighted_korobov(g, None, n, crit, mode, uwt_rule), verdict)
    # (s,t)-WT with 0 < t < 1
    t = notion.t
    cond = "lim j^(1-t) g_j ln+(1/g_j) = 0"
    if cf is None:
        return verdict(Holds.UNKNOWN, cond, note="no closed form for g")
    c, rho, gamma, beta = cf
    if rho < 1.0:
        return verdict(Holds.YES, cond, note="geometric decay")
    if not _tends_to_zero(cf):
        return verdict(Holds.NO, cond, note="g_j does not tend to 0")
    if beta == 0.0:
        return verdict(Holds.NO, cond, exponent=1.0 - t, note="logarithmic decay only")
    e = 1.0 - t - beta
    rel = _cmp(e, 0.0)
    if rel == "lt":
        return verdict(Holds.YES, cond, exponent=e)
    if rel == "gt":
        return verdict(Holds.NO, cond, exponent=e)
    if rel == "near":
        return verdict(Holds.BOUNDARY, cond, exponent=e)
    return verdict(Holds.YES if gamma + 1.0 < 0.0 else Holds.NO, cond, exponent=0.0, log_power=gamma + 1.0)


def _wk_qpt_nor(cf):
    c, rho, gamma, beta = cf
    if rho < 1.0:
        return Holds.YES, "summable (geometric decay)"
    if beta > 1.0:
        return Holds.YES, "summable (power > 1)"
    if beta < 1.0:
        return Holds.NO, "partial sums grow polynomially in d"
    if gamma <= -1.0:
        return Holds.YES, f"partial sums grow like (ln d)^{gamma + 2:g} or slower"
    return Holds.NO, f"partial sums grow like (ln d)^{gamma + 2:g}"


def _wk_exp(notion: Notion, crit, verdict):
    # For polynomially decaying eigenvalues ln n(eps, d) grows like p ln(1/eps) at fixed d,
    # and n <= trace / eps^2 with ln(trace) = O(d).
    if notion.kind == "st_wt":
        s, t = notion.s, notion.t
        if s <= 1.0:
            return verdict(Holds.NO, "ln n(eps,1) ~ p ln(1/eps)", note=POLY_DECAY_NOTE, s=s)
        if t > 1.0:
            return verdict(Holds.YES, "ln n <= O(d) + 2 ln(1/eps)", note=POLY_DECAY_NOTE, s=s, t=t)
        return verdict(Holds.UNKNOWN, "no criterion", note=POLY_DECAY_NOTE, s=s, t=t)
    return verdict(Holds.NO, "ln n(eps,1) ~ p ln(1/eps)", note=POLY_DECAY_NOTE)


def _by_implication(classify, verdict):
    pt = classify(Notion("pt"))
    if pt.holds is Holds.YES:
        return verdict(Holds.YES, "implied by PT", pt=pt.holds.value)
    uwt = classify(Notion("uwt"))
    if uwt.holds is Holds.NO:
        return verdict(Holds.NO, "UWT fails", uwt=uwt.holds.value)
    return verdict(Holds.UNKNOWN, "no criterion", pt=pt.holds.value, uwt=uwt.holds.value)


# ---------------------------------------------------------------------------
# exponential-weight Korobov


def classify_exp_korobov(a, b, omega: float, mode="alg", notion="spt", criterion="abs") -> TractabilityVerdict:
    """Tractability of the exponential-weight Korobov family with sequences ``a``, ``b`` and base ``omega``."""
    if not 0.0 < omega < 1.0:
        raise ParameterDomainError(f"field 'omega': requires 0 < omega < 1, got {omega}")
    a, b = SequenceFamily.parse(a), SequenceFamily.parse(b)
    notion, crit, mode = Notion.parse(notion), Criterion.parse(criterion), Mode.parse(mode)
    cf_a = _check_a(a)
    cf_b = _check_b(b)
    lnw = math.log(1.0 / omega)

    def verdict(holds, condition, **cert):
        return TractabilityVerdict(notion, mode, crit, holds, condition, cert)

    def again(n):
        return classify_exp_korobov(a, b, omega, mode, n, crit)

    k = notion.kind
    if k == "st_wt" and notion.t > 1:
        return verdict(Holds.YES, "always holds for t > 1", t=notion.t)

    def wt():
        cond = "lim a_j = inf"
        if cf_a is None:
            return verdict(Holds.UNKNOWN, cond, note="no closed form for a")
        return verdict(Holds.YES if _tends_to_inf(cf_a) else Holds.NO, cond, a=a.describe())

    def a_log_rate(cond, threshold):
        """Compare lim a_j ln(1/omega) / ln j with ``threshold``; returns (rel, value)."""
        A = _over_log(cf_a)
        val = A * lnw if A not in (0.0, math.inf) else A
        return _cmp(val, threshold), val

    if mode is Mode.ALG:
        if k == "wt" or (k == "st_wt" and notion.t == 1):
            return wt()
        if k in ("spt", "pt", "uwt") or (k == "qpt" and crit is Criterion.NOR):
            strict = k != "uwt"
            if k == "qpt":
                cond = "sup_d (1/ln+ d) sum_{j<=d} a_j omega^a_j < inf"
            else:
                cond = "liminf a_j/ln j " + (">" if strict else ">=") + " 1/ln(1/omega)"
            if cf_a is None:
                if k == "qpt":
                    return verdict(Holds.UNKNOWN, cond, note="no closed form for a")
                est = estimate_liminf(_tab_values(a), "over_log")
                scaled = LiminfEstimate(est.estimate * lnw, est.trend, est.confidence, est.window, est.slope)
                return verdict(_numeric_decision(scaled, 1.0, strict), cond, liminf_estimate=est.estimate,
                               threshold=1.0 / lnw, trend=est.trend, confidence=est.confidence)
            rel, val = a_log_rate(cond, 1.0)
            holds = {"gt": Holds.YES, "lt": Holds.NO, "near": Holds.BOUNDARY,
                     "eq": Holds.NO if strict else Holds.YES}[rel]
            return verdict(holds, cond, liminf_times_ln_inv_omega=val, threshold=1.0)
        if k == "qpt":
            return _by_implication(again, verdict)
        # (s,t)-WT, 0 < t < 1
        return _ek_decay_cond(notion.t, cf_a, a_log_rate, verdict)

    # EXP
    if k in ("spt", "pt"):
        cond = "sum 1/b_j < inf and liminf ln(a_j)/j > 0"
        if cf_a is None:
            est = estimate_liminf(_tab_values(a), "log_over_j", window=(1, len(a.table)))
            a_ok = _numeric_decision(est, 0.0, True)
            a_cert = {"liminf_log_a_over_j_estimate": est.estimate}
        else:
            a_ok = Holds.YES if cf_a[1] > 1.0 else Holds.NO
            a_cert = {"a_growth_ratio": cf_a[1]}
        if a_ok is Holds.NO:
            return verdict(Holds.NO, cond, **a_cert)
        if cf_b is None:
            return verdict(Holds.UNKNOWN, cond, note="cannot decide convergence of sum 1/b_j from a finite table",
                           **a_cert)
        b_ok = _recip_summable(cf_b)
        if not b_ok:
            return verdict(Holds.NO, cond, sum_inv_b="diverges", **a_cert)
        return verdict(a_ok, cond, sum_inv_b="converges", **a_cert)
    if k == "qpt":
        return _by_implication(again, verdict)
    if k == "uwt":
        cond = "lim ln(a_j)/ln j = inf"
        if cf_a is None:
            return verdict(Holds.UNKNOWN, cond, note="no closed form for a")
        return verdict(Holds.YES if cf_a[1] > 1.0 else Holds.NO, cond, a=a.describe())
    if k == "wt":
        return wt()
    s, t = notion.s, notion.t
    if s < 1.0:
        cond = "lim a_j / j^((1-s)/s) = inf"
        if cf_a is None:
            return verdict(Holds.UNKNOWN, cond, note="no closed form for a")
        c, rho, gamma, beta = cf_a
        if rho != 1.0:
            return verdict(Holds.YES if rho > 1.0 else Holds.NO, cond, a=a.describe())
        p = (1.0 - s) / s
        rel = _cmp(-beta, p)
        if rel == "near":
            return verdict(Holds.BOUNDARY, cond, growth_exponent=-beta, required=p)
        if rel == "eq":
            return verdict(Holds.YES if gamma > 0.0 else Holds.NO, cond, growth_exponent=-beta, log_power=gamma)
        return verdict(Holds.YES if rel == "gt" else Holds.NO, cond, growth_exponent=-beta, required=p)
    if t == 1.0:
        return wt()
    if s == 1.0:
        cond = "lim a_j / ln j = inf"
        if cf_a is None:
            return verdict(Holds.UNKNOWN, cond, note="no closed form for a")
        A = _over_log(cf_a)
        return verdict(Holds.YES if A == math.inf else Holds.NO, cond, lim_a_over_log=A)
    return _ek_decay_cond(t, cf_a, a_log_rate, verdict)


def _ek_decay_cond(t, cf_a, a_log_rate, verdict):
    cond = "lim j^(1-t) a_j omega^a_j = 0"
    if cf_a is None:
        return verdict(Holds.UNKNOWN, cond, note="no closed form for a")
    rel, val = a_log_rate(cond, 1.0 - t)
    holds = {"gt": Holds.YES, "lt": Holds.NO, "eq": Holds.NO, "near": Holds.BOUNDARY}[rel]
    return verdict(holds, cond, lim_a_ln_inv_omega_over_log=val, required=1.0 - t)


# ---------------------------------------------------------------------------
# model-level helpers and tables


def classify(model: KernelModel, notion="spt", mode="alg", criterion="abs", **kw) -> TractabilityVerdict:
    """Classify using the sequence descriptors attached to ``model``."""
    if model.family is Family.WEIGHTED_KOROBOV:
        return classify_weighted_korobov(model._seq("g"), model._seq("r"), notion, criterion, mode, **kw)
    return classify_exp_korobov(model._seq("a"), model._seq("b"), model.omega, mode, notion, criterion)


DEFAULT_ST_GRID = ((1.0, 2.0), (1.0, 1.0), (0.5, 1.0), (1.0, 0.5), (0.5, 0.5), (2.0, 0.5))


def check_implications(verdicts: Sequence[TractabilityVerdict]) -> list[str]:
    """Violations of SPT => PT => QPT => UWT => WT among verdicts sharing mode and criterion."""
    by_key: dict = {}
    for v in verdicts:
        if v.notion.kind in _NOTION_ORDER:
            by_key.setdefault((v.mode, v.criterion), {})[v.notion.kind] = v.holds
    problems = []
    for (mode, crit), got in by_key.items():
        for i, strong in enumerate(_NOTION_ORDER):
            if got.get(strong) is not Holds.YES:
                continue
            for weak in _NOTION_ORDER[i + 1:]:
                if got.get(weak) is Holds.NO:
                    problems.append(f"{mode.value}/{crit.value}: {strong.upper()} yes but {weak.upper()} no")
    return problems


def verdict_table(model: KernelModel, modes=("alg", "exp"), criteria=("abs", "nor"),
                  st_grid=DEFAULT_ST_GRID, **kw) -> list[TractabilityVerdict]:
    notions = [Notion(k) for k in _NOTION_ORDER] + [Notion.st(s, t) for s, t in st_grid]
    out = []
    for mode in modes:
        for crit in criteria:
            for n in notions:
                out.append(classify(model, n, mode, crit, **kw))
    problems = check_implications(out)
    if problems:
        raise AssertionError("implication lattice violated: " + "; ".join(problems))
    return out
