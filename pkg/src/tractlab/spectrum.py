"""Eigenvalue spectra of tensor-product periodic kernels.

Each coordinate contributes a nonincreasing stream of eigenvalues indexed by a
*position*: position 0 is frequency 0, position ``2t-1`` is ``+t`` and ``2t`` is
``-t``.  The d-variate spectrum is the nonincreasing rearrangement of all
products, produced lazily by a best-first walk (see ``_walker_py``).

Tail sums keep their relative accuracy: every node on the walk frontier owns the
closed-form mass of its canonical subtree, so the sum of frontier masses is the
tail.  It is updated incrementally and re-summed from the frontier whenever it
has shrunk by a factor 2^20, so rounding from large early masses cannot swamp a
tiny late tail.  Per-coordinate tails come from the Hurwitz zeta function (weighted
Korobov) or a direct series with an integral remainder (exponential weights).
"""
from __future__ import annotations

import csv
import functools
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np
from scipy import special

from . import _backend
from .errors import SpectrumOverflowError
from .model import Family, KernelModel

_EK_LOG_CUTOFF = 42.0  # e^-42 ~ 5.7e-19 relative, below the 1e-18 truncation rule
_EK_MAX_TERMS = 4096
_INITIAL_POSITIONS = 64


@dataclass(frozen=True)
class EigenEntry:
    rank: int
    value: float
    index: tuple[int, ...]


def position_to_frequency(p):
    """Map stream positions to signed frequencies (works on ints and integer arrays)."""
    t = (p + 1) // 2
    if isinstance(p, np.ndarray):
        return np.where(p % 2 == 1, t, -t)
    return t if p % 2 == 1 else -t


# ---------------------------------------------------------------------------
# per-coordinate tables


def _coord_params(model: KernelModel, j: int):
    """Parameters of coordinate ``j`` (0-based)."""
    if model.family is Family.WEIGHTED_KOROBOV:
        return (model.r[j], model.g[j])
    return (model.a[j], model.b[j], model.omega)


def _freq_values(model: KernelModel, j: int, t: np.ndarray) -> np.ndarray:
    """Eigenvalue at frequency magnitude ``t >= 1`` for coordinate ``j``."""
    # math.pow (libm) rather than np.power: numpy's vectorized pow is not
    # correctly rounded, and the values must match a scalar evaluation bit for bit
    t = np.asarray(t, dtype=float).ravel().tolist()
    pw = math.pow
    if model.family is Family.WEIGHTED_KOROBOV:
        r, g = _coord_params(model, j)
        e = -2.0 * r
        return np.array([g * pw(x, e) for x in t], dtype=float)
    a, b, omega = _coord_params(model, j)
    return np.array([pw(omega, a * pw(x, b)) for x in t], dtype=float)


def _ek_remainder(c: float, b: float, H: float) -> float:
    """Euler-Maclaurin estimate of sum_{h >= H} exp(-c h^b)."""
    s = 1.0 / b
    x = c * H**b
    q = special.gammaincc(s, x)
    if q == 0.0:
        integral = 0.0
    else:
        integral = math.exp(-math.log(b) - s * math.log(c) + special.gammaln(s) + math.log(q))
    fH = math.exp(-x)
    dfH = -c * b * H ** (b - 1.0) * fH
    return integral + 0.5 * fH - dfH / 12.0


def _upper_sums(model: KernelModel, j: int, t: np.ndarray) -> np.ndarray:
    """S(t) = sum_{h >= t} lambda(h) for integer magnitudes t >= 1."""
    t = np.asarray(t, dtype=np.int64)
    if model.family is Family.WEIGHTED_KOROBOV:
        r, g = _coord_params(model, j)
        return g * special.zeta(2.0 * r, t.astype(float))
    a, b, omega = _coord_params(model, j)
    c = a * math.log(1.0 / omega)
    out = np.empty(t.shape, dtype=float)
    for i, ti in enumerate(t.tolist()):
        h_end = (ti**b + _EK_LOG_CUTOFF / c) ** (1.0 / b)
        n_terms = int(math.ceil(h_end)) - ti + 1
        capped = n_terms > _EK_MAX_TERMS
        n_terms = min(max(n_terms, 1), _EK_MAX_TERMS)
        h = np.arange(ti, ti + n_terms, dtype=float)
        total = math.fsum(np.power(omega, a * np.power(h, b)))
        if capped:
            total += _ek_remainder(c, b, float(ti + n_terms))
        out[i] = total
    return out


def coordinate_tables(model: KernelModel, j: int, start: int, stop: int):
    """Eigenvalue and tail tables for positions ``start..stop-1`` of coordinate ``j`` (0-based).

    ``tail[p]`` is the sum of the stream from position ``p`` onwards.  Each entry
    depends only on its own position, so tables can be extended piecewise.
    """
    p = np.arange(start, stop, dtype=np.int64)
    t = (p + 1) // 2
    lam = np.ones(p.shape, dtype=float)
    nz = p > 0
    lam[nz] = _freq_values(model, j, t[nz])
    # S(t) for every t that appears, plus one more for the even positions
    t_lo = max(int(t.min()) if t.size else 1, 1)
    t_hi = int(t.max()) + 1 if t.size else 1
    S_t = _upper_sums(model, j, np.arange(t_lo, t_hi + 1))

    def S(tt):
        return S_t[tt - t_lo]

    tail = np.empty(p.shape, dtype=float)
    zero = p == 0
    odd = p % 2 == 1
    even = ~zero & ~odd
    if zero.any():  # then t_lo == 1
        tail[zero] = 1.0 + 2.0 * S_t[0]
    tail[odd] = 2.0 * S(t[odd])
    tail[even] = lam[even] + 2.0 * S(t[even] + 1)
    return lam, tail


def coordinate_trace(model: KernelModel, j: int) -> float:
    """Sum of the whole stream of coordinate ``j`` (0-based)."""
    return float(coordinate_tables(model, j, 0, 1)[1][0])


def coordinate_eigenvalues(model: KernelModel, j: int, count: int) -> list[tuple[float, int, int]]:
    """First ``count`` distinct eigenvalues of coordinate ``j`` (1-based) as ``(value, |h|, multiplicity)``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if not 1 <= j <= model.d:
        raise ValueError(f"coordinate index must lie in 1..{model.d}, got {j}")
    out = [(1.0, 0, 1)]
    if count > 1:
        vals = _freq_values(model, j - 1, np.arange(1, count))
        out.extend((float(v), t, 2) for t, v in enumerate(vals, start=1))
    return out


def _suffix_products(traces: list[float]) -> np.ndarray:
    d = len(traces)
    R = np.empty(d, dtype=float)
    R[d - 1] = 1.0
    with np.errstate(over="ignore"):  # callers check finiteness
        for k in range(d - 2, -1, -1):
            R[k] = R[k + 1] * traces[k + 1]
    return R


def log_trace(model: KernelModel) -> float:
    return math.fsum(math.log(coordinate_trace(model, j)) for j in range(model.d))


def trace(model: KernelModel) -> float:
    """Sum of all eigenvalues (product of the coordinate series)."""
    traces = [coordinate_trace(model, j) for j in range(model.d)]
    R = _suffix_products(traces)
    tr = traces[0] * R[0]
    if not math.isfinite(tr):
        raise SpectrumOverflowError(math.fsum(math.log(x) for x in traces))
    return float(tr)


def christoffel(model: KernelModel, m: int, x=None) -> float:
    """N(m, x) = sum_{k<=m} |eta_k(x)|^2, which is m for unimodular exponentials."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return float(m)


# ---------------------------------------------------------------------------
# lazily enumerated spectrum


class Spectrum:
    """Nonincreasing eigenvalues of ``model`` with exact tails, generated on demand.

    ``keep_indices=False`` skips storing multi-indices, which is what the
    complexity search wants for long runs.
    """

    def __init__(self, model: KernelModel, keep_indices: bool = True, backend: str | None = None):
        self.model = model
        self.d = model.d
        self.keep_indices = keep_indices
        self._lock = threading.RLock()
        self._P = 0
        self._lam = np.empty((self.d, 0))
        self._tail_tab = np.empty((self.d, 0))
        self._grow_tables(_INITIAL_POSITIONS)
        traces = self._tail_tab[:, 0].tolist()
        self.coordinate_traces = tuple(traces)
        self.log_trace = math.fsum(math.log(x) for x in traces)
        R = _suffix_products(traces)
        self.trace = float(traces[0] * R[0])
        if not (math.isfinite(self.trace) and np.all(np.isfinite(R))):
            raise SpectrumOverflowError(self.log_trace)
        self.backend = backend or _backend.BACKEND
        self._walker = _backend.walker_class(backend)(self.d, np.ascontiguousarray(R), self.trace)
        self._n = 0
        self._values = np.empty(0)
        self._tails = np.empty(0)
        self._pos = np.empty((0, self.d), dtype=np.int32) if keep_indices else None
        self._last_tail = self.trace

    # -- internals ----------------------------------------------------------

    def _grow_tables(self, new_P: int):
        if new_P <= self._P:
            return
        lam = np.empty((self.d, new_P))
        tails = np.empty((self.d, new_P))
        lam[:, : self._P] = self._lam
        tails[:, : self._P] = self._tail_tab
        for j in range(self.d):
            lam[j, self._P :], tails[j, self._P :] = coordinate_tables(self.model, j, self._P, new_P)
        self._lam, self._tail_tab, self._P = lam, tails, new_P

    def _reserve(self, n: int):
        cap = self._values.shape[0]
        if n <= cap:
            return
        new_cap = max(n, 2 * cap, 256)
        self._values = np.resize(self._values, new_cap)
        self._tails = np.resize(self._tails, new_cap)
        if self._pos is not None:
            pos = np.empty((new_cap, self.d), dtype=np.int32)
            pos[: self._n] = self._pos[: self._n]
            self._pos = pos

    def extend(self, n: int) -> int:
        """Make sure at least ``n`` eigenvalues have been generated."""
        with self._lock:
            if n <= self._n:
                return self._n
            self._reserve(n)
            while self._n < n:
                want = n - self._n
                start = self._n
                out_pos = self._pos[start:n] if self._pos is not None else None
                got, need_coord, need_len = self._walker.advance(
                    self._lam, self._tail_tab, want, self._values[start:n], self._tails[start:n], out_pos
                )
                if got:
                    seg = self._tails[start : start + got]
                    np.minimum.accumulate(np.clip(seg, 0.0, self._last_tail), out=seg)
                    self._last_tail = float(seg[-1])
                    self._n += got
                if need_coord >= 0:
                    self._grow_tables(max(2 * self._P, need_len))
            return self._n

    # -- accessors ------------------------------------------------------------

    @property
    def count(self) -> int:
        return self._n

    def values(self, n: int) -> np.ndarray:
        self.extend(n)
        return self._values[:n].copy()

    def tail(self, n: int) -> float:
        """Sum of the eigenvalues with rank > n."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if n == 0:
            return self.trace
        self.extend(n)
        return float(self._tails[n - 1])

    def tails(self, n: int) -> np.ndarray:
        """Array of ``tail(0), ..., tail(n)``."""
        self.extend(n)
        return np.concatenate(([self.trace], self._tails[:n]))

    def tail_slice(self, start: int, stop: int) -> np.ndarray:
        """View of ``tail(n)`` for ``start <= n < stop`` (requires ``start >= 1``)."""
        if start < 1:
            raise ValueError("start must be at least 1")
        self.extend(stop - 1)
        return self._tails[start - 1 : stop - 1]

    def partial_sum(self, n: int) -> float:
        self.extend(n)
        return math.fsum(self._values[:n])

    def indices(self, n: int) -> np.ndarray:
        """Signed frequency multi-indices of the first ``n`` eigenvalues, shape (n, d)."""
        if self._pos is None:
            raise RuntimeError("spectrum was created with keep_indices=False")
        self.extend(n)
        return position_to_frequency(self._pos[:n].astype(np.int64))

    def entries(self, n: int) -> list[EigenEntry]:
        vals = self.values(n)
        idx = self.indices(n)
        return [EigenEntry(k + 1, float(v), tuple(int(x) for x in h)) for k, (v, h) in enumerate(zip(vals, idx))]

    def iter_tails(self, chunk: int = 65536) -> Iterator[tuple[int, np.ndarray]]:
        """Yield ``(offset, tails)`` blocks with ``tails[i] = tail(offset + i + 1)``, forever."""
        done = 0
        while True:
            self.extend(done + chunk)
            yield done, self._tails[done : done + chunk]
            done += chunk

    def to_csv(self, path, count: int) -> None:
        write_spectrum_csv(path, self.entries(count), self.d)


def write_spectrum_csv(path, entries: list[EigenEntry], d: int) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "value"] + [f"h_{j}" for j in range(1, d + 1)])
        for e in entries:
            w.writerow([e.rank, format(e.value, ".17g"), *e.index])


@functools.lru_cache(maxsize=8)
def shared_spectrum(model: KernelModel) -> Spectrum:
    """Process-wide spectrum for ``model`` (kept without indices)."""
    return Spectrum(model, keep_indices=False)


def enumerate_spectrum(model: KernelModel, count: int) -> list[EigenEntry]:
    """The ``count`` largest eigenvalues, ties broken by multi-index (0, +h, -h order)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    return Spectrum(model).entries(count)


def tail_sum(model: KernelModel, n: int) -> float:
    return shared_spectrum(model).tail(n)


def partial_sum(model: KernelModel, n: int) -> float:
    return shared_spectrum(model).partial_sum(n)
