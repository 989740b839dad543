"""Weighted least-squares sampling recovery on the torus, with exact worst-case errors.

The eigenfunctions are the exponentials eta_k(x) = exp(2 pi i h_k . x) taken in the
order of the ranked spectrum, so the Christoffel function is N(m, x) = m and the
sampling density is identically 1.  That lets every quantity be evaluated
without approximation except for two truncations, both with explicit remainders:

* the sample vectors y_i keep K coordinates, and the discarded part of the
  empirical matrix is bounded by the eigenvalue tail after K;
* the power function h(x) of a linear algorithm sums K modes, and the rest is
  bounded by tail(K) * (1 + sum_i |u_i(x)|)^2.
"""
from __future__ import annotations

import functools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .complexity import approx_number
from .errors import RankDeficiencyError, SubsampleFailure, TruncationError
from .model import KernelModel
from .spectrum import Spectrum, christoffel

TWO_PI = 2.0 * np.pi
TRUNCATION_SLACK = 1e-6
K_CAP = 100_000


@functools.lru_cache(maxsize=16)
def indexed_spectrum(model: KernelModel) -> Spectrum:
    return Spectrum(model, keep_indices=True)


def _exp_matrix(points: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """eta_k(x_i) for all points (rows) and frequencies (columns)."""
    return np.exp((TWO_PI * 1j) * (points @ freqs.T.astype(float)))


def gamma_m(spec: Spectrum, m: int) -> float:
    """max{sigma_{m+1}, (tail(m)/m)^(1/2)}."""
    sigma_next = math.sqrt(spec.values(m + 1)[m])
    return max(sigma_next, math.sqrt(spec.tail(m) / m))


# ---------------------------------------------------------------------------
# density and nodes


def sampling_density(model: KernelModel, m: int, x=None):
    """The density rho_m.

    Both averages in its definition are averages of |eta_k(x)|^2 = 1, so it is 1
    everywhere.  Array input gives an array of ones.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if x is None:
        return 1.0
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1:
        return 1.0
    return np.ones(x.shape[0])


@dataclass
class NodeSet:
    points: np.ndarray  # (n, d) in [0, 1)^d
    density: np.ndarray  # (n,)
    seed: int
    m: int
    trial: int = 0
    model: KernelModel | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def subset(self, idx) -> NodeSet:
        idx = np.asarray(idx, dtype=np.int64)
        return NodeSet(self.points[idx], self.density[idx], self.seed, self.m, self.trial, self.model)


def default_node_count(m: int, beta: float = 10.0) -> int:
    return int(math.ceil(beta * m * math.log(m + 1)))


def trial_rng(seed: int, m: int, trial: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(m), int(trial)]))


def draw_nodes(model: KernelModel, m: int, n: int, seed: int, trial: int = 0) -> NodeSet:
    """n i.i.d. points from rho_m (uniform on the torus), reproducible from (seed, m, trial)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if n < m:
        raise ValueError(f"need n >= m, got n={n}, m={m}")
    pts = trial_rng(seed, m, trial).random((n, model.d))
    return NodeSet(pts, sampling_density(model, m, pts), int(seed), m, trial, model)


# ---------------------------------------------------------------------------
# sample vectors and concentration


def choose_truncation(spec: Spectrum, m: int, slack: float = TRUNCATION_SLACK, cap: int = K_CAP) -> int:
    """Smallest K > m with sigma_{K+1}^2 / gamma_m^2 < slack."""
    g2 = gamma_m(spec, m) ** 2
    K = max(2 * m, 16)
    while True:
        vals = spec.values(min(K, cap) + 1)
        # vals[K] is sigma_{K+1}^2
        below = np.flatnonzero(vals[m + 1 :] < slack * g2)
        if below.size:
            return m + 1 + int(below[0])
        if K >= cap:
            raise TruncationError(f"no K <= {cap} brings sigma_(K+1)^2/gamma_m^2 below {slack}", None)
        K *= 2


@dataclass
class SampleVectors:
    Y: np.ndarray  # (n, K)
    m: int
    K: int
    gamma: float
    diag_E: np.ndarray  # (K,)
    tail_K: float  # sum of eigenvalues beyond K

    @property
    def head(self) -> np.ndarray:
        return self.Y[:, : self.m]


def sample_vectors(nodes: NodeSet, m: int, K: int, model: KernelModel | None = None) -> SampleVectors:
    model = model or nodes.model
    spec = indexed_spectrum(model)
    freqs = spec.indices(K)
    lam = spec.values(K)
    g = gamma_m(spec, m)
    scale = np.ones(K)
    scale[m:] = np.sqrt(lam[m:]) / g
    Y = _exp_matrix(nodes.points, freqs) * (scale / np.sqrt(nodes.density)[:, None])
    diag_E = np.ones(K)
    diag_E[m:] = lam[m:] / g**2
    return SampleVectors(Y, m, K, g, diag_E, spec.tail(K))


@dataclass
class ConcentrationReport:
    deviation: float  # spectral norm on the K x K block
    slack: float  # bound on what the truncation can add
    K: int
    gamma: float

    @property
    def total(self) -> float:
        return self.deviation + self.slack


def concentration_details(nodes: NodeSet, m: int, K: int | None = None) -> ConcentrationReport:
    spec = indexed_spectrum(nodes.model)
    required = choose_truncation(spec, m)
    if K is None:
        K = required
    elif K <= m:
        raise ValueError("K must exceed m")
    elif K < required:
        raise TruncationError(f"K={K} leaves sigma_(K+1)^2/gamma_m^2 >= {TRUNCATION_SLACK}; need K >= {required}",
                              required)
    sv = sample_vectors(nodes, m, K)
    n = nodes.n
    M = (sv.Y.conj().T @ sv.Y) / n
    M[np.diag_indices(K)] -= sv.diag_E
    dev = float(np.max(np.abs(scipy.linalg.eigvalsh(M))))
    t = sv.tail_K / sv.gamma**2
    m_norm = dev + 1.0  # ||M_KK|| <= ||E_K|| + deviation and ||E_K|| = 1
    slack = 2.0 * math.sqrt(m_norm * t) + t
    return ConcentrationReport(dev, slack, K, sv.gamma)


def concentration_check(nodes: NodeSet, m: int, K: int | None = None) -> float:
    """||(1/n) sum y_i y_i^* - E|| on K coordinates plus the truncation slack bound."""
    return concentration_details(nodes, m, K).total


# ---------------------------------------------------------------------------
# subsampling


def _lam_max_gram(Y: np.ndarray) -> float:
    if Y.shape[0] == 0:
        return 0.0
    small = Y @ Y.conj().T if Y.shape[0] <= Y.shape[1] else Y.conj().T @ Y
    return float(scipy.linalg.eigvalsh(small)[-1])


def subsample_certificate(Y: np.ndarray, m: int, J) -> dict:
    """Frame bounds of the selected rows of Y.

    ``head_min_over_m`` is lambda_min(sum_J head head^*) / m; ``upper_ratio``
    compares lambda_max of the averaged matrices over J and over all rows.
    """
    J = np.asarray(J, dtype=np.int64)
    YJ = Y[J]
    head = YJ[:, :m]
    head_min = float(scipy.linalg.eigvalsh(head.conj().T @ head)[0])
    top_J = _lam_max_gram(YJ)
    top_all = _lam_max_gram(Y)
    return {
        "size": int(J.size),
        "head_min": head_min,
        "head_min_over_m": head_min / m,
        "lam_max": top_J,
        "lam_max_over_m": top_J / m,
        "upper_ratio": (top_J / J.size) / (top_all / Y.shape[0]),
    }


@dataclass
class SubsampleResult:
    indices: np.ndarray
    certificate: dict


def subsample(nodes: NodeSet, m: int, K: int | None = None, target_size_factor: float = 40.0,
              lower_bound_target: float = 0.5, upper_ratio_target: float = 4.0,
              vectors: SampleVectors | None = None) -> SubsampleResult:
    """Greedy two-barrier selection of about ``target_size_factor * m`` nodes.

    Each step adds the node that most lowers the lower-barrier potential of the
    head block while least raising the upper-barrier potential of the whole
    K-truncated matrix; both are evaluated with Sherman-Morrison updates, the
    upper one in the Gram space of the selected rows.
    """
    if vectors is None:
        if K is None:
            K = choose_truncation(indexed_spectrum(nodes.model), m)
        vectors = sample_vectors(nodes, m, K)
    Y = vectors.Y
    n = Y.shape[0]
    size = int(math.floor(target_size_factor * m))
    if n <= size:
        J = np.arange(n)
        cert = subsample_certificate(Y, m, J)
        cert["noop"] = True
        return SubsampleResult(J, cert)

    H = Y[:, :m]
    norms2 = np.einsum("ij,ij->i", Y.real, Y.real) + np.einsum("ij,ij->i", Y.imag, Y.imag)
    ymax2 = float(norms2.max())
    chosen: list[int] = []
    available = np.ones(n, dtype=bool)
    rows = np.empty((0, n), dtype=complex)  # W[J, :] = Y_J Y^*
    A_head = np.zeros((m, m), dtype=complex)
    for _ in range(size):
        # lower barrier on the head block
        w_h, V_h = scipy.linalg.eigh(A_head)
        lower = w_h[0] - 1.0
        R = (V_h / (w_h - lower)) @ V_h.conj().T
        HR = H @ R
        q1_l = np.einsum("ij,ij->i", HR.conj(), H).real
        q2_l = np.einsum("ij,ij->i", HR.conj(), HR).real
        gain = q2_l / (1.0 + q1_l)
        # upper barrier on the full matrix, through the Gram matrix of the chosen rows
        if chosen:
            G = rows[:, chosen]
            mu, V = scipy.linalg.eigh(G)
            upper = mu[-1] + ymax2 + 1.0
            C = (V / (upper - mu)) @ V.conj().T
            CW = C @ rows
            wCw = np.einsum("ij,ij->j", rows.conj(), CW).real
            wCGCw = np.einsum("ij,ij->j", CW.conj(), G @ CW).real
        else:
            upper = ymax2 + 1.0
            wCw = wCGCw = np.zeros(n)
        q1_u = (norms2 + wCw) / upper
        q2_u = (norms2 + 2.0 * wCw + wCGCw) / upper**2
        cost = q2_u / (1.0 - q1_u)
        score = np.where(available, gain - cost, -np.inf)
        j = int(np.argmax(score))
        chosen.append(j)
        available[j] = False
        rows = np.vstack([rows, (Y[j] @ Y.conj().T)[None, :]])
        A_head += np.outer(H[j].conj(), H[j])
    J = np.array(sorted(chosen), dtype=np.int64)
    cert = subsample_certificate(Y, m, J)
    cert["noop"] = False
    ok = cert["head_min_over_m"] >= lower_bound_target and cert["upper_ratio"] <= upper_ratio_target
    if not ok:
        raise SubsampleFailure(
            f"subsample of size {J.size} reached head_min/m={cert['head_min_over_m']:.4g} "
            f"(target {lower_bound_target}) and upper ratio {cert['upper_ratio']:.4g} (target {upper_ratio_target})",
            cert,
        )
    return SubsampleResult(J, cert)


# ---------------------------------------------------------------------------
# least squares


def _real_pairs(freqs: np.ndarray):
    """For each head frequency: (kind, representative) with kind 0 const, 1 cos, 2 sin."""
    pos = {tuple(h): k for k, h in enumerate(freqs.tolist())}
    kinds, reps = [], []
    for h in freqs.tolist():
        th = tuple(h)
        neg = tuple(-x for x in h)
        if neg not in pos:
            raise ValueError(f"real mode needs a head set closed under negation; {th} has no partner")
        if all(x == 0 for x in h):
            kinds.append(0)
            reps.append(h)
        elif next(x for x in h if x != 0) > 0:
            kinds.append(1)
            reps.append(h)
        else:
            kinds.append(2)
            reps.append(list(neg))
    return np.array(kinds), np.array(reps, dtype=np.int64).reshape(freqs.shape)


@dataclass
class LeastSquaresFit:
    """The linear map f -> A_n f, stored through G^+ (shape m x n)."""

    model: KernelModel
    m: int
    points: np.ndarray
    density: np.ndarray
    freqs: np.ndarray  # (m, d) head frequencies
    pinv: np.ndarray  # (m, n)
    sigma_min: float  # least singular value of G / sqrt(n)
    real: bool = False
    coefficients: np.ndarray | None = None
    subset: np.ndarray | None = None

    def basis(self, x: np.ndarray) -> np.ndarray:
        """Values of the m basis functions at points ``x`` (shape (N, m))."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if not self.real:
            return _exp_matrix(x, self.freqs)
        kinds, reps = _real_pairs(self.freqs)
        arg = TWO_PI * (x @ reps.T.astype(float))
        out = np.where(kinds == 1, math.sqrt(2.0) * np.cos(arg), math.sqrt(2.0) * np.sin(arg))
        out[:, kinds == 0] = 1.0
        return out

    def weights(self, x: np.ndarray) -> np.ndarray:
        """u_i(x), so that A_n f(x) = sum_i u_i(x) f(x^i) (shape (N, n))."""
        scaled = self.pinv / np.sqrt(self.density)[None, :]
        return self.basis(x) @ scaled

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        if self.coefficients is None:
            raise RuntimeError("fit has no samples; use weights() or pass samples to fit_least_squares")
        return self.basis(x) @ self.coefficients


def fit_least_squares(model: KernelModel, m: int, nodes: NodeSet, samples=None, subset=None,
                      real: bool = False) -> LeastSquaresFit:
    """Weighted least squares on the span of the first m eigenfunctions.

    Uses a column-pivoted QR of G (entries eta_k(x^i)/rho_m(x^i)^(1/2)).
    """
    if subset is not None:
        nodes_used = nodes.subset(subset)
    else:
        nodes_used = nodes
    n = nodes_used.n
    if n < m:
        raise RankDeficiencyError(f"only {n} nodes for {m} basis functions; draw more nodes")
    spec = indexed_spectrum(model)
    freqs = spec.indices(m)
    proto = LeastSquaresFit(model, m, nodes_used.points, nodes_used.density, freqs, np.empty((m, 0)), 0.0, real)
    G = proto.basis(nodes_used.points) / np.sqrt(nodes_used.density)[:, None]
    Q, R, piv = scipy.linalg.qr(G, mode="economic", pivoting=True)
    svals = np.linalg.svd(R, compute_uv=False)
    smin = float(svals[-1])
    if not smin > 1e-10 * math.sqrt(n):
        raise RankDeficiencyError(
            f"design matrix is rank deficient (least singular value {smin:.3g}); draw more nodes or retry the subsample"
        )
    Rinv_Qh = scipy.linalg.solve_triangular(R, Q.conj().T)
    pinv = np.empty_like(Rinv_Qh)
    pinv[piv] = Rinv_Qh
    proto.pinv = pinv
    proto.sigma_min = smin / math.sqrt(n)
    proto.subset = None if subset is None else np.asarray(subset, dtype=np.int64)
    if samples is not None:
        samples = np.asarray(samples)
        if subset is not None and samples.shape[0] == nodes.n:
            samples = samples[np.asarray(subset)]
        proto.coefficients = pinv @ (samples / np.sqrt(nodes_used.density))
    return proto


# ---------------------------------------------------------------------------
# worst-case error via the power function


@dataclass
class WorstCaseReport:
    error: float  # sqrt(max_x (h_K(x)^2 + remainder(x))), an upper estimate on the grid
    lower: float  # sqrt(max_x h_K(x)^2), a lower estimate of the sup
    remainder: float  # largest truncation remainder on the grid (squared units)
    K: int
    grid: int
    spacing: float
    argmax: tuple
    alias_error: float | None = None  # sup_x of the error restricted to the tail modes (l > m)
    h_min: float | None = None


def _grid_points(d: int, grid: int, start: int, stop: int) -> np.ndarray:
    flat = np.arange(start, stop, dtype=np.int64)
    return np.stack(np.unravel_index(flat, (grid,) * d), axis=1)


def _power_function_pass(spec: Spectrum, K: int, grid: int, fit: LeastSquaresFit | None, m_proj: int | None,
                         chunk: int | None):
    d = spec.d
    freqs = spec.indices(K)
    lam = spec.values(K)
    tail_K = spec.tail(K)
    table = np.exp((TWO_PI * 1j / grid) * np.arange(grid))
    if fit is not None:
        n = fit.points.shape[0]
        if n:
            Phi = _exp_matrix(fit.points, freqs) / np.sqrt(fit.density)[:, None]  # (n, K)
            M = fit.pinv @ Phi  # (m, K)
            scaled = fit.pinv / np.sqrt(fit.density)[None, :]
        m_head = fit.m
    total = grid**d
    if chunk is None:
        chunk = max(64, min(total, (1 << 21) // max(K, 1)))
    best = (-1.0, None, 0.0)
    worst_alias = 0.0
    h_min = math.inf
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        T = _grid_points(d, grid, start, stop)
        psi = table[(T @ freqs.T) % grid]  # (N, K)
        if fit is None:
            if m_proj is None:  # null algorithm
                E = psi
            else:
                E = psi.copy()
                E[:, :m_proj] = 0.0
            rem = np.full(stop - start, tail_K)
            alias = None
        else:
            x = T / grid
            if n:
                hb = fit.basis(x)
                approx = hb @ M
                E = psi - approx
                usum = np.abs(hb @ scaled).sum(axis=1)
                alias2 = (np.abs(approx[:, m_head:]) ** 2) @ lam[m_head:]
                worst_alias = max(worst_alias, float(alias2.max()))
            else:
                E = psi
                usum = np.zeros(stop - start)
            rem = tail_K * (1.0 + usum) ** 2
        h2 = (np.abs(E) ** 2) @ lam
        up = h2 + rem
        i = int(np.argmax(up))
        if up[i] > best[0]:
            best = (float(up[i]), tuple(int(v) for v in T[i]), float(h2[i]))
        h_min = min(h_min, float(h2.min()))
        worst_rem = float(rem.max())
        if start == 0:
            max_rem, max_h2 = worst_rem, float(h2.max())
        else:
            max_rem, max_h2 = max(max_rem, worst_rem), max(max_h2, float(h2.max()))
    return best, max_h2, max_rem, worst_alias, h_min


def worst_case_error(model: KernelModel, fit: LeastSquaresFit | None = None, K: int | None = None,
                     grid: int = 64, rel_remainder: float = 1e-3, K_cap: int = K_CAP,
                     projection_m: int | None = None, chunk: int | None = None) -> WorstCaseReport:
    """sup_x h(x) on a tensor grid for the algorithm ``fit``.

    ``fit=None`` with ``projection_m=None`` is the zero algorithm; with
    ``projection_m=m`` it is the spectral projection onto the first m modes
    (computed with exact inner products).  K doubles until the truncation
    remainder is at most ``rel_remainder`` times the largest h(x)^2.
    """
    if model.d > 3 and grid**model.d > 2**22:
        raise ValueError("grid too large for this dimension; pass a smaller grid")
    spec = indexed_spectrum(model)
    base = fit.m if fit is not None else (projection_m or 0)
    if K is None:
        K = max(4 * base, 64)
        adaptive = True
    else:
        adaptive = False
    while True:
        best, max_h2, max_rem, alias, h_min = _power_function_pass(spec, K, grid, fit, projection_m, chunk)
        if max_rem <= rel_remainder * max_h2 or not adaptive:
            break
        if K >= K_cap:
            raise TruncationError(f"truncation remainder still above {rel_remainder} x max h^2 at K={K}", 2 * K)
        K = min(2 * K, K_cap)
    up, arg, _ = best
    return WorstCaseReport(
        error=math.sqrt(up),
        lower=math.sqrt(max_h2),
        remainder=max_rem,
        K=K,
        grid=grid,
        spacing=1.0 / grid,
        argmax=tuple(a / grid for a in arg),
        alias_error=math.sqrt(alias) if fit is not None else None,
        h_min=math.sqrt(h_min),
    )


def projection_error(model: KernelModel, m: int, **kw) -> WorstCaseReport:
    """Worst-case error of the spectral projection P_m."""
    return worst_case_error(model, None, projection_m=m, **kw)


# ---------------------------------------------------------------------------
# bound formulas


def _sum_from(spec: Spectrum, k0: int) -> float:
    """sum_{k >= k0} sigma_k^2, with k0 clipped to 1."""
    return spec.tail(max(k0, 1) - 1)


def general_bound_rhs(spec: Spectrum, m: int, N=None) -> float:
    """max{(N(m)/m) sum_{k>=m/2} sigma_k^2, sum_{k>=m/4} N(4k) sigma_k^2 / k} for a Christoffel function N."""
    if N is None:
        N = lambda k: christoffel(spec.model, k)  # noqa: E731
    first = N(m) / m * _sum_from(spec, m // 2)
    k0 = max(m // 4, 1)
    K = max(4 * k0, 64)
    while spec.tail(K) > 1e-14 * spec.trace and K < K_CAP:
        K *= 2
    lam = spec.values(K)
    ks = np.arange(k0, K + 1)
    second = math.fsum(np.array([N(4 * k) for k in ks]) * lam[k0 - 1 :] / ks)
    second += 4.0 * spec.tail(K)  # N(4k)/k = 4 beyond K for the periodic system
    return max(first, second)


def periodic_bound_rhs(spec: Spectrum, m: int) -> float:
    """The same maximum with N(k) = k: max{tail(m//2 - 1), 4 tail(m//4 - 1)}."""
    return max(_sum_from(spec, m // 2), 4.0 * _sum_from(spec, m // 4))


def projection_bound(spec: Spectrum, m: int) -> float:
    """sqrt(2 sum_{k >= m/4} N(4k) sigma_k^2 / k) = sqrt(8 tail(m//4 - 1)) for the periodic system."""
    return math.sqrt(8.0 * _sum_from(spec, m // 4))


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ExperimentConfig:
    model: KernelModel
    m_list: tuple[int, ...] = (8, 16, 32)
    seeds: int = 10
    master_seed: int = 0
    beta: float = 10.0
    subsample: bool = False
    target_size_factor: float = 40.0
    lower_bound_target: float = 0.5
    upper_ratio_target: float = 4.0
    grid: int = 64
    threads: int = 1
    real: bool = False

    def __post_init__(self):
        if any(int(m) < 1 for m in self.m_list):
            raise ValueError("every m must be at least 1")
        if self.seeds < 1:
            raise ValueError("seeds must be at least 1")
        self.m_list = tuple(int(m) for m in self.m_list)


@dataclass
class ExperimentReport:
    m: int
    n: int
    J: int
    d: int
    model_id: str
    error: float
    a_next: float
    ratio: float
    concentration: float
    error_lower: float
    projection_error: float
    projection_bound: float
    bound_rhs: float  # max{tail(m//2 - 1), 4 tail(m//4 - 1)}
    chain_constant: float  # error^2 / ((N(m)/m) sum_{k >= m/2} sigma_k^2)
    sigma_min: float
    K: int
    remainder: float
    master_seed: int
    trial: int
    beta: float
    subsample_status: str
    wall_ms: float

    def as_dict(self) -> dict:
        return asdict(self)


def run_trial(cfg: ExperimentConfig, m: int, trial: int) -> ExperimentReport:
    t0 = time.perf_counter()
    model = cfg.model
    spec = indexed_spectrum(model)
    n = default_node_count(m, cfg.beta)
    nodes = draw_nodes(model, m, n, cfg.master_seed, trial)
    conc = concentration_details(nodes, m)
    subset = None
    status = "off"
    if cfg.subsample:
        try:
            res = subsample(nodes, m, conc.K, cfg.target_size_factor, cfg.lower_bound_target,
                            cfg.upper_ratio_target)
            subset = res.indices
            status = "noop" if res.certificate.get("noop") else "ok"
        except SubsampleFailure:
            status = "failed"  # fall back to all nodes, flagged in the report
    fit = fit_least_squares(model, m, nodes, subset=subset, real=cfg.real)
    wc = worst_case_error(model, fit, grid=cfg.grid)
    a_next = approx_number(spec, m)
    rhs = periodic_bound_rhs(spec, m)
    return ExperimentReport(
        m=m,
        n=n,
        J=int(subset.size) if subset is not None else n,
        d=model.d,
        model_id=model.model_id,
        error=wc.error,
        a_next=a_next,
        ratio=wc.error / a_next,
        concentration=conc.total,
        error_lower=wc.lower,
        projection_error=math.sqrt(spec.tail(m)),
        projection_bound=projection_bound(spec, m),
        bound_rhs=rhs,
        chain_constant=wc.error**2 / (christoffel(model, m) / m * _sum_from(spec, m // 2)),
        sigma_min=fit.sigma_min,
        K=wc.K,
        remainder=wc.remainder,
        master_seed=cfg.master_seed,
        trial=trial,
        beta=cfg.beta,
        subsample_status=status,
        wall_ms=(time.perf_counter() - t0) * 1000.0,
    )


def run_experiment(cfg: ExperimentConfig, on_row=None) -> list[ExperimentReport]:
    """All (m, trial) pairs; rows come back in (m, trial) order regardless of threading.

    ``on_row`` is called with each finished report (in order), so callers can
    flush partial results.
    """
    jobs = [(m, t) for m in cfg.m_list for t in range(cfg.seeds)]
    indexed_spectrum(cfg.model).extend(max(cfg.m_list) + 1)
    out = []
    if cfg.threads <= 1:
        for m, t in jobs:
            r = run_trial(cfg, m, t)
            out.append(r)
            if on_row:
                on_row(r)
        return out
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for r in pool.map(lambda job: run_trial(cfg, *job), jobs):
            out.append(r)
            if on_row:
                on_row(r)
    return out
