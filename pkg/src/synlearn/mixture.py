"""Two-model engine: Gaussian mixture (model p) against a Gaussian KDE (model q).

EM fitting of the mixture, posterior responsibilities, kernel density
evaluation, the smoothing-parameter fixed point, a Monte Carlo estimate of
the KL free energy between the two models, and cluster-number selection by
minimizing that estimate.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import logsumexp

from .seeding import derive_rng

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class Dataset:
    """Sample matrix (rows are points) with optional ground-truth labels.

    Labels are for synthetic benchmarks only; no fitting routine reads them.
    """

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", points)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise ValueError(f"points must be a nonempty N x d matrix, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise ValueError("points must be finite")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=int)
            object.__setattr__(self, "labels", labels)
            if labels.shape != (points.shape[0],):
                raise ValueError(
                    f"labels length {labels.size} != number of points {points.shape[0]}"
                )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class GmmModel:
    """Gaussian mixture: weights alpha_k, means mu_k, full covariances Sigma_k."""

    weights: np.ndarray      # (K,)
    means: np.ndarray        # (K, d)
    covariances: np.ndarray  # (K, d, d)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        covariances = np.asarray(self.covariances, dtype=float)
        if covariances.ndim == 2:
            covariances = covariances[None, :, :]
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covariances)
        k, d = means.shape
        if weights.shape != (k,):
            raise ValueError(f"weights shape {weights.shape} does not match {k} means")
        if covariances.shape != (k, d, d):
            raise ValueError(
                f"covariances shape {covariances.shape} != ({k}, {d}, {d})"
            )
        if np.any(weights <= 0):
            raise ValueError("mixture weights must be strictly positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {weights.sum()!r}")
        sym_err = np.max(np.abs(covariances - np.transpose(covariances, (0, 2, 1))))
        if sym_err > 1e-12:
            raise ValueError(f"covariances must be symmetric (max asymmetry {sym_err:.3e})")

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class KdeModel:
    """Gaussian kernel density: stored sample matrix plus isotropic bandwidth h^2.

    Each kernel is a normalized Gaussian with covariance h^2 * I_d, so the
    density integrates to 1 by construction.
    """

    centers: np.ndarray
    bandwidth_sq: float

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        object.__setattr__(self, "centers", centers)
        if not np.all(np.isfinite(centers)):
            raise ValueError("centers must be finite")
        if not (np.isfinite(self.bandwidth_sq) and self.bandwidth_sq > 0):
            raise ValueError(f"bandwidth_sq must be > 0, got {self.bandwidth_sq}")

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class EmOptions:
    """Knobs for fit_gmm_em."""

    max_iter: int = 200
    tol: float = 1e-7
    restarts: int = 5
    seed: int = 0
    cov_floor: float = 1e-6

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1 or self.restarts < 1:
            raise ValueError("max_iter and restarts must be >= 1")


@dataclass(frozen=True)
class EmFit:
    model: GmmModel
    loglik_trace: np.ndarray
    restart_used: int
    converged: bool


@dataclass(frozen=True)
class BandwidthOptions:
    """Knobs for the smoothing-parameter fixed point."""

    max_fp_iter: int = 100
    fp_tol: float = 1e-10
    h0: float | None = None


@dataclass(frozen=True)
class BandwidthResult:
    """Outcome of the bandwidth fixed-point iteration.

    ``degenerate`` marks a non-positive update numerator (the previous iterate
    is kept rather than clamped). ``h_rel_nn_sq`` is h^2 over the mean squared
    nearest-neighbor distance, a dimensionless validity diagnostic for the
    small-h expansion behind the update.
    """

    h_sq: float
    iterations: int
    converged: bool
    degenerate: bool
    h_rel_nn_sq: float


@dataclass(frozen=True)
class KlEstimate:
    kl_estimate: float
    std_error: float


@dataclass(frozen=True)
class KCandidate:
    """Per-cluster-count row of a SelectionReport."""

    k: int
    converged_loglik: float
    h_sq: float
    kl_estimate: float
    kl_std_error: float
    em_restart_used: int
    bw_converged: bool
    bw_degenerate: bool


@dataclass(frozen=True)
class SelectionReport:
    per_k: list
    chosen_k: int


def _log_weighted_components(model: GmmModel, points: np.ndarray) -> np.ndarray:
    """(N, K) matrix of log alpha_k + log N(x_i | mu_k, Sigma_k), via Cholesky."""
    n, d = points.shape
    k = model.n_components
    out = np.empty((n, k))
    for j in range(k):
        chol = np.linalg.cholesky(model.covariances[j])
        diff = points - model.means[j]
        sol = solve_triangular(chol, diff.T, lower=True)
        maha = np.sum(sol**2, axis=0)
        log_det = 2.0 * np.sum(np.log(np.diag(chol)))
        out[:, j] = np.log(model.weights[j]) - 0.5 * (maha + log_det + d * LOG_2PI)
    return out


def gmm_log_density(model: GmmModel, points: np.ndarray) -> np.ndarray:
    """Log mixture density at each row of ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != model.dim:
        raise ValueError(f"points have dimension {points.shape[1]}, model has {model.dim}")
    return logsumexp(_log_weighted_components(model, points), axis=1)


def responsibilities(model: GmmModel, data: Dataset) -> np.ndarray:
    """Posterior component probabilities, one row per sample, rows summing to 1."""
    if data.dim != model.dim:
        raise ValueError(f"data dimension {data.dim} != model dimension {model.dim}")
    log_comp = _log_weighted_components(model, data.points)
    return np.exp(log_comp - logsumexp(log_comp, axis=1, keepdims=True))


def _kmeanspp_means(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seed k means from the data, each new one drawn proportionally to its
    squared distance from the nearest already-chosen mean."""
    n = points.shape[0]
    chosen = [points[rng.integers(n)]]
    d2 = np.sum((points - chosen[0]) ** 2, axis=1)
    for _ in range(k - 1):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        chosen.append(points[idx])
        d2 = np.minimum(d2, np.sum((points - chosen[-1]) ** 2, axis=1))
    return np.array(chosen)


def _m_step(points: np.ndarray, resp: np.ndarray, ridge: float) -> GmmModel:
    n, d = points.shape
    nk = np.maximum(resp.sum(axis=0), 1e-300)
    weights = nk / n
    weights = weights / weights.sum()
    means = (resp.T @ points) / nk[:, None]
    covs = np.empty((len(nk), d, d))
    for j in range(len(nk)):
        diff = points - means[j]
        cov = (resp[:, j, None] * diff).T @ diff / nk[j]
        cov = 0.5 * (cov + cov.T) + ridge * np.eye(d)
        covs[j] = cov
    return GmmModel(weights, means, covs)


def fit_gmm_em(data: Dataset, k: int, opts: EmOptions = EmOptions()) -> EmFit:
    """Fit a k-component Gaussian mixture by EM with seeded restarts.

    Initialization per restart: means seeded from data points
    (squared-distance weighting), covariances set to the global sample
    covariance, uniform weights. After every M-step a floor ridge
    cov_floor * tr(Sigma_global)/d * I is added to each covariance, so the
    log-likelihood trace is non-decreasing only up to that perturbation.
    The restart with the highest final log-likelihood wins.
    """
    points = data.points
    n, d = points.shape
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < k:
        raise ValueError(f"need at least k={k} points, got {n}")
    global_cov = np.cov(points, rowvar=False, ddof=0).reshape(d, d)
    ridge = opts.cov_floor * np.trace(global_cov) / d
    if ridge <= 0:
        raise ValueError("all points identical: covariance degenerate, cannot fit")
    init_cov = 0.5 * (global_cov + global_cov.T) + ridge * np.eye(d)

    best = None
    for r in range(opts.restarts):
        rng = derive_rng(opts.seed, "em-init", k, r)
        means = _kmeanspp_means(points, k, rng)
        model = GmmModel(np.full(k, 1.0 / k), means, np.tile(init_cov, (k, 1, 1)))

        trace = []
        converged = False
        for _ in range(opts.max_iter):
            log_comp = _log_weighted_components(model, points)
            row_lse = logsumexp(log_comp, axis=1)
            trace.append(float(row_lse.sum()))
            if len(trace) >= 2 and abs(trace[-1] - trace[-2]) < opts.tol:
                converged = True
                break
            resp = np.exp(log_comp - row_lse[:, None])
            model = _m_step(points, resp, ridge)
        if not converged:
            # score the final M-step result so the trace matches the model
            final_ll = float(logsumexp(_log_weighted_components(model, points), axis=1).sum())
            trace.append(final_ll)

        fit = EmFit(model, np.asarray(trace), r, converged)
        if best is None or fit.loglik_trace[-1] > best.loglik_trace[-1]:
            best = fit
    return best


def kde_log_density(kde: KdeModel, points: np.ndarray) -> np.ndarray:
    """Log KDE density at each row of ``points``, accumulated in log space."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = kde.centers.shape
    if points.shape[1] != d:
        raise ValueError(f"points have dimension {points.shape[1]}, KDE has {d}")
    d2 = np.sum((points[:, None, :] - kde.centers[None, :, :]) ** 2, axis=2)
    log_kernels = -d2 / (2.0 * kde.bandwidth_sq)
    norm = np.log(n) + 0.5 * d * (LOG_2PI + np.log(kde.bandwidth_sq))
    return logsumexp(log_kernels, axis=1) - norm


def kde_density(kde: KdeModel, x) -> float:
    """Density (1/N) sum_i N(x | x_i, h^2 I) at a single point."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return float(np.exp(kde_log_density(kde, x)[0]))


def silverman_bandwidth_sq(points: np.ndarray) -> float:
    """Rule-of-thumb start h0^2 = (4 / ((d+2) N))^(2/(d+4)) * mean marginal variance."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = points.shape
    if n < 2:
        raise ValueError("need at least 2 points for the rule-of-thumb bandwidth")
    var = float(np.mean(np.var(points, axis=0, ddof=1)))
    if var <= 0:
        raise ValueError("zero sample variance: no default bandwidth, pass h0 explicitly")
    return (4.0 / ((d + 2) * n)) ** (2.0 / (d + 4)) * var


def estimate_bandwidth(
    data: Dataset, model: GmmModel, opts: BandwidthOptions = BandwidthOptions()
) -> BandwidthResult:
    """Resolve the implicit smoothing-parameter equation for h^2.

    Update map, with q the KDE built from the data at the current h^2 and
    r the posterior responsibilities under ``model``:

        T(h^2) = [ (1/2N) sum_j (q(x_j) - 1) ln q(x_j) ]
                 / [ (1/2N) sum_i || sum_k r_ik (x_i - m_k)^T Sigma_k^{-1} ||^2 ]

    The denominator does not depend on h and is computed once. Iteration is
    damped, h^2 <- h^2 + gamma (T(h^2) - h^2): gamma starts at 1 (pure
    updates) and halves whenever the residual T(h^2) - h^2 flips sign,
    because the pure map oscillates in a period-2 cycle wherever its slope
    at the root is below -1. Convergence is declared on the raw residual,
    |T(h^2) - h^2| < fp_tol (1 + h^2), so a converged value moves less than
    the tolerance under one more pure update. A non-positive numerator is a
    degeneracy signal: the previous iterate is returned with
    ``converged=False`` rather than clamped, so model misfit stays visible.
    """
    if data.dim != model.dim:
        raise ValueError(f"data dimension {data.dim} != model dimension {model.dim}")
    points = data.points
    n = data.n

    resp = responsibilities(model, data)
    whitened = np.zeros((n, data.dim))
    for j in range(model.n_components):
        cf = cho_factor(model.covariances[j], lower=True)
        diff = points - model.means[j]
        whitened += resp[:, j, None] * cho_solve(cf, diff.T).T
    j_r = float(np.sum(whitened**2)) / (2.0 * n)
    if j_r == 0.0:
        raise ValueError("all responsibilities centered: J_r = 0, update undefined")

    h_sq = opts.h0 if opts.h0 is not None else silverman_bandwidth_sq(points)
    if h_sq <= 0:
        raise ValueError(f"h0 must be > 0, got {h_sq}")

    # pairwise squared distances are h-independent; evaluating the KDE on its
    # own sample via this cache matches kde_log_density bit for bit
    d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=2)
    if n >= 2:
        off = d2 + np.where(np.eye(n, dtype=bool), np.inf, 0.0)
        nn_sq = float(np.mean(off.min(axis=1)))
    else:
        nn_sq = float("nan")

    gamma = 1.0
    prev_resid = 0.0
    for it in range(1, opts.max_fp_iter + 1):
        log_norm = np.log(n) + 0.5 * data.dim * (LOG_2PI + np.log(h_sq))
        log_q = logsumexp(-d2 / (2.0 * h_sq), axis=1) - log_norm
        q = np.exp(log_q)
        num = float(np.sum((q - 1.0) * log_q)) / (2.0 * n)
        if num <= 0.0:
            return BandwidthResult(h_sq, it, False, True, h_sq / nn_sq)
        resid = num / j_r - h_sq
        if abs(resid) < opts.fp_tol * (1.0 + h_sq):
            return BandwidthResult(h_sq, it, True, False, h_sq / nn_sq)
        if resid * prev_resid < 0.0:
            gamma = max(0.5 * gamma, 1.0 / 64.0)
        prev_resid = resid
        h_sq = h_sq + gamma * resid
    return BandwidthResult(h_sq, opts.max_fp_iter, False, False, h_sq / nn_sq)


def kl_free_energy(
    kde: KdeModel, model: GmmModel, samples: int = 5000, seed: int = 0
) -> KlEstimate:
    """Monte Carlo estimate of KL[q || p] = E_q[ln q - ln p].

    Draws from q by picking a center uniformly and adding isotropic Gaussian
    noise of variance h^2. Returns the sample mean and its standard error.
    """
    if kde.dim != model.dim:
        raise ValueError(f"KDE dimension {kde.dim} != model dimension {model.dim}")
    if samples < 100:
        raise ValueError(f"need at least 100 Monte Carlo samples, got {samples}")
    rng = derive_rng(seed, "kl-mc")
    n, d = kde.centers.shape
    idx = rng.integers(n, size=samples)
    draws = kde.centers[idx] + np.sqrt(kde.bandwidth_sq) * rng.standard_normal((samples, d))
    diff = kde_log_density(kde, draws) - gmm_log_density(model, draws)
    return KlEstimate(
        kl_estimate=float(diff.mean()),
        std_error=float(diff.std(ddof=1) / np.sqrt(samples)),
    )


def select_cluster_number(
    data: Dataset,
    k_min: int,
    k_max: int,
    em_opts: EmOptions | None = None,
    bw_opts: BandwidthOptions | None = None,
    mc_samples: int = 5000,
    seed: int = 0,
) -> SelectionReport:
    """Pick the cluster count minimizing the estimated KL free energy.

    For each k in [k_min, k_max]: fit the mixture, resolve the bandwidth
    fixed point, estimate KL[q || p] with the same Monte Carlo seed (paired
    comparison across k). Ties break toward smaller k. Bandwidth degeneracy
    flags are recorded per k, never fatal.
    """
    if not (1 <= k_min <= k_max):
        raise ValueError(f"need 1 <= k_min <= k_max, got k_min={k_min}, k_max={k_max}")
    if k_max > data.n:
        raise ValueError(f"k_max={k_max} exceeds the number of samples N={data.n}")
    em_opts = em_opts if em_opts is not None else EmOptions(seed=seed)
    bw_opts = bw_opts if bw_opts is not None else BandwidthOptions()

    per_k = []
    for k in range(k_min, k_max + 1):
        fit = fit_gmm_em(data, k, em_opts)
        bw = estimate_bandwidth(data, fit.model, bw_opts)
        kl = kl_free_energy(
            KdeModel(data.points, bw.h_sq), fit.model, samples=mc_samples, seed=seed
        )
        per_k.append(
            KCandidate(
                k=k,
                converged_loglik=float(fit.loglik_trace[-1]),
                h_sq=bw.h_sq,
                kl_estimate=kl.kl_estimate,
                kl_std_error=kl.std_error,
                em_restart_used=fit.restart_used,
                bw_converged=bw.converged,
                bw_degenerate=bw.degenerate,
            )
        )

    chosen = per_k[0]
    for cand in per_k[1:]:
        if cand.kl_estimate < chosen.kl_estimate:
            chosen = cand
    return SelectionReport(per_k=per_k, chosen_k=chosen.k)
