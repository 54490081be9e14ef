# Kernel ridge regression lab: random targets with exact per-degree energies,
# dual-form fits, Monte-Carlo and exact (harmonic-decomposition) test error,
# the per-degree bias/variance split over label noise, and the descent sweep
# pairing empirical statistics with the closed-form limits.

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .domains import HYPERCUBE, derive_rng, sample_dataset, subspace_dim
from .gegenbauer import apply_weighted, fourier_features, frobenius_forms
from .kernels import compute_profile, effective_regularization, kernel_cross, kernel_matrix
from .mp import risk_curves

SOLVE_RTOL = 1e-10


def lambda_floor(kernel):
    """Numerically stable stand-in for ridgeless interpolation (lambda -> 0+)."""
    return 1e-8 * kernel.h1


@dataclass(frozen=True)
class HypercubeTarget:
    """Explicit Fourier expansion: coefficient vector per degree, columns in
    lexicographic subset order."""

    domain: object
    coeffs: dict
    sigma_eps: float
    energies: dict


@dataclass(frozen=True)
class SphereFeatureTarget:
    """Finite combination of degree-k kernel features sum_j c_j Q_k(<w_j, x>);
    norms and cross terms are exact through the reproducing identity."""

    domain: object
    features: dict  # degree -> (centers m x d, weights m)
    sigma_eps: float
    energies: dict


def draw_target(domain, f_sq, seed, sigma_eps=0.0, beta_star=None, centers_per_dim=4):
    """Random target with per-degree mean-square energies F_k^2 plus an optional
    deterministic part; exact realized energies are recorded per degree."""
    rng = derive_rng(seed, 0)
    beta_star = beta_star or {}
    if domain.kind == HYPERCUBE:
        coeffs, energies = {}, {}
        for k in sorted(set(f_sq) | set(beta_star)):
            if k > domain.d:
                raise ValueError(f"degree {k} exceeds hypercube dimension {domain.d}")
            b = subspace_dim(domain, k)
            vec = np.zeros(b)
            if f_sq.get(k, 0.0) > 0.0:
                vec += rng.normal(0.0, math.sqrt(f_sq[k] / b), size=b)
            if k in beta_star:
                det = np.asarray(beta_star[k], dtype=float)
                if det.shape != (b,):
                    raise ValueError(f"deterministic coefficients at degree {k} must have length {b}")
                vec += det
            coeffs[k] = vec
            energies[k] = float(vec @ vec)
        return HypercubeTarget(domain=domain, coeffs=coeffs, sigma_eps=sigma_eps, energies=energies)

    features, energies = {}, {}
    for k in sorted(set(f_sq) | set(beta_star)):
        if k in f_sq and k in beta_star:
            raise ValueError(f"degree {k} cannot be both random and deterministic")
        if k in beta_star:
            w, c = beta_star[k]
            w = np.asarray(w, dtype=float)
            c = np.asarray(c, dtype=float)
        else:
            b = subspace_dim(domain, k)
            m = centers_per_dim * b
            w = sample_dataset(domain, m, int(rng.integers(2**63))).points
            c = rng.normal(0.0, 1.0 / math.sqrt(m), size=m)
            energy = _feature_energy(domain, k, w, c)
            c = c * math.sqrt(f_sq[k] / energy)
        features[k] = (w, c)
        energies[k] = _feature_energy(domain, k, w, c)
    return SphereFeatureTarget(domain=domain, features=features, sigma_eps=sigma_eps, energies=energies)


def _unit_weight(k):
    w = np.zeros(k + 1)
    w[k] = 1.0
    return w


def _feature_energy(domain, k, w, c):
    # ||P_k f||^2 = c^T Q_k(W W^T) c / B_k by the reproducing identity
    g = apply_weighted(domain, w @ w.T, _unit_weight(k))
    return float(c @ g @ c) / subspace_dim(domain, k)


def target_energy(target):
    return float(sum(target.energies.values()))


def degree_components(target, points):
    """(P_k f)(x_i) for every degree the target carries."""
    out = {}
    if isinstance(target, HypercubeTarget):
        for k, vec in target.coeffs.items():
            out[k] = fourier_features(points, k) @ vec
    else:
        for k, (w, c) in target.features.items():
            cross = apply_weighted(target.domain, points @ w.T, _unit_weight(k))
            out[k] = cross @ c
    return out


def evaluate_target(target, points):
    """Noiseless values f_*(x_i)."""
    points = np.asarray(points, dtype=float)
    if points.shape[1] != target.domain.d:
        raise ValueError("points do not match the target's domain dimension")
    comps = degree_components(target, points)
    vals = np.zeros(points.shape[0])
    for v in comps.values():
        vals += v
    return vals


@dataclass(frozen=True)
class KRRFit:
    dataset: object
    kernel: object
    profile: object
    lam: float
    y: np.ndarray
    a: np.ndarray
    h: np.ndarray = field(repr=False)
    residual: float


def fit_krr(dataset, kernel, lam, y, profile=None):
    """Dual solve a = (H + lambda I)^{-1} y with the residual recorded.

    Profiles flagged non-PSD are refused unless lambda clears the most negative
    eigenvalue of H.
    """
    y = np.asarray(y, dtype=float)
    h = kernel_matrix(kernel, dataset)
    if profile is not None and not profile.is_psd:
        floor = -float(np.linalg.eigvalsh(h).min())
        if lam <= floor:
            raise ValueError(
                f"kernel profile is not PSD; need lambda > {floor:.3e} to regularize"
            )
    m = h.copy()
    m[np.diag_indices_from(m)] += lam
    factor = cho_factor(m)
    a = cho_solve(factor, y)
    ynorm = np.linalg.norm(y)
    res = np.linalg.norm(m @ a - y) / ynorm if ynorm > 0 else 0.0
    if res > SOLVE_RTOL and ynorm > 0:
        a = a + cho_solve(factor, y - m @ a)  # one refinement pass
        res = np.linalg.norm(m @ a - y) / ynorm
    return KRRFit(dataset=dataset, kernel=kernel, profile=profile, lam=lam, y=y, a=a, h=h, residual=float(res))


def train_error(fit):
    """(1/n) ||y - H a||^2, computed through the identity with lambda^2 ||a||^2 / n."""
    return fit.lam**2 * float(fit.a @ fit.a) / fit.dataset.n


def rkhs_norm_sq(fit):
    return float(fit.a @ fit.h @ fit.a)


def predict(fit, points):
    cross = kernel_cross(fit.kernel, fit.dataset.domain, points, fit.dataset.points)
    return cross @ fit.a


def test_error_mc(fit, target, n_test, seed):
    """Plug-in risk estimate on fresh points, with its standard error."""
    if n_test < 100:
        raise ValueError("n_test must be at least 100")
    test = sample_dataset(fit.dataset.domain, n_test, seed)
    sq = (evaluate_target(target, test.points) - predict(fit, test.points)) ** 2
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(n_test))


@dataclass(frozen=True)
class ExactRisk:
    total: float
    per_degree: dict
    k_tail: int
    tail_bound: float


def _complete_profile(fit, target):
    # exact risk needs xi_k out to where the series is provably negligible
    domain = fit.dataset.domain
    prof = fit.profile
    if domain.kind == HYPERCUBE:
        if prof is None or prof.K != domain.d:
            prof = compute_profile(fit.kernel, domain)
        return prof, 0.0
    k_need = max(target.energies, default=0) + 2
    k_tail = max(prof.K if prof is not None else 0, k_need, 10)
    a_sq = float(fit.a @ fit.a)
    while True:
        prof = compute_profile(fit.kernel, domain, K=k_tail)
        bound = float(prof.xi[k_tail]) * max(prof.tail(k_tail), 0.0) * a_sq
        if bound < 1e-12 or k_tail >= 48:
            return prof, bound
        k_tail += 6


def test_error_exact(fit, target):
    """Exact (up to linear-algebra roundoff on the hypercube) test error via the
    per-degree decomposition R = sum_k ||P_k (f_* - fhat)||^2; no test set drawn."""
    domain = fit.dataset.domain
    prof, tail_bound = _complete_profile(fit, target)
    k_tail = prof.K
    gram_t = fit.dataset.points @ fit.dataset.points.T
    if domain.kind == HYPERCUBE:
        np.rint(gram_t, out=gram_t)
    a = fit.a
    quad = frobenius_forms(domain, gram_t, np.outer(a, a), k_tail)
    comps = degree_components(target, fit.dataset.points)
    b = np.array([subspace_dim(domain, k) for k in range(k_tail + 1)])
    per = {}
    for k in range(k_tail + 1):
        e_k = target.energies.get(k, 0.0)
        cross = float(a @ comps[k]) if k in comps else 0.0
        per[k] = e_k - 2.0 * prof.xi[k] * cross + prof.xi[k] ** 2 * b[k] * quad[k]
    # energies at degrees beyond the cutoff are never fit at all
    for k, e_k in target.energies.items():
        if k > k_tail:
            per[k] = per.get(k, 0.0) + e_k
    total = float(sum(per.values()))
    return ExactRisk(total=total, per_degree=per, k_tail=k_tail, tail_bound=tail_bound)


def bias_variance_split(dataset, kernel, lam, target, profile=None):
    """Per-degree decomposition of E_eps[risk]: bias from the noiseless fit,
    variance sigma^2 xi_k^2 B_k Tr(Xi Q_k Xi) with Xi = (H + lambda I)^{-1}."""
    fit0 = fit_krr(dataset, kernel, lam, evaluate_target(target, dataset.points), profile)
    prof, _ = _complete_profile(fit0, target)
    k_tail = prof.K
    domain = dataset.domain
    gram_t = dataset.points @ dataset.points.T
    if domain.kind == HYPERCUBE:
        np.rint(gram_t, out=gram_t)
    m = fit0.h.copy()
    m[np.diag_indices_from(m)] += lam
    xi_mat = cho_solve(cho_factor(m), np.eye(dataset.n))
    a0 = fit0.a
    quad0 = frobenius_forms(domain, gram_t, np.outer(a0, a0), k_tail)
    tr = frobenius_forms(domain, gram_t, xi_mat @ xi_mat, k_tail)
    comps = degree_components(target, dataset.points)
    b = np.array([subspace_dim(domain, k) for k in range(k_tail + 1)])
    bias, var = {}, {}
    for k in range(k_tail + 1):
        e_k = target.energies.get(k, 0.0)
        cross = float(a0 @ comps[k]) if k in comps else 0.0
        bias[k] = e_k - 2.0 * prof.xi[k] * cross + prof.xi[k] ** 2 * b[k] * quad0[k]
        var[k] = target.sigma_eps**2 * prof.xi[k] ** 2 * b[k] * tr[k]
    for k, e_k in target.energies.items():
        if k > k_tail:
            bias[k] = bias.get(k, 0.0) + e_k
            var.setdefault(k, 0.0)
    return bias, var


@dataclass(frozen=True)
class SweepRow:
    n: int
    psi_hat: float
    r_test_mean: float
    r_test_se: float
    r_train_mean: float
    rkhs_per_n_mean: float
    theory_r_test: float
    theory_r_train: float
    theory_rkhs_per_n: float


def descent_sweep(domain, kernel, ell, lam, f_sq, sigma_eps, n_grid, trials, seed, profile=None, beta_star=None):
    """Empirical risk statistics over fresh (X, eps, target) draws on an n grid,
    paired with the closed-form limits at zeta* from the kernel profile."""
    if profile is None:
        profile = compute_profile(kernel, domain)
    zeta = effective_regularization(profile, ell, lam)
    f_ell = f_sq.get(ell, 0.0)
    f_tail = sum(v for k, v in f_sq.items() if k > ell)
    b_ell = subspace_dim(domain, ell)
    rows = []
    for gi, n in enumerate(n_grid):
        psi = n / b_ell
        theory = risk_curves(psi, zeta, f_ell, f_tail, sigma_eps**2, lam, float(profile.mu[ell]))
        r_test = np.empty(trials)
        r_train = np.empty(trials)
        rkhs = np.empty(trials)
        for t in range(trials):
            sub = derive_rng(seed, gi, t).integers(2**62, size=3)
            data = sample_dataset(domain, n, int(sub[0]))
            target = draw_target(domain, f_sq, int(sub[1]), sigma_eps=sigma_eps, beta_star=beta_star)
            noise = derive_rng(seed, gi, t, 1).normal(0.0, sigma_eps, size=n) if sigma_eps > 0 else 0.0
            y = evaluate_target(target, data.points) + noise
            fit = fit_krr(data, kernel, lam, y, profile)
            r_test[t] = test_error_exact(fit, target).total
            r_train[t] = train_error(fit)
            rkhs[t] = rkhs_norm_sq(fit) / n
        rows.append(
            SweepRow(
                n=n,
                psi_hat=psi,
                r_test_mean=float(r_test.mean()),
                r_test_se=float(r_test.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
                r_train_mean=float(r_train.mean()),
                rkhs_per_n_mean=float(rkhs.mean()),
                theory_r_test=theory.r_test,
                theory_r_train=theory.r_train,
                theory_rkhs_per_n=theory.rkhs_per_n,
            )
        )
    return rows
