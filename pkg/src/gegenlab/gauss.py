# Gaussian-covariates ridge model sharing the kernel's eigenvalue layout:
# independent Gaussian feature blocks with variances mu_k / B_k, the matching
# rescaled target vector, exact test risk through the diagonal covariance, and
# the paired equivalence report against kernel ridge regression.

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .domains import derive_rng, sample_dataset, subspace_dim
from .kernels import compute_profile, effective_regularization
from .krr import SOLVE_RTOL, draw_target, evaluate_target, fit_krr, test_error_exact
from .mp import risk_curves

FOLD = "fold"
EXPLICIT = "explicit"


@dataclass(frozen=True)
class GaussianDesign:
    domain: object
    k_max: int
    block_dims: tuple  # B_0, ..., B_K (+ p_tail when explicit)
    block_vars: tuple  # second moment per coordinate within each block
    theta_star: np.ndarray
    tail_mode: str
    tail_mass: float  # mu_{>K}, folded into the ridge when tail_mode == "fold"
    tail_energy: float  # target energy beyond K, folded into the noise
    mu0: float

    @property
    def p(self):
        return int(sum(self.block_dims))

    def covariance_diag(self):
        return np.repeat(np.array(self.block_vars), np.array(self.block_dims))


def make_design(profile, f_sq, seed, k_max=None, ell=None, tail_mode=FOLD, p_tail=None, beta_star=None):
    """Design blocks k = 0..K with coordinate variances mu_k / B_k and a target
    vector drawn to match the per-degree energies F_k^2.

    Degrees beyond K are folded into the ridge (mass mu_{>K}) and the noise
    (energy sum_{k>K} F_k^2), or carried as one explicit block of p_tail
    coordinates.
    """
    if k_max is None:
        if ell is None:
            raise ValueError("need k_max or ell (defaults to ell + 1)")
        k_max = ell + 1
    if profile.K < k_max:
        raise ValueError("profile cutoff is below the requested block range")
    rng = derive_rng(seed, 0)
    beta_star = beta_star or {}
    domain = profile.domain
    dims = [subspace_dim(domain, k) for k in range(k_max + 1)]
    # k = 0 coordinate is the constant sqrt(mu_0); its second moment is mu_0
    variances = [float(profile.mu[0])] + [float(profile.mu[k]) / dims[k] for k in range(1, k_max + 1)]
    theta = []
    for k in range(k_max + 1):
        block = np.zeros(dims[k])
        f2 = f_sq.get(k, 0.0)
        if f2 > 0.0:
            if profile.mu[k] <= 0:
                raise ValueError(f"cannot carry signal on a block with mu_{k} <= 0")
            block += rng.normal(0.0, math.sqrt(f2 / profile.mu[k]), size=dims[k])
        if k in beta_star:
            det = np.asarray(beta_star[k], dtype=float)
            block += math.sqrt(dims[k] / profile.mu[k]) * det
        theta.append(block)
    tail_mass = profile.tail(k_max)
    tail_energy = float(sum(v for k, v in f_sq.items() if k > k_max))
    if tail_mode == EXPLICIT:
        if p_tail is None:
            raise ValueError("explicit tail handling needs p_tail")
        dims.append(int(p_tail))
        variances.append(tail_mass / p_tail)
        scale = math.sqrt(tail_energy / tail_mass) if tail_energy > 0 else 0.0
        theta.append(rng.normal(0.0, 1.0, size=int(p_tail)) * scale)
        tail_mass = 0.0
        tail_energy = 0.0
    elif tail_mode != FOLD:
        raise ValueError(f"unknown tail mode {tail_mode!r}")
    return GaussianDesign(
        domain=domain,
        k_max=k_max,
        block_dims=tuple(dims),
        block_vars=tuple(variances),
        theta_star=np.concatenate(theta),
        tail_mode=tail_mode,
        tail_mass=tail_mass,
        tail_energy=tail_energy,
        mu0=float(profile.mu[0]),
    )


def sample_design_features(design, n, seed):
    """n i.i.d. feature rows; the k = 0 coordinate is the constant sqrt(mu_0)."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, design.p)) * np.sqrt(design.covariance_diag())
    z[:, 0] = math.sqrt(design.mu0)
    return z


def ridge_fit_gauss(z, y, lam):
    """Dual-form ridge: theta = Z^T (Z Z^T + lambda I)^{-1} y."""
    y = np.asarray(y, dtype=float)
    m = z @ z.T
    m[np.diag_indices_from(m)] += lam
    factor = cho_factor(m)
    w = cho_solve(factor, y)
    ynorm = np.linalg.norm(y)
    res = np.linalg.norm(m @ w - y) / ynorm if ynorm > 0 else 0.0
    if res > SOLVE_RTOL and ynorm > 0:
        w = w + cho_solve(factor, y - m @ w)
    return z.T @ w


def gauss_risk(theta_hat, design):
    """Exact E_z[(<z, theta_*> - <z, theta_hat>)^2] plus the folded tail energy."""
    err = design.theta_star - theta_hat
    return float(err @ (design.covariance_diag() * err)) + design.tail_energy


def gauss_trial(design, n, lam, sigma_eps, seed):
    """One draw of (Z, noise): fit and exact risk. Folded tail degrees act as
    extra ridge (mass) and extra noise (energy)."""
    sub = derive_rng(seed, 0).integers(2**62, size=2)
    z = sample_design_features(design, n, int(sub[0]))
    noise_sd = math.sqrt(sigma_eps**2 + design.tail_energy)
    noise = np.random.default_rng(int(sub[1])).normal(0.0, noise_sd, size=n)
    y = z @ design.theta_star + noise
    theta_hat = ridge_fit_gauss(z, y, lam + design.tail_mass)
    return gauss_risk(theta_hat, design)


@dataclass(frozen=True)
class EquivalenceRow:
    n: int
    psi_hat: float
    krr_mean: float
    krr_se: float
    gauss_mean: float
    gauss_se: float
    theory_r_test: float


def equivalence_report(domain, kernel, ell, lam, f_sq, sigma_eps, n_grid, trials, seed, k_max=None, tail_mode=FOLD, p_tail=None):
    """Paired KRR-vs-Gaussian-model risks over matched configurations, both
    against the closed-form limit."""
    profile = compute_profile(kernel, domain)
    zeta = effective_regularization(profile, ell, lam)
    f_ell = f_sq.get(ell, 0.0)
    f_tail = sum(v for k, v in f_sq.items() if k > ell)
    b_ell = subspace_dim(domain, ell)
    rows = []
    for gi, n in enumerate(n_grid):
        psi = n / b_ell
        theory = risk_curves(psi, zeta, f_ell, f_tail, sigma_eps**2, lam, float(profile.mu[ell]))
        krr_risk = np.empty(trials)
        gauss_vals = np.empty(trials)
        for t in range(trials):
            sub = derive_rng(seed, gi, t).integers(2**62, size=4)
            data = sample_dataset(domain, n, int(sub[0]))
            target = draw_target(domain, f_sq, int(sub[1]), sigma_eps=sigma_eps)
            noise = np.random.default_rng(int(sub[2])).normal(0.0, sigma_eps, size=n)
            y = evaluate_target(target, data.points) + noise
            fit = fit_krr(data, kernel, lam, y, profile)
            krr_risk[t] = test_error_exact(fit, target).total
            design = make_design(profile, f_sq, int(sub[3]), ell=ell, k_max=k_max, tail_mode=tail_mode, p_tail=p_tail)
            gauss_vals[t] = gauss_trial(design, n, lam, sigma_eps, int(sub[3]) + 1)
        rows.append(
            EquivalenceRow(
                n=n,
                psi_hat=psi,
                krr_mean=float(krr_risk.mean()),
                krr_se=float(krr_risk.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
                gauss_mean=float(gauss_vals.mean()),
                gauss_se=float(gauss_vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
                theory_r_test=theory.r_test,
            )
        )
    return rows
