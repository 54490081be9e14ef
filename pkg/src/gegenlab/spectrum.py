# Empirical spectra of Gegenbauer and kernel matrices: eigenvalue extraction,
# Kolmogorov-Smirnov distance to the Marchenko-Pastur limit, the low/high
# degree isometry defects, and the quadratic-form concentration check with its
# exact combinatorial oracle on the hypercube.

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .domains import HYPERCUBE, derive_rng, gram, sample_dataset, subspace_dim
from .gegenbauer import apply_weighted, fourier_features, gegenbauer_matrix
from .kernels import kernel_matrix
from .mp import mp_cdf, mp_law


def esd(matrix):
    """Sorted spectrum of a symmetric matrix."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size and np.abs(matrix - matrix.T).max() > 1e-10:
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigvalsh(matrix)


def ks_distance(eigenvalues, psi):
    """sup_x |F_emp(x) - F_MP(x)|, evaluated at the empirical step points and
    at the theory's atom at zero."""
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    n = len(ev)
    law = mp_law(psi)
    # cdf is flat except on [lam_-, lam_+] and at the atom; cache per distinct arg
    best = 0.0
    for i, x in enumerate(ev):
        f = mp_cdf(psi, x)
        best = max(best, abs(f - (i + 1) / n), abs(f - i / n))
    if law.atom > 0.0:
        below = float(np.searchsorted(ev, 0.0, side="left")) / n
        at = float(np.searchsorted(ev, 0.0, side="right")) / n
        best = max(best, abs(below - 0.0), abs(at - law.atom))
    return best


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    n: int
    b: int
    psi_hat: float
    ks: float
    trace_mean: float
    domain: object = None
    ell: int = None
    seed: int = None


def gegenbauer_spectrum(domain, ell, n, seed):
    """Spectrum report for the degree-ell Gegenbauer matrix on n fresh points."""
    data = sample_dataset(domain, n, seed)
    ev = esd(gegenbauer_matrix(data, ell))
    b = subspace_dim(domain, ell)
    psi_hat = n / b
    return SpectrumReport(
        eigenvalues=ev,
        n=n,
        b=b,
        psi_hat=psi_hat,
        ks=ks_distance(ev, psi_hat),
        trace_mean=float(ev.mean()),
        domain=domain,
        ell=ell,
        seed=seed,
    )


def isometry_defects(dataset, profile, ell):
    """Low defect ||Y^T Y / n - I|| on degrees < ell (through the nonzero
    spectrum of the Gegenbauer sum) and high defect ||H_{>ell} - mu_tail I||."""
    domain = dataset.domain
    n = dataset.n
    b_low = sum(subspace_dim(domain, k) for k in range(ell))
    if n <= b_low:
        raise ValueError(f"low-degree isometry needs n > B_(<ell) = {b_low}")
    t = gram(dataset)
    b_weights = np.array([subspace_dim(domain, k) for k in range(ell)], dtype=float)
    low_mat = apply_weighted(domain, t, b_weights) / n
    spec = np.linalg.eigvalsh(low_mat)
    low = float(np.abs(spec[-b_low:] - 1.0).max())
    if profile.kernel is None:
        raise ValueError("profile must carry its kernel to assemble H")
    h = kernel_matrix(profile.kernel, dataset)
    h -= apply_weighted(domain, t, profile.mu[: ell + 1])
    h[np.diag_indices_from(h)] -= profile.tail(ell)
    high = float(np.abs(np.linalg.eigvalsh(h)).max())
    return {"low": low, "high": high}


def _subset_masks(d, ell):
    masks = []
    for comb in itertools.combinations(range(d), ell):
        m = 0
        for i in comb:
            m |= 1 << i
        masks.append(m)
    return np.array(masks, dtype=np.uint64)


def quadratic_form_variance(domain, ell, a_matrix, method="exact", n_samples=100_000, seed=0):
    """Variance of Q(x) = Y_l(x)^T A Y_l(x)/B - Tr(A)/B over x.

    `exact` groups the off-diagonal entries of A by the symmetric difference of
    their index subsets (pairs with equal difference are perfectly correlated,
    all others uncorrelated) and adds the diagonal correction, which vanishes
    identically on the hypercube since Y_S^2 = 1. `monte_carlo` estimates the
    same quantity from n_samples draws; returns (estimate, standard_error).
    """
    if domain.kind != HYPERCUBE:
        raise ValueError("quadratic-form variance needs the explicit hypercube basis")
    d = domain.d
    b = subspace_dim(domain, ell)
    a_matrix = np.asarray(a_matrix, dtype=float)
    if a_matrix.shape != (b, b):
        raise ValueError(f"A must be {b} x {b} for d={d}, ell={ell}")
    if np.abs(a_matrix - a_matrix.T).max() > 1e-10:
        raise ValueError("A must be symmetric")
    if method == "exact":
        if b > 200:
            raise ValueError("exact method is limited to B = C(d, ell) <= 200")
        masks = _subset_masks(d, ell)
        iu, ju = np.triu_indices(b, k=1)
        keys = masks[iu] ^ masks[ju]
        _, inv = np.unique(keys, return_inverse=True)
        sums = np.bincount(inv, weights=a_matrix[iu, ju])
        diag_correction = 0.0  # Y_S(x)^2 = 1 pointwise
        off = 4.0 * float(sums @ sums) / b**2  # ordered pairs double each i<j entry
        return off + diag_correction, 0.0
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    rng = derive_rng(seed, 0)
    x = rng.integers(0, 2, size=(n_samples, d)).astype(float) * 2.0 - 1.0
    y = fourier_features(x, ell)
    q = np.einsum("ij,ij->i", y @ a_matrix, y) / b - np.trace(a_matrix) / b
    var = float(q.var(ddof=1))
    centered = q - q.mean()
    m4 = float((centered**4).mean())
    se = math.sqrt(max(m4 - var**2, 0.0) / n_samples)
    return var, se
