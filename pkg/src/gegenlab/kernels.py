# Inner-product kernels h(<x1, x2>/d): built-in families, their eigenvalue
# profiles xi_k / mu_k on each domain, kernel matrices, the degree-l polynomial
# surrogate, and the effective regularization (lambda + mu_tail) / mu_l.

import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .domains import HYPERCUBE, SPHERE, Domain, marginal_measure, subspace_dim
from .gegenbauer import DEFAULT_MAX_DEGREE, GegenbauerEvaluator, apply_weighted, eval_gegenbauer

PSD_TOL = 1e-9


@dataclass(frozen=True)
class KernelSpec:
    id: str
    params: tuple = ()

    def h(self, s):
        """Evaluate the scalar kernel function on s in [-1, 1]."""
        s = np.asarray(s, dtype=float)
        if self.id == "exponential":
            (c,) = self.params
            return np.exp(c * s)
        if self.id == "sphere_rbf":
            (g,) = self.params
            return np.exp(-2.0 * g * (1.0 - s))
        if self.id == "polynomial":
            a, b, p = self.params
            return (a + b * s) ** p
        raise ValueError(f"kernel {self.id!r} has no pointwise form")

    @property
    def h1(self):
        if self.id == "tabulated":
            return float(np.sum(self.params))
        return float(self.h(1.0))


def exponential(c=1.0):
    return KernelSpec("exponential", (float(c),))


def sphere_rbf(gamma):
    """exp(-gamma ||x - y||^2 / d) on the rescaled sphere, as a function of <x,y>/d."""
    return KernelSpec("sphere_rbf", (float(gamma),))


def polynomial(a, b, p):
    return KernelSpec("polynomial", (float(a), float(b), int(p)))


def tabulated(mu):
    """Kernel given directly by its masses mu_k, k = 0..K; may be non-PSD."""
    return KernelSpec("tabulated", tuple(float(m) for m in mu))


@dataclass(frozen=True)
class CoefficientProfile:
    domain: Domain
    K: int
    xi: np.ndarray
    mu: np.ndarray
    h_at_1: float
    kernel: KernelSpec = None

    @property
    def is_psd(self):
        return bool(np.all(self.xi >= -PSD_TOL))

    def tail(self, ell):
        """mu_{>ell} = h(1) - sum_{k<=ell} mu_k; exact by the Q_k(d) = 1 normalization."""
        if ell > self.K:
            raise ValueError("tail cutoff exceeds profile cutoff K")
        return self.h_at_1 - float(self.mu[: ell + 1].sum())

    def to_json(self):
        doc = {
            "domain": self.domain.kind,
            "d": self.domain.d,
            "K": self.K,
            "xi": list(self.xi),
            "mu": list(self.mu),
            "h1": self.h_at_1,
        }
        if self.kernel is not None:
            doc["kernel_id"] = self.kernel.id
            doc["kernel_params"] = list(self.kernel.params)
        return json.dumps(doc)

    @staticmethod
    def from_json(text):
        doc = json.loads(text)
        kernel = None
        if "kernel_id" in doc:
            kernel = KernelSpec(doc["kernel_id"], tuple(doc["kernel_params"]))
        return CoefficientProfile(
            domain=Domain(doc["domain"], doc["d"]),
            K=doc["K"],
            xi=np.array(doc["xi"]),
            mu=np.array(doc["mu"]),
            h_at_1=doc["h1"],
            kernel=kernel,
        )


def compute_profile(kernel, domain, K=None, quadrature_order=200):
    """Coefficient profile xi_k = int h(t/d) Q_k(t) dmu(t), mu_k = xi_k B_k.

    Hypercube defaults to the complete profile K = d (exact atoms); the sphere
    default keeps K = 8 and folds everything beyond into the tail.
    """
    b = None
    if kernel.id == "tabulated":
        mu = np.array(kernel.params)
        K = len(mu) - 1
        if domain.kind == HYPERCUBE and K > domain.d:
            raise ValueError("tabulated profile longer than hypercube degree range")
        b = np.array([subspace_dim(domain, k) for k in range(K + 1)])
        xi = mu / b
    else:
        if K is None:
            K = domain.d if domain.kind == HYPERCUBE else DEFAULT_MAX_DEGREE
        if domain.kind == HYPERCUBE and K > domain.d:
            raise ValueError("profile cutoff K exceeds hypercube dimension")
        mm = marginal_measure(domain, quadrature_order)
        ev = GegenbauerEvaluator(domain, K)
        q = eval_gegenbauer(ev, mm.nodes)
        h = kernel.h(mm.nodes / domain.d)
        xi = q @ (mm.weights * h)
        b = np.array([subspace_dim(domain, k) for k in range(K + 1)])
        mu = xi * b
    if np.any(xi < -PSD_TOL):
        warnings.warn(
            f"profile of {kernel.id} on {domain.kind} d={domain.d} has negative "
            f"coefficients (min xi = {xi.min():.3e}); kernel is not PSD",
            stacklevel=2,
        )
    xi = np.asarray(xi, dtype=float)
    mu = np.asarray(mu, dtype=float)
    xi.setflags(write=False)
    mu.setflags(write=False)
    return CoefficientProfile(domain=domain, K=K, xi=xi, mu=mu, h_at_1=kernel.h1, kernel=kernel)


def kernel_matrix(kernel, dataset):
    """H[i, j] = h(<x_i, x_j>/d); diagonal pinned to h(1)."""
    t = dataset.points @ dataset.points.T
    if dataset.domain.kind == HYPERCUBE:
        np.rint(t, out=t)
    if kernel.id == "tabulated":
        h = apply_weighted(dataset.domain, t, np.array(kernel.params))
    else:
        h = kernel.h(t / dataset.domain.d)
    np.fill_diagonal(h, kernel.h1)
    return h


def kernel_cross(kernel, domain, xa, xb):
    """Rectangular kernel block h(<a_i, b_j>/d) between two point sets."""
    t = np.asarray(xa, dtype=float) @ np.asarray(xb, dtype=float).T
    if domain.kind == HYPERCUBE:
        np.rint(t, out=t)
    if kernel.id == "tabulated":
        return apply_weighted(domain, t, np.array(kernel.params))
    return kernel.h(t / domain.d)


def poly_surrogate(dataset, ell, profile):
    """sum_{k<=ell} mu_k Q_k(gram) + mu_{>ell} I: the rank-structured stand-in
    for the kernel matrix at level ell."""
    t = dataset.points @ dataset.points.T
    if dataset.domain.kind == HYPERCUBE:
        np.rint(t, out=t)
    hbar = apply_weighted(dataset.domain, t, profile.mu[: ell + 1])
    hbar[np.diag_indices_from(hbar)] += profile.tail(ell)
    return hbar


def poly_approx_defect(kernel, dataset, ell, profile):
    """Operator-norm distance between H and its degree-ell surrogate."""
    diff = kernel_matrix(kernel, dataset) - poly_surrogate(dataset, ell, profile)
    if diff.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvalsh(diff)).max())


def effective_regularization(profile, ell, lam):
    """zeta = (lambda + mu_{>ell}) / mu_ell."""
    mu_ell = float(profile.mu[ell])
    if mu_ell <= 0.0:
        raise ValueError(f"mu_{ell} = {mu_ell:.3e} is not positive")
    return (lam + profile.tail(ell)) / mu_ell


def high_frequency_masses(profile, ell):
    """Report-only view of the top-degree masses mu_{d-k}, k <= ell (hypercube,
    complete profile). No admissibility condition is enforced on them."""
    if profile.domain.kind != HYPERCUBE or profile.K != profile.domain.d:
        raise ValueError("high-frequency masses need a complete hypercube profile")
    d = profile.domain.d
    return {d - k: float(profile.mu[d - k]) for k in range(ell + 1)}
