# Data domains: uniform distributions on the sphere S^{d-1}(sqrt(d)) and the
# hypercube {-1,+1}^d, their Gram matrices, eigenspace dimensions, and the 1-d
# marginal measure of <v, x> used for kernel coefficient quadrature.

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import eigh_tridiagonal

SPHERE = "sphere"
HYPERCUBE = "hypercube"


@dataclass(frozen=True)
class Domain:
    kind: str
    d: int

    def __post_init__(self):
        if self.kind not in (SPHERE, HYPERCUBE):
            raise ValueError(f"unknown domain kind: {self.kind!r}")
        if self.kind == SPHERE and self.d < 3:
            raise ValueError("sphere domain requires d >= 3")
        if self.kind == HYPERCUBE and self.d < 1:
            raise ValueError("hypercube domain requires d >= 1")


def sphere(d):
    return Domain(SPHERE, d)


def hypercube(d):
    return Domain(HYPERCUBE, d)


@dataclass(frozen=True)
class Dataset:
    domain: Domain
    n: int
    points: np.ndarray  # n x d, rows on the domain
    seed: int


@dataclass(frozen=True)
class MarginalMeasure:
    """Distribution of <v, x> for fixed v on the domain, as nodes/weights on [-d, d]."""

    nodes: np.ndarray
    weights: np.ndarray
    exact: bool


def subspace_dim(domain, k):
    """Dimension of the degree-k eigenspace (polynomials of degree k orthogonal
    to lower degrees)."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    d = domain.d
    if domain.kind == HYPERCUBE:
        if k > d:
            raise ValueError(f"degree {k} exceeds hypercube dimension {d}")
        return math.comb(d, k)
    if k == 0:
        return 1
    # (2k + d - 2)/(d - 2) * C(k + d - 3, k); integer because d - 2 divides evenly
    return (2 * k + d - 2) * math.comb(k + d - 3, k) // (d - 2)


def derive_rng(master_seed, *key):
    """Counter-based seed derivation: a pure function of (master_seed, key).

    Parallel trials use disjoint keys, so results do not depend on scheduling
    order. Equal arguments always produce an identical generator.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key)))


def sample_dataset(domain, n, seed):
    """n i.i.d. uniform points on the domain; deterministic in (domain, n, seed)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    d = domain.d
    if domain.kind == HYPERCUBE:
        pts = rng.integers(0, 2, size=(n, d)).astype(float) * 2.0 - 1.0
    else:
        g = rng.standard_normal((n, d))
        nrm = np.linalg.norm(g, axis=1, keepdims=True)
        pts = g * (math.sqrt(d) / nrm)
    pts.setflags(write=False)
    return Dataset(domain=domain, n=n, points=pts, seed=seed)


def gram(dataset):
    """Inner-product matrix T[i, j] = <x_i, x_j>; exact integers on the hypercube."""
    t = dataset.points @ dataset.points.T
    if dataset.domain.kind == HYPERCUBE:
        np.rint(t, out=t)  # entries are sums of +-1 products
    return t


def _jacobi_symmetric_rule(alpha, order):
    # Golub-Welsch for the weight (1 - s^2)^alpha on [-1, 1], built from the
    # monic ultraspherical recurrence; avoids Gamma-function overflow at large alpha.
    lam = alpha + 0.5
    k = np.arange(1, order)
    c = k * (k + 2.0 * lam - 1.0) / ((2.0 * k + 2.0 * lam) * (2.0 * k + 2.0 * lam - 2.0))
    nodes, vecs = eigh_tridiagonal(np.zeros(order), np.sqrt(c))
    weights = vecs[0] ** 2
    weights /= weights.sum()
    return nodes, weights


def marginal_measure(domain, quadrature_order=200):
    """Nodes and weights for integrating against the law of <v, x> on [-d, d].

    Hypercube: the d+1 exact binomial atoms t = -d + 2j. Sphere: a Gauss rule
    in s = t/d exact for polynomials of degree <= 2*order - 1 against the
    density proportional to (1 - s^2)^((d-3)/2).
    """
    d = domain.d
    if domain.kind == HYPERCUBE:
        j = np.arange(d + 1)
        nodes = -d + 2.0 * j
        weights = np.array([float(Fraction(math.comb(d, int(jj)), 2**d)) for jj in j])
        return MarginalMeasure(nodes=nodes, weights=weights, exact=True)
    if quadrature_order < 1:
        raise ValueError("quadrature_order must be >= 1")
    s, w = _jacobi_symmetric_rule((d - 3) / 2.0, quadrature_order)
    return MarginalMeasure(nodes=d * s, weights=w, exact=False)
