# Orthogonal polynomial family Q_k on [-d, d] attached to each domain:
# normalized so Q_k(d) = 1, orthogonal under the 1-d marginal measure with
# <Q_k, Q_l> = delta_kl / B(domain, k). On the sphere these satisfy the
# classical ultraspherical recurrence; on the hypercube they are normalized
# Krawtchouk polynomials, evaluated with exact integer combinatorics at the
# lattice points.

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .domains import HYPERCUBE, marginal_measure, subspace_dim

DEFAULT_MAX_DEGREE = 8


def krawtchouk(d, k, j):
    """Exact integer K_k(j) = sum_i (-1)^i C(j,i) C(d-j,k-i); K_k(0) = C(d,k)."""
    return sum(
        (-1) ** i * math.comb(j, i) * math.comb(d - j, k - i) for i in range(k + 1)
    )


def _kraw_table(d, K):
    # Q_k at the lattice points t = d - 2j, j = 0..d, exact up to final rounding.
    tab = np.empty((K + 1, d + 1))
    for k in range(K + 1):
        denom = math.comb(d, k)
        for j in range(d + 1):
            tab[k, j] = float(Fraction(krawtchouk(d, k, j), denom))
    return tab


@dataclass
class GegenbauerEvaluator:
    domain: object
    max_degree: int = DEFAULT_MAX_DEGREE
    _table: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.domain.kind == HYPERCUBE:
            if self.max_degree > self.domain.d:
                raise ValueError("max_degree exceeds hypercube dimension")
            self._table = _kraw_table(self.domain.d, self.max_degree)

    def __call__(self, t):
        return eval_gegenbauer(self, t)


def _check_range(domain, t):
    lim = domain.d * (1.0 + 1e-9) + 1e-9
    if np.any(np.abs(t) > lim):
        raise ValueError(f"argument outside [-d, d] = [-{domain.d}, {domain.d}]")


def eval_gegenbauer(evaluator, t):
    """Values Q_0(t), ..., Q_K(t); output shape (K+1,) + shape(t)."""
    domain, K = evaluator.domain, evaluator.max_degree
    t = np.asarray(t, dtype=float)
    _check_range(domain, t)
    d = domain.d
    out = np.empty((K + 1,) + t.shape)
    out[0] = 1.0
    if K >= 1:
        out[1] = t / d
    if domain.kind == HYPERCUBE:
        for k in range(1, K):
            out[k + 1] = (t * out[k] - k * out[k - 1]) / (d - k)
    else:
        s = t / d
        for k in range(1, K):
            out[k + 1] = ((2 * k + d - 2) * s * out[k] - k * out[k - 1]) / (k + d - 2)
    return out


def _hypercube_j_index(d, t):
    # lattice index j with t = d - 2j; gram entries are exact integers
    j = np.rint((d - t) / 2.0).astype(np.intp)
    if np.any(j < 0) or np.any(j > d):
        raise ValueError("hypercube inner products outside [-d, d]")
    return j


def apply_weighted(domain, t, weights):
    """sum_k w[k] Q_k(t) evaluated entrywise, for one or several weight rows.

    `t` is any array of inner products (typically a Gram matrix). `weights`
    has shape (K+1,) or (m, K+1); one recurrence/table pass serves all rows.
    """
    t = np.asarray(t, dtype=float)
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    K = w.shape[1] - 1
    single = np.ndim(weights) == 1
    if domain.kind == HYPERCUBE:
        tab = _kraw_table(domain.d, K)
        j = _hypercube_j_index(domain.d, t)
        out = np.array([np.take(row, j) for row in (w @ tab)])
    else:
        _check_range(domain, t)
        d = domain.d
        s = t / d
        prev = np.ones_like(t)
        cur = s.copy()
        out = np.array([wr[0] * prev for wr in w])
        if K >= 1:
            for m in range(w.shape[0]):
                out[m] += w[m, 1] * cur
            for k in range(1, K):
                prev, cur = cur, ((2 * k + d - 2) * s * cur - k * prev) / (k + d - 2)
                for m in range(w.shape[0]):
                    out[m] += w[m, k + 1] * cur
    return out[0] if single else out


def frobenius_forms(domain, t, weight_matrix, K):
    """Array over k = 0..K of sum_ab Q_k(t[a,b]) * weight_matrix[a,b].

    Covers quadratic forms a^T Q_k(T) a (weight = outer(a, a)) and trace pairs
    Tr(M Q_k(T)) for symmetric M in a single pass.
    """
    t = np.asarray(t, dtype=float)
    m = np.asarray(weight_matrix, dtype=float)
    if domain.kind == HYPERCUBE:
        j = _hypercube_j_index(domain.d, t)
        wj = np.bincount(j.ravel(), weights=m.ravel(), minlength=domain.d + 1)
        return _kraw_table(domain.d, K) @ wj
    _check_range(domain, t)
    d = domain.d
    s = t / d
    prev = np.ones_like(t)
    cur = s.copy()
    out = np.empty(K + 1)
    out[0] = m.sum()
    if K >= 1:
        out[1] = np.vdot(cur, m)
        for k in range(1, K):
            prev, cur = cur, ((2 * k + d - 2) * s * cur - k * prev) / (k + d - 2)
            out[k + 1] = np.vdot(cur, m)
    return out


def gegenbauer_matrix(dataset, k):
    """Entrywise Q_k applied to the Gram matrix; unit diagonal, PSD."""
    t = dataset.points @ dataset.points.T
    if dataset.domain.kind == HYPERCUBE:
        np.rint(t, out=t)
    w = np.zeros(k + 1)
    w[k] = 1.0
    return apply_weighted(dataset.domain, t, w)


def fourier_features(points, k):
    """Hypercube degree-k monomials: column per subset S with |S| = k, in
    lexicographic order of itertools.combinations."""
    n, d = points.shape
    cols = [points[:, idx].prod(axis=1) for idx in itertools.combinations(range(d), k)]
    if not cols:
        return np.ones((n, 1))
    return np.column_stack(cols)


def parity_signs(points):
    """Full parity Y_[d](x) = prod_i x_i per row."""
    return points.prod(axis=1)


def orthonormality_defect(domain, K, quadrature_order=200):
    """max over k, l <= K of |B_k <Q_k, Q_l> - delta_kl| under the marginal measure."""
    mm = marginal_measure(domain, quadrature_order)
    ev = GegenbauerEvaluator(domain, K)
    vals = eval_gegenbauer(ev, mm.nodes)
    g = (vals * mm.weights) @ vals.T
    b = np.array([subspace_dim(domain, k) for k in range(K + 1)])
    return float(np.abs(b[:, None] * g - np.eye(K + 1)).max())


def _coeffs_exact(domain, k):
    # coefficients of Q_k in t as exact fractions, degree low to high
    d = domain.d
    polys = [[Fraction(1)], [Fraction(0), Fraction(1, d)]]
    for m in range(1, k):
        tq = [Fraction(0)] + polys[m]
        nxt = [Fraction(0)] * (m + 2)
        if domain.kind == HYPERCUBE:
            for i, c in enumerate(tq):
                nxt[i] += c
            for i, c in enumerate(polys[m - 1]):
                nxt[i] -= m * c
            nxt = [c / (d - m) for c in nxt]
        else:
            for i, c in enumerate(tq):
                nxt[i] += Fraction(2 * m + d - 2, d) * c
            for i, c in enumerate(polys[m - 1]):
                nxt[i] -= m * c
            nxt = [c / (m + d - 2) for c in nxt]
        polys.append(nxt)
    return polys[k]


def _hermite_coeffs(k):
    # probabilists' Hermite He_k, exact integer coefficients, low to high
    polys = [[1], [0, 1]]
    for m in range(1, k):
        tq = [0] + polys[m]
        nxt = [0] * (m + 2)
        for i, c in enumerate(tq):
            nxt[i] += c
        for i, c in enumerate(polys[m - 1]):
            nxt[i] -= m * c
        polys.append(nxt)
    return polys[k]


def hermite_limit_defect(domain, k):
    """Max absolute coefficient gap between sqrt(B_k) Q_k(sqrt(d) x) and
    He_k(x)/sqrt(k!), as polynomials in x; decreases as d grows."""
    d = domain.d
    ck = _coeffs_exact(domain, k) if k >= 1 else [Fraction(1)]
    scale = math.sqrt(subspace_dim(domain, k))
    lhs = np.array([float(c) * d ** (j / 2.0) * scale for j, c in enumerate(ck)])
    he = np.array(_hermite_coeffs(k), dtype=float) / math.sqrt(math.factorial(k))
    return float(np.abs(lhs - he).max())
