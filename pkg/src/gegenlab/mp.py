# Marchenko-Pastur limit law: closed-form Stieltjes transform pair, cdf with
# the point mass at zero, the bias/variance curves they induce, the full
# asymptotic risk triple (test, train, RKHS-norm density), and the staircase
# curve across sample-size exponents.

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MPLaw:
    psi: float
    lam_minus: float
    lam_plus: float
    atom: float  # mass at zero, (1 - 1/psi)_+


def mp_law(psi):
    if psi <= 0:
        raise ValueError("aspect ratio psi must be positive")
    sq = math.sqrt(psi)
    return MPLaw(psi=psi, lam_minus=(1 - sq) ** 2, lam_plus=(1 + sq) ** 2, atom=max(0.0, 1.0 - 1.0 / psi))


def stieltjes_pair(psi, zeta):
    """(r, r') of the MP law at argument -zeta, zeta > 0; vectorized.

    r is the positive root of  zeta*psi*r^2 + (zeta + 1 - psi)*r - 1 = 0,
    evaluated on the cancellation-free branch and polished with one Newton
    step; r' comes from differentiating the same quadratic.
    """
    psi = np.asarray(psi, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if np.any(psi <= 0) or np.any(zeta <= 0):
        raise ValueError("psi and zeta must be positive")
    a = zeta * psi
    b = zeta + 1.0 - psi
    sq = np.sqrt(b * b + 4.0 * a)
    r = np.where(b <= 0, (sq - b) / (2.0 * a), 2.0 / (b + sq))
    r = r - (a * r * r + b * r - 1.0) / (2.0 * a * r + b)
    rp = r * r * (1.0 + psi * r) / (1.0 + a * r)
    if r.ndim == 0:
        return float(r), float(rp)
    return r, rp


def bias_variance(psi, zeta):
    """Limiting level-l bias and variance factors B(psi, zeta), V(psi, zeta)."""
    r, rp = stieltjes_pair(psi, zeta)
    bias = 1.0 - psi + psi * zeta**2 * rp
    var = psi * (r - zeta * rp)
    return bias, var


def variance_fd(psi, zeta, rel_step=1e-6):
    """Finite-difference oracle for V: psi * d/dzeta [zeta * r(-zeta)]."""
    h = rel_step * zeta
    up, _ = stieltjes_pair(psi, zeta + h)
    dn, _ = stieltjes_pair(psi, zeta - h)
    return psi * ((zeta + h) * up - (zeta - h) * dn) / (2.0 * h)


def mp_pdf(psi, x):
    """Density of the absolutely continuous part on [lam_-, lam_+]."""
    law = mp_law(psi)
    x = np.asarray(x, dtype=float)
    inside = (x > law.lam_minus) & (x < law.lam_plus)
    out = np.zeros_like(x)
    xs = x[inside]
    out[inside] = np.sqrt((law.lam_plus - xs) * (xs - law.lam_minus)) / (2.0 * np.pi * psi * xs)
    return out if out.ndim else float(out)


def _adaptive_simpson(f, a, b, tol=1e-9, max_depth=40):
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth >= max_depth or abs(left + right - whole) < 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return rec(a, m, fa, flm, fm, left, depth + 1) + rec(m, b, fm, frm, fb, right, depth + 1)

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), 0)


def _bulk_integral(psi, g, theta_hi=0.5 * np.pi, tol=1e-9):
    # integral of g over the bulk via x = lam_- + span * sin^2(theta), which
    # removes the inverse-square-root singularities at both edges
    law = mp_law(psi)
    span = law.lam_plus - law.lam_minus

    def f(theta):
        st, ct = math.sin(theta), math.cos(theta)
        x = law.lam_minus + span * st * st
        if x <= 0.0:  # only hits at theta = 0 when psi = 1
            return law.lam_plus * g(0.0) / (np.pi * psi)
        return span**2 * (st * ct) ** 2 / (np.pi * psi * x) * g(x)

    return _adaptive_simpson(f, 0.0, theta_hi, tol=tol)


def mp_expectation(psi, g, tol=1e-9):
    """int g dnu_{MP,psi}, point mass at zero included."""
    law = mp_law(psi)
    return law.atom * g(0.0) + _bulk_integral(psi, g, tol=tol)


def mp_cdf(psi, x):
    """P(X <= x) under the MP law with aspect ratio psi."""
    law = mp_law(psi)
    x = float(x)
    if x < 0.0:
        return 0.0
    acc = law.atom
    if x <= law.lam_minus:
        return acc
    if x >= law.lam_plus:
        return 1.0
    theta = math.asin(math.sqrt((x - law.lam_minus) / (law.lam_plus - law.lam_minus)))
    return acc + _bulk_integral(psi, lambda _: 1.0, theta_hi=theta)


@dataclass(frozen=True)
class AsymptoticRisk:
    psi: float
    zeta_star: float
    f_ell_sq: float
    f_tail_sq: float
    sigma_eps_sq: float
    lam: float
    mu_ell: float
    r: float
    r_prime: float
    bias: float
    variance: float
    r_test: float
    r_train: float
    rkhs_per_n: float


def risk_curves(psi, zeta_star, f_ell_sq, f_tail_sq, sigma_eps_sq, lam, mu_ell):
    """Closed-form limits of test error, training error and per-sample squared
    RKHS norm at aspect ratio psi and effective regularization zeta_star."""
    r, rp = stieltjes_pair(psi, zeta_star)
    bias = 1.0 - psi + psi * zeta_star**2 * rp
    var = psi * (r - zeta_star * rp)
    noise = f_tail_sq + sigma_eps_sq
    r_test = f_ell_sq * bias + noise * var + f_tail_sq
    r_train = (lam / mu_ell) ** 2 * (f_ell_sq * (r - zeta_star * rp) + noise * rp)
    rkhs = (f_ell_sq / mu_ell) * (1.0 - zeta_star * r - (lam / mu_ell) * (r - zeta_star * rp))
    rkhs += (noise / mu_ell) * (r - (lam / mu_ell) * rp)
    return AsymptoticRisk(
        psi=psi,
        zeta_star=zeta_star,
        f_ell_sq=f_ell_sq,
        f_tail_sq=f_tail_sq,
        sigma_eps_sq=sigma_eps_sq,
        lam=lam,
        mu_ell=mu_ell,
        r=r,
        r_prime=rp,
        bias=bias,
        variance=var,
        r_test=r_test,
        r_train=r_train,
        rkhs_per_n=rkhs,
    )


def staircase_curve(f_sq, zeta_by_level, sigma_sq, kappa_grid, window=0.25, log10_psi_span=6.0):
    """Test-error curve over the sample-size exponent kappa (n ~ d^kappa).

    Away from integers the curve sits on the plateau sum_{k > floor(kappa)} F_k^2.
    Within `window` of an integer level l >= 1 it follows the closed-form level-l
    curve parametrized by psi = 10^{(kappa - l) * log10_psi_span / window}, so the
    window ends meet the plateaus. Only the plateaus and the psi-parametrized
    windows carry limit-theorem meaning; the kappa axis inside a window is a
    display convention.
    """
    degrees = sorted(f_sq)
    rows = []
    for kappa in kappa_grid:
        if kappa <= 0:
            raise ValueError("kappa grid must be positive")
        ell = round(kappa)
        if ell >= 1 and abs(kappa - ell) <= window and ell in zeta_by_level:
            psi = 10.0 ** ((kappa - ell) * log10_psi_span / window)
            f_ell = f_sq.get(ell, 0.0)
            f_tail = sum(f_sq[k] for k in degrees if k > ell)
            res = risk_curves(psi, zeta_by_level[ell], f_ell, f_tail, sigma_sq, 0.0, 1.0)
            rows.append((kappa, res.r_test))
        else:
            plateau = sum(f_sq[k] for k in degrees if k > math.floor(kappa))
            rows.append((kappa, plateau))
    return rows
