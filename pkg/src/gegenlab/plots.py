# Figure rendering for the report path: one PNG per experiment next to the
# CSV. Data comes in as the already-computed rows, so plots never perturb the
# deterministic CSV output.

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .mp import mp_law, mp_pdf  # noqa: E402


def _columns(header, rows):
    arr = np.array(rows, dtype=float)
    return {name: arr[:, i] for i, name in enumerate(header)}


def _spectrum(header, rows, ax):
    col = _columns(header, rows)
    psis = np.unique(col["psi_target"])
    for psi in psis:
        ev = col["eigenvalue"][col["psi_target"] == psi]
        ax.hist(ev, bins=60, density=True, alpha=0.45, label=f"ESD, psi={psi:g}")
        law = mp_law(psi)
        xs = np.linspace(max(law.lam_minus, 1e-4), law.lam_plus, 400)
        ax.plot(xs, mp_pdf(psi, xs), "k--", lw=1)
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("density")
    ax.legend()


def _krr(header, rows, ax):
    col = _columns(header, rows)
    ax.errorbar(col["psi_hat"], col["r_test_mean"], yerr=3 * col["r_test_se"], fmt="o", label="empirical")
    ax.plot(col["psi_hat"], col["theory_r_test"], "k-", label="closed form")
    ax.plot(col["psi_hat"], col["r_train_mean"], "s", ms=4, label="train (emp.)")
    ax.plot(col["psi_hat"], col["theory_r_train"], "k:", lw=1, label="train (theory)")
    ax.set_xlabel("psi = n / B")
    ax.set_ylabel("risk")
    ax.set_xscale("log")
    ax.legend()


def _asymptotics(header, rows, ax):
    col = _columns(header, rows)
    for zeta in np.unique(col["zeta"]):
        m = col["zeta"] == zeta
        ax.plot(col["psi"][m], col["r_test"][m], label=f"zeta={zeta:g}")
        ax.plot(col["psi"][m], col["bias"][m], ls="--", lw=0.8, color=ax.lines[-1].get_color())
        ax.plot(col["psi"][m], col["variance"][m], ls=":", lw=0.8, color=ax.lines[-1].get_color())
    ax.set_xscale("log")
    ax.set_xlabel("psi")
    ax.set_ylabel("test error (solid), bias (dashed), variance (dotted)")
    ax.legend()


def _staircase(header, rows, ax):
    col = _columns(header, rows)
    ax.plot(col["kappa"], col["r_test"], "-")
    ax.set_xlabel("kappa = log n / log d")
    ax.set_ylabel("test error")


def _gauss(header, rows, ax):
    col = _columns(header, rows)
    ax.errorbar(col["psi_hat"], col["krr_mean"], yerr=3 * col["krr_se"], fmt="o", label="KRR")
    ax.errorbar(col["psi_hat"], col["gauss_mean"], yerr=3 * col["gauss_se"], fmt="s", label="Gaussian design")
    ax.plot(col["psi_hat"], col["theory_r_test"], "k-", label="closed form")
    ax.set_xlabel("psi = n / B")
    ax.set_ylabel("test error")
    ax.legend()


_PANELS = {
    "spectrum": _spectrum,
    "krr": _krr,
    "asymptotics": _asymptotics,
    "staircase": _staircase,
    "gauss": _gauss,
}


def render(experiment, header, rows, path):
    fig, ax = plt.subplots(figsize=(7, 4.5), dpi=150)
    _PANELS[experiment](header, rows, ax)
    ax.set_title(experiment)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
