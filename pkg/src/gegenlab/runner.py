# Config-driven experiment runner. Each run writes {out}.csv (data rows,
# 17 significant digits) plus {out}.meta.json (resolved config, master seed,
# package version, wall time, content hash of the CSV); identical config and
# seed give byte-identical CSV regardless of worker count.

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .domains import Domain, derive_rng, subspace_dim
from .gauss import equivalence_report
from .kernels import KernelSpec, compute_profile, effective_regularization
from .krr import descent_sweep
from .mp import risk_curves, staircase_curve
from .spectrum import gegenbauer_spectrum


class ConfigError(ValueError):
    pass


_COMMON = {"experiment": None, "seed": 0, "out": None}

_SCHEMA = {
    "spectrum": {
        "required": ["domain", "d", "ell"],
        "optional": {"psi_grid": [1.0], "trials": 5},
    },
    "krr": {
        "required": ["domain", "d", "ell", "kernel", "F"],
        "optional": {
            "kernel_params": [1.0],
            "lambda": 1e-8,
            "sigma": 0.0,
            "psi_grid": None,
            "n_grid": None,
            "trials": 5,
        },
    },
    "asymptotics": {
        "required": [],
        "optional": {
            "zetas": [0.05, 0.2, 1.0],
            "psi_min": 0.05,
            "psi_max": 20.0,
            "psi_points": 100,
            "log_spaced": True,
            "F_ell_sq": 1.0,
            "F_tail_sq": 0.0,
            "sigma_sq": 1.0,
            "mu_ell": 1.0,
            "lambda": 0.0,
        },
    },
    "staircase": {
        "required": ["domain", "d", "kernel", "F"],
        "optional": {
            "kernel_params": [1.0],
            "lambda": 1e-8,
            "sigma": 0.0,
            "kappa_min": 0.3,
            "kappa_max": None,
            "kappa_points": 241,
            "window": 0.25,
            "log10_psi_span": 6.0,
        },
    },
    "gauss": {
        "required": ["domain", "d", "ell", "kernel", "F"],
        "optional": {
            "kernel_params": [1.0],
            "lambda": 1e-8,
            "sigma": 0.0,
            "psi_grid": None,
            "n_grid": None,
            "trials": 5,
            "k_max": None,
            "tail": "fold",
            "p_tail": None,
        },
    },
}


def resolve_config(raw):
    """Validate a flat config mapping and fill every default explicitly."""
    if "experiment" not in raw:
        raise ConfigError("missing required key: experiment")
    exp = raw["experiment"]
    if exp not in _SCHEMA:
        raise ConfigError(f"unknown experiment: {exp!r}")
    schema = _SCHEMA[exp]
    allowed = set(_COMMON) | set(schema["required"]) | set(schema["optional"])
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown key for experiment {exp!r}: {key!r}")
    for key in schema["required"]:
        if key not in raw:
            raise ConfigError(f"missing required key: {key!r}")
    cfg = {"experiment": exp, "seed": int(raw.get("seed", 0)), "out": raw.get("out") or exp}
    for key, default in schema["optional"].items():
        cfg[key] = raw.get(key, default)
    for key in schema["required"]:
        cfg[key] = raw[key]
    if "F" in cfg:
        try:
            cfg["F"] = {int(k): float(v) for k, v in dict(cfg["F"]).items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"key 'F' must map degree to squared energy: {exc}") from exc
    return cfg


def _kernel_from(cfg):
    return KernelSpec(cfg["kernel"], tuple(cfg["kernel_params"]))


def _domain_from(cfg):
    return Domain(cfg["domain"], int(cfg["d"]))


def _n_grid(cfg, domain, ell):
    if cfg.get("n_grid"):
        return [int(n) for n in cfg["n_grid"]]
    if cfg.get("psi_grid"):
        b = subspace_dim(domain, ell)
        return [max(1, round(p * b)) for p in cfg["psi_grid"]]
    raise ConfigError("one of n_grid or psi_grid is required")


def _cell_seed(master, index):
    return int(derive_rng(master, "cell", index).integers(2**62))


def _map_cells(fn, n_cells, threads):
    if threads <= 1:
        return [fn(i) for i in range(n_cells)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_cells)))


def _run_spectrum(cfg, threads):
    domain = _domain_from(cfg)
    ell = int(cfg["ell"])
    b = subspace_dim(domain, ell)
    cells = [(pi, t) for pi in range(len(cfg["psi_grid"])) for t in range(int(cfg["trials"]))]

    def cell(i):
        pi, t = cells[i]
        n = max(1, round(cfg["psi_grid"][pi] * b))
        return gegenbauer_spectrum(domain, ell, n, _cell_seed(cfg["seed"], i))

    reports = _map_cells(cell, len(cells), threads)
    header = ["psi_target", "n", "trial", "ks", "eigenvalue"]
    rows = []
    meta = []
    for (pi, t), rep in zip(cells, reports):
        for ev in rep.eigenvalues:
            rows.append([cfg["psi_grid"][pi], rep.n, t, rep.ks, ev])
        meta.append(
            {
                "domain": domain.kind,
                "d": domain.d,
                "ell": ell,
                "n": rep.n,
                "B": rep.b,
                "psi": rep.psi_hat,
                "seed": rep.seed,
                "ks": rep.ks,
            }
        )
    return header, rows, {"reports": meta}


def _run_krr(cfg, threads):
    domain = _domain_from(cfg)
    kernel = _kernel_from(cfg)
    ell = int(cfg["ell"])
    grid = _n_grid(cfg, domain, ell)
    profile = compute_profile(kernel, domain)

    def cell(i):
        return descent_sweep(
            domain,
            kernel,
            ell,
            float(cfg["lambda"]),
            cfg["F"],
            float(cfg["sigma"]),
            [grid[i]],
            int(cfg["trials"]),
            _cell_seed(cfg["seed"], i),
            profile=profile,
        )[0]

    rows_out = _map_cells(cell, len(grid), threads)
    header = [
        "n",
        "psi_hat",
        "r_test_mean",
        "r_test_se",
        "r_train_mean",
        "rkhs_per_n",
        "theory_r_test",
        "theory_r_train",
        "theory_rkhs",
    ]
    rows = [
        [r.n, r.psi_hat, r.r_test_mean, r.r_test_se, r.r_train_mean, r.rkhs_per_n_mean, r.theory_r_test, r.theory_r_train, r.theory_rkhs_per_n]
        for r in rows_out
    ]
    zeta = effective_regularization(profile, ell, float(cfg["lambda"]))
    return header, rows, {"zeta_star": zeta, "mu": list(profile.mu[: ell + 2])}


def _run_asymptotics(cfg, threads):
    del threads  # closed forms, nothing to schedule
    if cfg["log_spaced"]:
        psis = np.geomspace(cfg["psi_min"], cfg["psi_max"], int(cfg["psi_points"]))
    else:
        psis = np.linspace(cfg["psi_min"], cfg["psi_max"], int(cfg["psi_points"]))
    header = ["zeta", "psi", "bias", "variance", "r_test", "r_train", "rkhs"]
    rows = []
    for zeta in cfg["zetas"]:
        for psi in psis:
            res = risk_curves(
                float(psi),
                float(zeta),
                float(cfg["F_ell_sq"]),
                float(cfg["F_tail_sq"]),
                float(cfg["sigma_sq"]),
                float(cfg["lambda"]),
                float(cfg["mu_ell"]),
            )
            rows.append([zeta, psi, res.bias, res.variance, res.r_test, res.r_train, res.rkhs_per_n])
    return header, rows, {}


def _run_staircase(cfg, threads):
    del threads
    domain = _domain_from(cfg)
    kernel = _kernel_from(cfg)
    profile = compute_profile(kernel, domain)
    f_sq = cfg["F"]
    max_level = max(f_sq)
    kmax = cfg["kappa_max"] if cfg["kappa_max"] is not None else max_level + 0.7
    grid = np.linspace(cfg["kappa_min"], kmax, int(cfg["kappa_points"]))
    levels = [l for l in range(1, max_level + 1) if profile.mu[l] > 0]
    zetas = {l: effective_regularization(profile, l, float(cfg["lambda"])) for l in levels}
    rows = staircase_curve(
        f_sq,
        zetas,
        float(cfg["sigma"]) ** 2,
        grid,
        window=float(cfg["window"]),
        log10_psi_span=float(cfg["log10_psi_span"]),
    )
    return ["kappa", "r_test"], [list(r) for r in rows], {"zeta_by_level": {str(k): v for k, v in zetas.items()}}


def _run_gauss(cfg, threads):
    domain = _domain_from(cfg)
    kernel = _kernel_from(cfg)
    ell = int(cfg["ell"])
    grid = _n_grid(cfg, domain, ell)

    def cell(i):
        return equivalence_report(
            domain,
            kernel,
            ell,
            float(cfg["lambda"]),
            cfg["F"],
            float(cfg["sigma"]),
            [grid[i]],
            int(cfg["trials"]),
            _cell_seed(cfg["seed"], i),
            k_max=cfg["k_max"],
            tail_mode=cfg["tail"],
            p_tail=cfg["p_tail"],
        )[0]

    rows_out = _map_cells(cell, len(grid), threads)
    header = ["n", "psi_hat", "krr_mean", "krr_se", "gauss_mean", "gauss_se", "theory_r_test"]
    rows = [[r.n, r.psi_hat, r.krr_mean, r.krr_se, r.gauss_mean, r.gauss_se, r.theory_r_test] for r in rows_out]
    return header, rows, {}


_RUNNERS = {
    "spectrum": _run_spectrum,
    "krr": _run_krr,
    "asymptotics": _run_asymptotics,
    "staircase": _run_staircase,
    "gauss": _run_gauss,
}


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def run(raw_config, threads=1, plot=False):
    """Execute one experiment; returns the paths written."""
    cfg = resolve_config(raw_config)
    t0 = time.perf_counter()
    header, rows, extra = _RUNNERS[cfg["experiment"]](cfg, threads)
    csv_path = cfg["out"] + ".csv"
    with open(csv_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    with open(csv_path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    meta = {
        "config": cfg,
        "master_seed": cfg["seed"],
        "version": __version__,
        "wall_time_s": time.perf_counter() - t0,
        "csv": csv_path,
        "csv_sha256": digest,
    }
    meta.update(extra)
    meta_path = cfg["out"] + ".meta.json"
    with open(meta_path, "w", encoding="ascii") as fh:
        json.dump(meta, fh, indent=2, default=float)
        fh.write("\n")
    paths = {"csv": csv_path, "meta": meta_path}
    if plot:
        from .plots import render

        paths["figure"] = render(cfg["experiment"], header, rows, cfg["out"] + ".png")
    return paths
