"""Command-line entry point: config parsing, check orchestration, reports.

Configuration is a plain-text ``key = value`` file with ``[section]``
headers.  Unknown keys are rejected with the offending line number.  A
stable digest of the canonicalized config stamps every output file, so
reports from different configurations can never be merged silently.

Outputs: a JSON-lines report (one header line carrying the timestamp,
then one line per record), a CSV summary (tag, value, bound, passed,
config_hash, runtime_s) and gnuplot-ready two-column .dat files for the
growth fits.  Exit status: 0 all passed, 1 some check failed, 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import constants
from .decomp import cz_decomposition, whitney
from .errors import SqfnError, UsageError
from .grid import Grid, GridFunction, lp_norm, to_csv
from .kernelbounds import constant_variation, sweep
from .multipliers import kappa, psi_vanishing, square_symbol
from .squarefuncs import ConeQuadrature, TimeGrid, area_integral, g_function
from .verify import (band_limited_family, check_growth_in_ap,
                     check_growth_in_p, check_lp_range,
                     check_pointwise_domination, check_sharp_composite,
                     check_sharp_maximal_domination, check_spectral_identity,
                     check_weak_1_1, check_weighted_l2_mw, default_operator,
                     mixed_family, power_weight_family, resolved_family,
                     square_function_operator, weight_suite)
from .weights import rubio_de_francia

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "operator.name": "laplacian",
    "operator.dim": "1",
    "operator.n": "256",
    "operator.r": "auto",          # 1.0 for the torus, 22.5 for the oscillator
    "operator.truncation": "128",
    "family.seed": "7",
    "family.count": "20",
    "times.t_min": "auto",
    "times.t_max": "auto",
    "times.per_octave": "8",
    "checks.enabled": "",
    "params.mu": "3.5",
    "params.kinds": "s_h,s_p,S_H,S_P,g_star",
    "params.p_list": "1.5,2,4",
    "params.growth_p_list": "2,4,8,16,32",
    "params.ap_p_list": "1,2,3",
    "params.lam": "0.25",
    "params.q": "2",
    "params.masks": "50",
    "run.workers": "1",
    "output.directory": "sqfn-out",
}


def parse_config(path: str | None, overrides: dict | None = None) -> dict:
    """Read a key = value config file into a flat section.key mapping."""
    cfg = dict(_DEFAULTS)
    if path is not None:
        section = None
        try:
            with open(path) as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}")
        for lineno, raw in enumerate(lines, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if section is None:
                raise UsageError(f"{path}:{lineno}: key outside any [section]")
            full = f"{section}.{key}"
            if full not in _DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {full!r}")
            cfg[full] = value
    for full, value in (overrides or {}).items():
        if full not in _DEFAULTS:
            raise UsageError(f"unknown config key {full!r}")
        cfg[full] = str(value)
    return cfg


def config_hash(cfg: dict) -> str:
    canonical = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _floats(text: str) -> list:
    return [float(part) for part in text.split(",") if part.strip()]


def _build_operator(cfg: dict):
    name = cfg["operator.name"]
    dim = int(cfg["operator.dim"])
    n = int(cfg["operator.n"])
    r = cfg["operator.r"]
    if r == "auto":
        r = 1.0 if name == "laplacian" else 22.5
    grid = Grid(dim, n, float(r))
    return default_operator(name, grid, int(cfg["operator.truncation"]))


def _time_grid(cfg: dict, op, role: str) -> TimeGrid:
    """Per-role defaults: identity grids reach below the spacing, cone
    grids start at it; the oscillator's trust window is capped at 4."""
    h = op.grid.spacing
    hermite = cfg["operator.name"] == "hermite"
    t_min = cfg["times.t_min"]
    t_max = cfg["times.t_max"]
    if t_min == "auto":
        t_min = h / 8.0 if role == "identity" else h
    if t_max == "auto":
        t_max = 4.0 if hermite else op.grid.half_width**2 / 4.0
    return TimeGrid.geometric(float(t_min), float(t_max),
                              int(cfg["times.per_octave"]))


# ---------------------------------------------------------------------------
# Check runners: each takes the config and returns a list of records
# ---------------------------------------------------------------------------


def _run_spectral_identity(cfg: dict) -> list:
    op = _build_operator(cfg)
    psi = square_symbol("s_h")
    times = _time_grid(cfg, op, "identity")
    fam = band_limited_family(op, psi, times, int(cfg["family.seed"]),
                              int(cfg["family.count"]))
    rep = check_spectral_identity(op, psi, fam, times)
    lo, hi = min(rep.ratios), max(rep.ratios)
    ok = 1.0 - constants.IDENTITY_RTOL <= lo and hi <= 1.0 + constants.IDENTITY_RTOL
    return [{"tag": "spectral_identity", "value": hi, "low": lo,
             "bound": 1.0 + constants.IDENTITY_RTOL, "passed": bool(ok)}]


def _run_plancherel(cfg: dict) -> list:
    op = _build_operator(cfg)
    psi = square_symbol("s_h")
    ident_times = _time_grid(cfg, op, "identity")
    cone_times = _time_grid(cfg, op, "cone")
    capture = 0.97 if cfg["operator.name"] == "hermite" else 0.999
    fam_cone = band_limited_family(op, psi, cone_times, int(cfg["family.seed"]),
                                   int(cfg["family.count"]), capture=capture)
    fam_fine = band_limited_family(op, psi, ident_times, int(cfg["family.seed"]),
                                   int(cfg["family.count"]))
    cone = ConeQuadrature(op.grid, cone_times)
    rs = [lp_norm(area_integral("s_h", f, op, cone), 2) / lp_norm(f, 2)
          for f in fam_cone.members]
    kap = kappa(psi)
    rg = [lp_norm(g_function("g_h", f, op, ident_times), 2) / lp_norm(f, 2)
          for f in fam_fine.members]
    ok_s = max(abs(v - 0.5) for v in rs) <= 0.5 * constants.AREA_PLANCHEREL_RTOL
    ok_g = max(abs(v - kap) for v in rg) <= kap * constants.IDENTITY_RTOL
    return [
        {"tag": "plancherel_s_h", "value": max(rs), "low": min(rs),
         "bound": 0.5 * (1 + constants.AREA_PLANCHEREL_RTOL), "passed": bool(ok_s)},
        {"tag": "plancherel_g_h", "value": max(rg), "low": min(rg),
         "bound": kap * (1 + constants.IDENTITY_RTOL), "passed": bool(ok_g)},
    ]


def _run_finite_propagation(cfg: dict) -> list:
    op = _build_operator(cfg)
    g = op.grid
    h = g.spacing
    n = g.points_per_axis
    if cfg["operator.name"] == "laplacian":
        vals = np.zeros(g.shape)
        vals[(n // 2,) * g.dim] = 1.0
    else:
        # narrowest bump the eigenbasis can hold
        x = g.axis_coords()
        bump = np.exp(-(x**2) / (2 * (1.5 * h) ** 2))
        vals = op.synthesize(op._basis[:, : op.truncation].T @ bump * h).values
    f = GridFunction(g, vals)
    center = g.axis_coords()[n // 2]
    coords = g.coords()
    dist = np.sqrt(sum(g.periodic_delta(c - center) ** 2 for c in coords))
    steps = np.linspace(6, min(100, int(0.8 * n // 2)), 10).astype(int)
    worst = 0.0
    for m in steps:
        t = float(m) * h
        u = op.apply_function(lambda s: np.cos(t * s), f)
        mags = np.abs(u.values)
        leak = float(np.sum(mags[dist > t + constants.SUPPORT_HALO_CELLS * h]))
        worst = max(worst, leak / float(np.sum(mags)))
    return [{"tag": "finite_propagation", "value": worst,
             "bound": constants.SUPPORT_LEAK_TOL,
             "passed": bool(worst < constants.SUPPORT_LEAK_TOL)}]


_SWEEP_GRIDS = {
    # per-lemma tuned geometric time grids (N = 128, R = 1 torus)
    "compact_support": (0.7, 0.93, (0, 1, 2)),
    "smoothed_difference": (0.45, 0.8, (0.5, 1.0, 2.0)),
    "poisson_decay": (0.12, 0.3, (0, 1, 2)),
    "gradient_heat": (0.03, 0.078, (0, 1)),
}


def _run_kernel_bounds(cfg: dict) -> list:
    if cfg["operator.name"] != "laplacian":
        raise UsageError("kernel-bound sweeps are defined for the torus Laplacian")
    op = _build_operator(cfg)
    records = []
    for lemma, (t_lo, t_hi, variants) in _SWEEP_GRIDS.items():
        ts = np.geomspace(t_lo, t_hi, 5)
        for v in variants:
            if lemma == "smoothed_difference":
                recs = sweep(op, lemma, ts, r_over_t=v)
                label = f"{lemma}_rho{v:g}"
            else:
                recs = sweep(op, lemma, ts, kappa=int(v))
                label = f"{lemma}_k{int(v)}"
            var = constant_variation(recs)
            rec = {"tag": label, "value": var,
                   "bound": constants.KERNEL_FIT_VARIATION,
                   "passed": bool(var < constants.KERNEL_FIT_VARIATION)}
            if lemma == "compact_support" and v == 0:
                viol = max(r["support_violation_mass"] for r in recs)
                rec["support_violation_mass"] = viol
                rec["passed"] = bool(rec["passed"] and viol < constants.SUPPORT_LEAK_TOL)
            records.append(rec)
    return records


def _run_whitney_cz(cfg: dict) -> list:
    op = _build_operator(cfg)
    g = op.grid
    rng = np.random.default_rng(int(cfg["family.seed"]))
    n = g.points_per_axis
    failures = 0
    worst_lo, worst_hi = np.inf, 0.0
    masks = int(cfg["params.masks"])
    for _ in range(masks):
        mask = np.zeros(g.shape, dtype=bool)
        for _ in range(rng.integers(1, 5)):
            if g.dim == 1:
                a = int(rng.integers(0, n))
                b = int(rng.integers(1, n // 2))
                mask[a : min(a + b, n)] = True
            else:
                a = rng.integers(0, n, size=2)
                b = rng.integers(1, n // 2, size=2)
                mask[a[0] : min(a[0] + b[0], n), a[1] : min(a[1] + b[1], n)] = True
        if mask.all() or not mask.any():
            continue
        cover = whitney(g, mask)
        ratios = cover.distance_ratios()
        if not cover.covers_exactly():
            failures += 1
        if ratios.size:
            worst_lo = min(worst_lo, float(np.min(ratios)))
            worst_hi = max(worst_hi, float(np.max(ratios)))
    fam = mixed_family(g, int(cfg["family.seed"]) + 1, count=8,
                       support_fraction=0.5)
    worst_recon, worst_mean = 0.0, 0.0
    for f in fam.members:
        real = GridFunction(g, np.abs(f.values))
        lam = 2.0 * float(np.mean(np.abs(real.values))) + 1e-9
        if not (np.max(np.abs(real.values)) > lam):
            continue
        dec = cz_decomposition(real, lam)
        worst_recon = max(worst_recon, dec.reconstruction_error(real))
        if dec.bad_means().size:
            worst_mean = max(worst_mean, float(np.max(dec.bad_means())))
    passed = (failures == 0 and worst_hi <= 4.0 + 1e-12
              and worst_recon <= constants.RECONSTRUCTION_ATOL
              and worst_mean <= constants.MEAN_ZERO_ATOL)
    return [{"tag": "whitney_cz", "value": worst_recon, "ratio_low": worst_lo,
             "ratio_high": worst_hi, "bound": constants.RECONSTRUCTION_ATOL,
             "passed": bool(passed)}]


def _square_ops(cfg: dict, op, times: TimeGrid) -> dict:
    kinds = [k.strip() for k in cfg["params.kinds"].split(",") if k.strip()]
    mu = float(cfg["params.mu"])
    return {k: square_function_operator(k, op, times, mu=mu) for k in kinds}


def _run_weighted_l2_mw(cfg: dict) -> list:
    op = _build_operator(cfg)
    times = _time_grid(cfg, op, "cone")
    fam = resolved_family(op, int(cfg["family.seed"]), int(cfg["family.count"]))
    ws = weight_suite(op.grid, int(cfg["family.seed"]) + 100)
    records = []
    for kind, T in _square_ops(cfg, op, times).items():
        rep = check_weighted_l2_mw(T, fam, ws, tag=f"weighted_l2_mw_{kind}")
        records.append({"tag": rep.inequality_tag, "value": rep.sup_ratio,
                        "bound": float("inf"),
                        "passed": bool(np.isfinite(rep.sup_ratio))})
    return records


def _run_weak_lp(cfg: dict) -> list:
    op = _build_operator(cfg)
    times = _time_grid(cfg, op, "cone")
    fam = resolved_family(op, int(cfg["family.seed"]), int(cfg["family.count"]))
    ws = weight_suite(op.grid, int(cfg["family.seed"]) + 100)
    T = square_function_operator("s_h", op, times)
    records = []
    rep = check_weak_1_1(T, fam, ws)
    records.append({"tag": "weak_1_1", "value": rep.sup_ratio,
                    "bound": float("inf"),
                    "passed": bool(np.isfinite(rep.sup_ratio))})
    for p in _floats(cfg["params.p_list"]):
        rep = check_lp_range(T, fam, ws, p)
        records.append({"tag": rep.inequality_tag, "value": rep.sup_ratio,
                        "bound": float("inf"),
                        "passed": bool(np.isfinite(rep.sup_ratio))})
    return records


def _run_pointwise_domination(cfg: dict) -> list:
    op = _build_operator(cfg)
    times = _time_grid(cfg, op, "cone")
    fam = resolved_family(op, int(cfg["family.seed"]), int(cfg["family.count"]))
    gstar = square_function_operator("g_star", op, times, mu=float(cfg["params.mu"]))
    records = []
    for kind in ("s_h", "s_p", "S_H", "S_P"):
        T = square_function_operator(kind, op, times)
        rep = check_pointwise_domination(T, gstar, fam)
        ok = (np.isfinite(rep.sup_ratio)
              and rep.excluded_fraction < constants.DOMINATION_EXCLUSION_MAX)
        records.append({"tag": f"pointwise_domination_{kind}",
                        "value": rep.sup_ratio,
                        "excluded_fraction": rep.excluded_fraction,
                        "bound": float("inf"), "passed": bool(ok)})
    return records


def _run_growth_in_p(cfg: dict) -> list:
    op = _build_operator(cfg)
    times = _time_grid(cfg, op, "cone")
    fam = resolved_family(op, int(cfg["family.seed"]), int(cfg["family.count"]))
    T = square_function_operator("s_h", op, times)
    fit = check_growth_in_p(T, fam, _floats(cfg["params.growth_p_list"]))
    return [{"tag": fit.tag, "value": fit.fitted_exponent,
             "bound": fit.exponent_bound + fit.slack, "passed": bool(fit.passed),
             "dat": (fit.x_values, fit.y_values)}]


def _run_growth_in_ap(cfg: dict) -> list:
    op = _build_operator(cfg)
    times = _time_grid(cfg, op, "cone")
    fam = resolved_family(op, int(cfg["family.seed"]), int(cfg["family.count"]))
    T = square_function_operator("s_h", op, times)
    records = []
    for p in _floats(cfg["params.ap_p_list"]):
        weights = power_weight_family(op.grid, p)
        fit = check_growth_in_ap(T, fam, weights, p)
        records.append({"tag": fit.tag, "value": fit.fitted_exponent,
                        "bound": fit.exponent_bound + fit.slack,
                        "passed": bool(fit.passed),
                        "dat": (fit.x_values, fit.y_values)})
    return records


def _run_rubio_de_francia(cfg: dict) -> list:
    op = _build_operator(cfg)
    q = float(cfg["params.q"])
    records = []
    base_seed = int(cfg["family.seed"])
    worst = 0.0
    all_ok = True
    from .weights import empirical_maximal_norm

    mnorm = empirical_maximal_norm(op.grid, q)
    for s in range(base_seed, base_seed + 10):
        rng = np.random.default_rng(s)
        phi = GridFunction(op.grid, np.abs(rng.standard_normal(op.grid.shape)))
        cert = rubio_de_francia(phi, q, maximal_norm=mnorm)
        majorizes = bool(np.all(cert.weight.values >= np.abs(phi.values) - 1e-12))
        ok = (majorizes and cert.norm_ratio <= 2.0
              and cert.a1_ratio <= 2.0 * cert.maximal_norm)
        worst = max(worst, cert.norm_ratio)
        all_ok = all_ok and ok
    records.append({"tag": "rubio_de_francia", "value": worst, "bound": 2.0,
                    "passed": bool(all_ok)})
    return records


def _run_sharp_maximal(cfg: dict) -> list:
    op = _build_operator(cfg)
    times = _time_grid(cfg, op, "cone")
    fam = resolved_family(op, int(cfg["family.seed"]),
                       min(int(cfg["family.count"]), 10),
                       shapes=("band", "bump", "packet"))
    ws = weight_suite(op.grid, int(cfg["family.seed"]) + 100)[:3]
    gstar = square_function_operator("g_star", op, times, mu=float(cfg["params.mu"]))
    lam = float(cfg["params.lam"])
    rep = check_sharp_maximal_domination(gstar, fam, lam)
    comp = check_sharp_composite(fam, ws, 4.0, lam)
    return [
        {"tag": "sharp_maximal_domination", "value": rep.sup_ratio,
         "bound": float("inf"), "passed": bool(np.isfinite(rep.sup_ratio))},
        {"tag": comp.inequality_tag, "value": comp.sup_ratio,
         "bound": float("inf"), "passed": bool(np.isfinite(comp.sup_ratio))},
    ]


_CHECKS = {
    "spectral_identity": {
        "runner": _run_spectral_identity,
        "formula": "(sum_j ||psi(t_j sqrt(L)) f||_2^2 dt/t)^(1/2) = kappa ||f||_2, psi(z) = z^2 exp(-z^2)",
        "tolerance": f"every ratio within {constants.IDENTITY_RTOL:.0%} of 1",
        "keys": "operator.*, family.*, times.*",
    },
    "plancherel": {
        "runner": _run_plancherel,
        "formula": "||s_h f||_2/||f||_2 = 1/2; ||g_h f||_2/||f||_2 = kappa",
        "tolerance": f"{constants.AREA_PLANCHEREL_RTOL:.0%} for the cone, {constants.IDENTITY_RTOL:.0%} for g_h",
        "keys": "operator.*, family.*, times.*",
    },
    "finite_propagation": {
        "runner": _run_finite_propagation,
        "formula": "mass of cos(t sqrt(L)) delta-bump outside radius t + 4h",
        "tolerance": f"< {constants.SUPPORT_LEAK_TOL:g} of total mass, 10-point grid-aligned time grid",
        "keys": "operator.*",
    },
    "kernel_bounds": {
        "runner": _run_kernel_bounds,
        "formula": "fitted constants of the four kernel bounds across tuned t (and r) log-grids",
        "tolerance": f"variation < {constants.KERNEL_FIT_VARIATION:.0%}; support mass < {constants.SUPPORT_LEAK_TOL:g}",
        "keys": "operator.n, operator.r",
    },
    "whitney_cz": {
        "runner": _run_whitney_cz,
        "formula": "Whitney covers with diam <= dist <= 4 diam; f = h + sum b_j, int b_j = 0",
        "tolerance": f"exact covers; reconstruction <= {constants.RECONSTRUCTION_ATOL:g}",
        "keys": "operator.*, family.seed, params.masks",
    },
    "weighted_l2_mw": {
        "runner": _run_weighted_l2_mw,
        "formula": "int (Tf)^2 w <= C int |f|^2 Mw, T in the configured kinds",
        "tolerance": "sup ratio finite (2x resolution stability checked in the test suite)",
        "keys": "operator.*, family.*, params.kinds, params.mu",
    },
    "weak_lp": {
        "runner": _run_weak_lp,
        "formula": "lambda w{s_h f > lambda} <= C int |f| Mw; int (s_h f)^p w against the p-majorant",
        "tolerance": "sup ratios finite; p = 2 identical to the weighted L2 formula",
        "keys": "operator.*, family.*, params.p_list",
    },
    "pointwise_domination": {
        "runner": _run_pointwise_domination,
        "formula": "Tf(x) <= C g*_mu f(x) with mu from params.mu",
        "tolerance": f"excluded fraction < {constants.DOMINATION_EXCLUSION_MAX:.0%}; sup finite",
        "keys": "operator.*, family.*, params.mu",
    },
    "growth_in_p": {
        "runner": _run_growth_in_p,
        "formula": "log-log slope of empirical ||s_h||_p over params.growth_p_list",
        "tolerance": f"slope <= 0.5 + {constants.P_GROWTH_SLACK}",
        "keys": "operator.*, family.*, params.growth_p_list",
    },
    "growth_in_ap": {
        "runner": _run_growth_in_ap,
        "formula": "weighted norms against the A_p constant; exponent beta_p + 1/(p-1), A_1 endpoint 1/2",
        "tolerance": f"slope <= bound + {constants.AP_GROWTH_SLACK}",
        "keys": "operator.*, family.*, params.ap_p_list",
    },
    "rubio_de_francia": {
        "runner": _run_rubio_de_francia,
        "formula": "majorant v = sum_k M^k phi / (2||M||)^k: phi <= v, ||v||_q <= 2||phi||_q, Mv <= 2||M|| v",
        "tolerance": "all three facts on 10 seeds",
        "keys": "operator.*, family.seed, params.q",
    },
    "sharp_maximal": {
        "runner": _run_sharp_maximal,
        "formula": "M#_lam((g* f)^2) <= C (Mf)^2 and the composite maximal bound with gamma = max{1/2, 1/(p-1)}",
        "tolerance": "sup ratios finite (2x resolution stability in the test suite)",
        "keys": "operator.*, family.*, params.lam, params.mu",
    },
}


# ---------------------------------------------------------------------------
# Orchestration and persistence
# ---------------------------------------------------------------------------


def _output_dir(cfg: dict) -> str:
    return os.environ.get("SQFN_OUT", cfg["output.directory"])


def run(cfg: dict) -> int:
    tags = [t.strip() for t in cfg["checks.enabled"].split(",") if t.strip()]
    for tag in tags:
        if tag not in _CHECKS:
            raise UsageError(
                f"unknown check {tag!r}; available: {', '.join(sorted(_CHECKS))}"
            )
    digest = config_hash(cfg)
    out = _output_dir(cfg)
    os.makedirs(out, exist_ok=True)
    workers = max(1, int(cfg["run.workers"]))

    def job(tag):
        start = time.perf_counter()
        records = _CHECKS[tag]["runner"](cfg)
        elapsed = time.perf_counter() - start
        return [dict(rec, runtime_s=elapsed / len(records)) for rec in records]

    if workers == 1:
        results = [job(tag) for tag in tags]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, tags))

    all_records = [rec for group in results for rec in group]
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    with open(os.path.join(out, "report.jsonl"), "w") as fh:
        fh.write(json.dumps({"config_hash": digest, "timestamp": stamp}) + "\n")
        for rec in all_records:
            body = {k: v for k, v in rec.items() if k not in ("runtime_s", "dat")}
            body["config_hash"] = digest
            fh.write(json.dumps(body, sort_keys=True) + "\n")
    with open(os.path.join(out, "summary.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tag", "value", "bound", "passed", "config_hash", "runtime_s"])
        for rec in all_records:
            writer.writerow([rec["tag"], f"{rec['value']:.6g}",
                             f"{rec['bound']:.6g}", rec["passed"], digest,
                             f"{rec['runtime_s']:.3f}"])
    for rec in all_records:
        if "dat" in rec:
            xs, ys = rec["dat"]
            with open(os.path.join(out, f"{rec['tag']}.dat"), "w") as fh:
                fh.write(f"# {rec['tag']} config_hash={digest}\n")
                for x, y in zip(xs, ys):
                    fh.write(f"{x:.10g} {y:.10g}\n")
    failed = [rec["tag"] for rec in all_records if not rec["passed"]]
    for rec in all_records:
        status = "PASS" if rec["passed"] else "FAIL"
        print(f"{status} {rec['tag']}: value={rec['value']:.6g} bound={rec['bound']:.6g}")
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def describe(tag: str) -> int:
    if tag not in _CHECKS:
        print(f"unknown check {tag!r}; available: {', '.join(sorted(_CHECKS))}",
              file=sys.stderr)
        return 2
    meta = _CHECKS[tag]
    print(f"check: {tag}")
    print(f"formula: {meta['formula']}")
    print(f"tolerance: {meta['tolerance']}")
    print(f"config keys: {meta['keys']}")
    return 0


def _dump_operator(cfg: dict, symbol: str, t: float, path: str) -> int:
    op = _build_operator(cfg)
    profile = square_symbol(symbol).scaled(t)
    km = op.kernel_matrix(profile)
    np.savetxt(path, np.asarray(km.entries, dtype=float), delimiter=",")
    print(f"wrote {km.entries.shape[0]}x{km.entries.shape[1]} kernel to {path}")
    return 0


def _dump_function(cfg: dict, index: int, path: str) -> int:
    op = _build_operator(cfg)
    fam = resolved_family(op, int(cfg["family.seed"]), int(cfg["family.count"]))
    if not (0 <= index < len(fam.members)):
        raise UsageError(f"member index must lie in [0, {len(fam.members)})")
    with open(path, "w") as fh:
        fh.write(to_csv(fam.members[index]))
    print(f"wrote family member {index} to {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sqfn",
        description="square-function laboratory: empirical inequality checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file with [section] headers")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a single config key")

    p_run = sub.add_parser("run", parents=[common], help="run the enabled checks")
    p_run.add_argument("--check", action="append", default=[],
                       help="enable a check (repeatable; overrides checks.enabled)")
    p_desc = sub.add_parser("describe", help="show a check's formula and tolerances")
    p_desc.add_argument("tag")
    sub.add_parser("list-checks", help="list available check tags")
    p_dop = sub.add_parser("dump-operator", parents=[common],
                           help="write a kernel matrix as CSV")
    p_dop.add_argument("--symbol", default="s_h")
    p_dop.add_argument("--t", type=float, default=0.1)
    p_dop.add_argument("--out", default="kernel.csv")
    p_dfn = sub.add_parser("dump-function", parents=[common],
                           help="write a test-family member as CSV")
    p_dfn.add_argument("--index", type=int, default=0)
    p_dfn.add_argument("--out", default="function.csv")

    args = parser.parse_args(argv)
    try:
        if args.command == "list-checks":
            for tag in sorted(_CHECKS):
                print(tag)
            return 0
        if args.command == "describe":
            return describe(args.tag)
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise UsageError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            overrides[key.strip()] = value.strip()
        if args.command == "run" and args.check:
            overrides["checks.enabled"] = ",".join(args.check)
        cfg = parse_config(args.config, overrides)
        if args.command == "run":
            return run(cfg)
        if args.command == "dump-operator":
            return _dump_operator(cfg, args.symbol, args.t, args.out)
        if args.command == "dump-function":
            return _dump_function(cfg, args.index, args.out)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SqfnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
