"""Acceptance suite: eleven Monte Carlo / deterministic criteria.

Each test prints exactly one ``ACCEPTANCE <n>: PASS|FAIL`` line (run
pytest with -s to see them for passing tests) and then asserts.  The
tolerances are fixed here and must not be loosened to make a run pass.
"""

import json
import math
import time

import numpy as np
import pytest

from mdgarch.cli import main as cli_main
from mdgarch.gof import ks_two_sample
from mdgarch.harness import McConfig, run_experiment, run_n_sweep
from mdgarch.innovations import InnovationSpec, RngStream
from mdgarch.limits import sample_time_weighted_wiener
from mdgarch.localization import LocalizationScheme, realize_params
from mdgarch.simulate import (CLASSICAL, LITERAL, simulate_path,
                              volatility_multiplicative)
from mdgarch.stats import CheckpointGrid, geometric_exp_sum, weighted_exp_sum

NORMAL = InnovationSpec(kind="standard-normal")
GRID = CheckpointGrid((0.2, 0.4, 0.6, 0.8))
SEED = 20260823


def scheme(c_gamma, p=0.5, kappa=0.4):
    return LocalizationScheme(omega=1.0, sigma0_sq=1.0, c_alpha=1.0, p=p,
                              c_gamma=c_gamma, kappa=kappa)


NS_SCHEME = scheme(-1.0)                  # Theorem-1 configuration
INT_SCHEME = scheme(0.0, p=0.6)           # Theorem-2 configuration
NE_SCHEME = scheme(1.0, kappa=0.6)        # Theorem-3 configuration


def report_line(num: int, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


@pytest.fixture(scope="module")
def ns_report():
    cfg = McConfig(scheme=NS_SCHEME, innovation=NORMAL, n=5000, grid=GRID,
                   reps=2000, master_seed=SEED,
                   tests=("vol_gof", "ret_gof", "independence"))
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def int_report():
    cfg = McConfig(scheme=INT_SCHEME, innovation=NORMAL, n=5000, grid=GRID,
                   reps=2000, master_seed=SEED,
                   tests=("vol_gof", "ret_gof", "independence"))
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def ne_report():
    cfg = McConfig(scheme=NE_SCHEME, innovation=NORMAL, n=5000, grid=GRID,
                   reps=2000, master_seed=SEED,
                   tests=("vol_gof", "ret_gof", "independence"))
    return run_experiment(cfg)


def test_criterion_1_exact_representation():
    """Recursion vs multiplicative form, relative 1e-8, 100 paths per
    regime at n = 5000, under 10 seconds."""
    start = time.time()
    worst = 0.0
    for sch in (NS_SCHEME, INT_SCHEME, NE_SCHEME):
        params = realize_params(sch, 5000)
        for i in range(100):
            path = simulate_path(params, NORMAL, RngStream(SEED, i))
            for t in (1000, 5000):
                log_val, lin = volatility_multiplicative(params, path.eps, t)
                rel = abs(log_val - path.log_sigma_sq[t]) \
                    / max(abs(path.log_sigma_sq[t]), 1.0)
                worst = max(worst, rel)
                if lin is not None:
                    worst = max(worst,
                                abs(lin - path.sigma_sq[t])
                                / path.sigma_sq[t])
    elapsed = time.time() - start
    ok = worst < 1e-8 and elapsed < 10.0
    assert report_line(1, ok,
                       f"max rel gap {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_theorem1_volatility(ns_report):
    """Near-stationary volatility statistic vs N(0,1): D < 0.05 per
    checkpoint and pairwise |corr| < 0.07."""
    ds = [e["D"] for e in ns_report.results["vol_gof"]["per_checkpoint"]]
    corr = ns_report.results["independence"]["max_abs_corr"]
    ok = all(d < 0.05 for d in ds) and corr < 0.07
    detail = "D=" + ",".join(f"{d:.3f}" for d in ds) + f" corr={corr:.3f}"
    assert report_line(2, ok, detail)


def test_criterion_3_theorem1_returns(ns_report):
    """Near-stationary return statistic vs innovation CDF: D < 0.05 per
    checkpoint, cross-checkpoint |corr| < 0.07."""
    ds = [e["D"] for e in ns_report.results["ret_gof"]["per_checkpoint"]]
    corr = float(np.max(np.abs(
        np.corrcoef(ns_report.ret_stats, rowvar=False)
        [~np.eye(4, dtype=bool)])))
    ok = all(d < 0.05 for d in ds) and corr < 0.07
    detail = "D=" + ",".join(f"{d:.3f}" for d in ds) + f" corr={corr:.3f}"
    assert report_line(3, ok, detail)


def test_criterion_4_theorem2_integrated(int_report):
    """Integrated regime: volatility two-sample KS vs int x dW draws
    D < 0.06; returns D < 0.05; Var(int_0^1 x dW) = 1/3 within 5 SE."""
    vol_ds = [e["D"] for e in int_report.results["vol_gof"]["per_checkpoint"]]
    ret_ds = [e["D"] for e in int_report.results["ret_gof"]["per_checkpoint"]]
    ref = sample_time_weighted_wiener((0.5, 1.0), 100000,
                                      RngStream(SEED, 999))
    v = ref.draws[:, 1].var()
    se = math.sqrt(2.0 / 100000) / 3.0
    var_ok = abs(v - 1.0 / 3.0) < 5 * se
    ok = all(d < 0.06 for d in vol_ds) and all(d < 0.05 for d in ret_ds) \
        and var_ok
    detail = ("vol D=" + ",".join(f"{d:.3f}" for d in vol_ds)
              + " ret D=" + ",".join(f"{d:.3f}" for d in ret_ds)
              + f" var={v:.4f}")
    assert report_line(4, ok, detail)


def test_criterion_5_theorem3_near_explosive(ne_report):
    """Near-explosive regime: volatility vs W(t) marginals D < 0.06;
    increment-independence corr < 0.07; returns D < 0.05."""
    vol_ds = [e["D"] for e in ne_report.results["vol_gof"]["per_checkpoint"]]
    ret_ds = [e["D"] for e in ne_report.results["ret_gof"]["per_checkpoint"]]
    corr = ne_report.results["independence"]["max_abs_corr"]
    ok = all(d < 0.06 for d in vol_ds) and all(d < 0.05 for d in ret_ds) \
        and corr < 0.07
    detail = ("vol D=" + ",".join(f"{d:.3f}" for d in vol_ds)
              + " ret D=" + ",".join(f"{d:.3f}" for d in ret_ds)
              + f" corr={corr:.3f}")
    assert report_line(5, ok, detail)


def test_criterion_6_remainder_orders():
    """Scaled remainder medians stay within a factor-3 band over
    n in {1e3, 1e4, 1e5} (200 paths each)."""
    cfg = McConfig(scheme=NS_SCHEME, innovation=NORMAL, n=1000, grid=GRID,
                   reps=200, master_seed=SEED, mode=LITERAL,
                   tests=("remainders",))
    _, trend = run_n_sweep(cfg, [10 ** 3, 10 ** 4, 10 ** 5])
    r2 = trend["remainders"]["r2_over_alpha_sq"]
    r3 = trend["remainders"]["r3_scaled"]
    ok = r2["within_factor_3"] and r3["within_factor_3"]
    assert report_line(
        6, ok, f"R2 band ratio {r2['ratio']:.2f}, R3 band ratio "
               f"{r3['ratio']:.2f}")


def test_criterion_7_lemma_discrepancy():
    """Lemma discrepancy mean strictly decreases over n in
    {1e3, 1e4, 1e5} (500 reps) and is < 0.05 at n = 1e5."""
    cfg = McConfig(scheme=NE_SCHEME, innovation=NORMAL, n=1000, grid=GRID,
                   reps=500, master_seed=SEED, tests=("lemma",))
    _, trend = run_n_sweep(cfg, [10 ** 3, 10 ** 4, 10 ** 5])
    means = trend["lemma"]["means"]
    ok = trend["lemma"]["strictly_decreasing"] and means[-1] < 0.05
    assert report_line(
        7, ok, "means=" + ",".join(f"{m:.4f}" for m in means))


def test_criterion_8_deterministic_sums():
    """(gamma^2/k) sum j e^{j gamma/sqrt k} in [0.99, 1.01] for
    gamma=-0.05, k=1e6; geometric_exp_sum matches brute force to 1e-10
    on 1000 random inputs."""
    g, k = -0.05, 10 ** 6
    val = g * g / k * weighted_exp_sum(g / math.sqrt(k), k)
    eq1_ok = 0.99 <= val <= 1.01
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        a = rng.uniform(-1.0, 1.0)
        kk = int(rng.integers(2, 1500))
        if a * kk > 600.0:
            a = 600.0 / kk
        brute = math.fsum(math.exp(j * a) for j in range(1, kk))
        worst = max(worst, abs(geometric_exp_sum(a, kk) - brute) / brute)
    ok = eq1_ok and worst < 1e-10
    assert report_line(8, ok, f"eq1={val:.6f}, worst rel {worst:.2e}")


def test_criterion_9_tau_coupling():
    """E(sqrt(2|g|^3) tau* - sqrt(2|g|) tau)^2 decreases over
    n in {1e3, 1e4, 1e5}."""
    cfg = McConfig(scheme=NS_SCHEME, innovation=NORMAL, n=1000, grid=GRID,
                   reps=400, master_seed=SEED, tests=("tau_coupling",))
    _, trend = run_n_sweep(cfg, [10 ** 3, 10 ** 4, 10 ** 5])
    est = trend["tau_coupling"]["estimates"]
    ok = trend["tau_coupling"]["strictly_decreasing"]
    assert report_line(
        9, ok, "estimates=" + ",".join(f"{e:.2e}" for e in est))


def _write_config(path, c_gamma=-1.0, kappa=0.4, p=0.5, n=1000, reps=150,
                  mode="classical"):
    doc = {
        "scheme": {"omega": 1.0, "sigma0_sq": 1.0, "c_alpha": 1.0, "p": p,
                   "c_gamma": c_gamma, "kappa": kappa},
        "innovation": {"kind": "standard-normal"},
        "grid": {"t_values": [0.2, 0.4, 0.6, 0.8]},
        "run": {"n": n, "reps": reps, "master_seed": SEED, "mode": mode,
                "tests": ["vol_gof", "ret_gof", "independence"],
                "level": 0.01},
    }
    path.write_text(json.dumps(doc))
    return path


def test_criterion_10_literal_mode_never_asserts_convergence(tmp_path):
    """verify --mode literal exits 2; diagnose in literal mode emits
    finite log-scale diagnostics with no NaN/Inf."""
    cfg = _write_config(tmp_path / "c.json", n=600, reps=40)
    code = cli_main(["verify", "--config", str(cfg),
                     "--out", str(tmp_path / "v"), "--mode", "literal"])
    out = tmp_path / "d"
    diag = cli_main(["diagnose", "--config", str(cfg), "--out", str(out),
                     "--mode", "literal"])
    finite = True
    if diag == 0:
        for name in ("components.csv", "qq.csv"):
            body = (out / name).read_text()
            finite &= "nan" not in body.lower() and "inf" not in body.lower()
        doc = json.loads((out / "diagnostics.json").read_text())
        rem = doc["results"]["remainders"]
        finite &= all(math.isfinite(rem[key]) for key in
                      ("r1_abs_median", "r2_max_median", "r3_rel_median"))
    ok = code == 2 and diag == 0 and finite
    assert report_line(
        10, ok, f"verify exit {code}, diagnose exit {diag}, finite={finite}")


def test_criterion_11_determinism(tmp_path):
    """Re-running an experiment with the same master seed produces
    byte-identical JSON and CSV output."""
    cfg = _write_config(tmp_path / "c.json", n=1000, reps=150)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    cli_main(["verify", "--config", str(cfg), "--out", str(out1)])
    cli_main(["verify", "--config", str(cfg), "--out", str(out2)])
    same = all((out1 / f).read_bytes() == (out2 / f).read_bytes()
               for f in ("report.json", "stats.csv"))
    assert report_line(11, same, "report.json and stats.csv byte-identical")
