"""Monte Carlo experiment orchestration.

Replications are keyed to (master_seed, replication_id) streams, so the
report is a pure function of the config and seed; every reduction sorts
its inputs first, which makes the result independent of replication
order and hence of any scheduling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import gof, limits
from .innovations import (InnovationSpec, RngStream, innovation_cdf,
                          sample_innovations, validate_spec,
                          xi_second_moment)
from .kernels import recursion_batch
from .localization import (GarchParams, LocalizationScheme, Regime,
                           classify_regime, realize_params)
from .simulate import (CLASSICAL, LITERAL, MODES, GarchPath,
                       decompose_volatility)
from .stats import (CheckpointGrid, lemma_discrepancy, ns_return_stat,
                    ns_volatility_stat, ne_return_stat, ne_volatility_stat,
                    int_return_stat, int_volatility_stat, tau_stats)

ALL_TESTS = ("vol_gof", "ret_gof", "independence", "lemma", "remainders",
             "tau_coupling")
GOF_TESTS = frozenset({"vol_gof", "ret_gof"})

# diagnostic checkpoint for lemma / remainder / tau sweeps
DIAG_FRACTION = 0.8

# stream index block reserved for reference-law sampling
_REF_STREAM_BASE = 2 ** 32


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class McConfig:
    scheme: LocalizationScheme
    innovation: InnovationSpec
    n: int
    grid: CheckpointGrid
    reps: int
    master_seed: int
    mode: str = CLASSICAL
    tests: Tuple[str, ...] = ("vol_gof", "ret_gof", "independence")
    level: float = gof.DEFAULT_LEVEL

    def to_config(self) -> dict:
        return {
            "scheme": self.scheme.to_config(),
            "innovation": self.innovation.to_config(),
            "grid": {"t_values": list(self.grid.t_values)},
            "run": {"n": self.n, "reps": self.reps,
                    "master_seed": self.master_seed, "mode": self.mode,
                    "tests": list(self.tests), "level": self.level},
        }

    @staticmethod
    def from_config(cfg: dict) -> "McConfig":
        try:
            run = cfg["run"]
            return McConfig(
                scheme=LocalizationScheme.from_config(cfg["scheme"]),
                innovation=InnovationSpec.from_config(cfg["innovation"]),
                n=int(run["n"]),
                grid=CheckpointGrid(tuple(cfg["grid"]["t_values"])),
                reps=int(run["reps"]),
                master_seed=int(run["master_seed"]),
                mode=run.get("mode", CLASSICAL),
                tests=tuple(run.get("tests",
                                    ("vol_gof", "ret_gof", "independence"))),
                level=float(run.get("level", gof.DEFAULT_LEVEL)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid config: {exc}") from exc


@dataclass
class McReport:
    config: dict
    regime: str
    checkpoints: Tuple[int, ...]
    results: Dict[str, dict]
    moments: Tuple[dict, ...]
    master_seed: int
    verdict: bool
    # raw per-replication statistic matrices, not serialized
    vol_stats: Optional[np.ndarray] = field(default=None, repr=False)
    ret_stats: Optional[np.ndarray] = field(default=None, repr=False)

    def to_json(self) -> str:
        doc = {"config": self.config, "regime": self.regime,
               "checkpoints": list(self.checkpoints),
               "results": self.results,
               "moments": list(self.moments),
               "master_seed": self.master_seed,
               "verdict": self.verdict}
        return json.dumps(doc, sort_keys=True, indent=2)

    @staticmethod
    def from_json(text: str) -> "McReport":
        doc = json.loads(text)
        return McReport(config=doc["config"], regime=doc["regime"],
                        checkpoints=tuple(doc["checkpoints"]),
                        results=doc["results"],
                        moments=tuple(doc["moments"]),
                        master_seed=doc["master_seed"],
                        verdict=doc["verdict"])

    def stats_csv(self) -> str:
        if self.vol_stats is None:
            raise ValueError("raw statistics were not retained")
        lines = ["rep,checkpoint_k,vol_stat,ret_stat"]
        for i in range(self.vol_stats.shape[0]):
            for m, k in enumerate(self.checkpoints):
                lines.append("%d,%d,%.17g,%.17g" % (
                    i, k, self.vol_stats[i, m], self.ret_stats[i, m]))
        return "\n".join(lines) + "\n"


def validate_config(config: McConfig) -> GarchParams:
    if config.mode not in MODES:
        raise ConfigurationError(f"unknown mode {config.mode!r}")
    unknown = set(config.tests) - set(ALL_TESTS)
    if unknown:
        raise ConfigurationError(f"unknown tests: {sorted(unknown)}")
    if config.mode == LITERAL and GOF_TESTS & set(config.tests):
        raise ConfigurationError(
            "literal mode is diagnostic-only; GOF tests require classical")
    if GOF_TESTS & set(config.tests) and config.reps < 100:
        raise ConfigurationError("GOF tests need reps >= 100")
    if config.reps < 1:
        raise ConfigurationError("reps must be >= 1")
    if not 0.0 < config.level < 1.0:
        raise ConfigurationError("level must lie in (0, 1)")
    try:
        validate_spec(config.innovation)
        params = realize_params(config.scheme, config.n)
        config.grid.checkpoints(config.n)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    regime = classify_regime(params)
    if "lemma" in config.tests and regime is not Regime.NEAR_EXPLOSIVE:
        raise ConfigurationError("lemma test requires the near-explosive regime")
    if "tau_coupling" in config.tests and regime is not Regime.NEAR_STATIONARY:
        raise ConfigurationError(
            "tau_coupling test requires the near-stationary regime")
    if "ret_gof" in config.tests and config.innovation.kind == "two-point-mixture":
        raise ConfigurationError(
            "ret_gof needs a continuous innovation law (discrete CDF)")
    return params


def _simulate_chunked(config: McConfig, params: GarchParams):
    """Yield (first_rep_index, eps, sigma_sq, log_sigma_sq, overflow)."""
    n = config.n
    chunk = max(1, int(4e7 // (n + 1)))
    for start in range(0, config.reps, chunk):
        stop = min(start + chunk, config.reps)
        eps = np.empty((stop - start, n + 1))
        for i in range(start, stop):
            stream = RngStream(config.master_seed, i)
            eps[i - start] = sample_innovations(config.innovation, n + 1,
                                                stream)
        sigma_sq, log_sigma_sq, overflow = recursion_batch(
            eps, params.omega, params.alpha_n, params.beta_n,
            params.sigma0_sq)
        yield start, eps, sigma_sq, log_sigma_sq, overflow


def _vol_stat(regime: Regime, sigma_k_sq: float, log_sigma_k_sq: float,
              params: GarchParams, n: int, k: int, xi_var: float,
              mode: str) -> float:
    if regime is Regime.NEAR_STATIONARY:
        return float(ns_volatility_stat(sigma_k_sq, params, k, xi_var, mode,
                                        log_sigma_k_sq))
    if regime is Regime.INTEGRATED:
        return float(int_volatility_stat(sigma_k_sq, params, n, k, xi_var,
                                         mode, log_sigma_k_sq))
    return float(ne_volatility_stat(sigma_k_sq, params, n, k, xi_var, mode,
                                    log_sigma_k_sq))


def _ret_stat(regime: Regime, u_k: float, log_abs_u: Optional[float],
              params: GarchParams, k: int, mode: str) -> float:
    if regime is Regime.NEAR_STATIONARY:
        return float(ns_return_stat(u_k, params, k, mode, log_abs_u))
    if regime is Regime.INTEGRATED:
        return float(int_return_stat(u_k, params, k, mode, log_abs_u))
    return float(ne_return_stat(u_k, params, k, mode, log_abs_u))


def _sorted_mean(values: np.ndarray) -> float:
    return math.fsum(np.sort(values)) / len(values)


def _sorted_median(values: np.ndarray) -> float:
    return float(np.median(np.sort(values)))


def independence_threshold(reps: int) -> float:
    # 3/sqrt(reps) null bound plus a small slack for estimation noise
    return 3.0 / math.sqrt(reps) + 0.003


def run_experiment(config: McConfig, vol_shift: float = 0.0) -> McReport:
    """Run one Monte Carlo experiment.

    vol_shift adds a constant to every volatility statistic before
    testing; it exists only as fault injection for the CLI self-test
    (--corrupt-centering) and must be 0 in real runs.
    """
    params = validate_config(config)
    regime = classify_regime(params)
    n, reps, mode = config.n, config.reps, config.mode
    ks = config.grid.checkpoints(n)
    xi_var = xi_second_moment(config.innovation)
    k_diag = max(3, int(math.floor(DIAG_FRACTION * n)))

    vol = np.empty((reps, len(ks)))
    ret = np.empty((reps, len(ks)))
    need_paths = {"lemma", "remainders", "tau_coupling"} & set(config.tests)
    lemma_vals = np.empty(reps) if "lemma" in config.tests else None
    tau_vals = np.empty(reps) if "tau_coupling" in config.tests else None
    rem_rows = [] if "remainders" in config.tests else None

    for start, eps, sigma_sq, log_sigma_sq, overflow in \
            _simulate_chunked(config, params):
        for r in range(eps.shape[0]):
            i = start + r
            for m, k in enumerate(ks):
                vol[i, m] = _vol_stat(regime, sigma_sq[r, k],
                                      log_sigma_sq[r, k], params, n, k,
                                      xi_var, mode)
                e = eps[r, k]
                u_k = math.sqrt(sigma_sq[r, k]) * e \
                    if math.isfinite(sigma_sq[r, k]) else math.inf * e
                log_abs_u = (0.5 * log_sigma_sq[r, k] + math.log(abs(e))
                             if e != 0.0 else None)
                ret[i, m] = _ret_stat(regime, u_k, log_abs_u, params, k, mode)
            if need_paths:
                with np.errstate(invalid="ignore"):
                    u = np.sqrt(sigma_sq[r]) * eps[r]
                path = GarchPath(n=n, eps=eps[r], xi=eps[r] ** 2 - 1.0, u=u,
                                 sigma_sq=sigma_sq[r],
                                 log_sigma_sq=log_sigma_sq[r],
                                 master_seed=config.master_seed,
                                 stream_index=i,
                                 overflow_at=int(overflow[r]))
                if lemma_vals is not None:
                    lemma_vals[i] = lemma_discrepancy(path, params, k_diag,
                                                      mode)
                if tau_vals is not None:
                    g = params.gamma_n
                    tau, tau_star = tau_stats(path, params, k_diag, mode)
                    tau_vals[i] = (math.sqrt(2.0 * abs(g) ** 3) * tau_star
                                   - math.sqrt(2.0 * abs(g)) * tau) ** 2
                if rem_rows is not None:
                    dec = decompose_volatility(path, params, k_diag, mode)
                    rem_rows.append((abs(dec.r1), dec.r2_max, dec.r2_lil_max,
                                     dec.r3_rel_max))

    if vol_shift != 0.0:
        vol = vol + vol_shift

    results: Dict[str, dict] = {}
    if "vol_gof" in config.tests:
        results["vol_gof"] = _vol_gof(config, regime, ks, vol)
    if "ret_gof" in config.tests:
        results["ret_gof"] = _ret_gof(config, ks, ret)
    if "independence" in config.tests:
        results["independence"] = _independence(config, regime, ks, vol)
    if lemma_vals is not None:
        results["lemma"] = {"k": k_diag, "mean": _sorted_mean(lemma_vals),
                            "pass": True}
    if tau_vals is not None:
        results["tau_coupling"] = {"k": k_diag,
                                   "estimate": _sorted_mean(tau_vals),
                                   "pass": True}
    if rem_rows is not None:
        rem = np.asarray(rem_rows)
        results["remainders"] = {
            "k": k_diag,
            "r1_abs_median": _sorted_median(rem[:, 0]),
            "r2_max_median": _sorted_median(rem[:, 1]),
            "r2_lil_median": _sorted_median(rem[:, 2]),
            "r3_rel_median": _sorted_median(rem[:, 3]),
            "pass": True,
        }

    moments = tuple(
        {"k": k,
         "vol_mean": _sorted_mean(vol[:, m]),
         "vol_sd": float(np.std(np.sort(vol[:, m]))),
         "ret_mean": _sorted_mean(ret[:, m]),
         "ret_sd": float(np.std(np.sort(ret[:, m])))}
        for m, k in enumerate(ks))

    verdict = all(entry["pass"] for entry in results.values())
    return McReport(config=config.to_config(), regime=regime.value,
                    checkpoints=ks, results=results, moments=moments,
                    master_seed=config.master_seed, verdict=verdict,
                    vol_stats=vol, ret_stats=ret)


def _gof_entry(res: gof.GofResult, k: int) -> dict:
    return {"k": k, "D": res.statistic, "p": res.p_value, "pass": res.passed}


def _vol_gof(config: McConfig, regime: Regime, ks, vol) -> dict:
    per = []
    if regime is Regime.NEAR_STATIONARY:
        for m, k in enumerate(ks):
            per.append(_gof_entry(
                gof.ks_one_sample(vol[:, m], np.vectorize(limits.normal_cdf),
                                  config.level), k))
        reference = limits.STD_NORMAL_IID
    else:
        if regime is Regime.INTEGRATED:
            sampler, reference = (limits.sample_time_weighted_wiener,
                                  limits.TIME_WEIGHTED_WIENER)
        else:
            sampler, reference = (limits.sample_wiener_marginals,
                                  limits.WIENER_MARGINALS)
        ref = sampler(config.grid.t_values, config.reps,
                      RngStream(config.master_seed, _REF_STREAM_BASE))
        for m, k in enumerate(ks):
            per.append(_gof_entry(
                gof.ks_two_sample(vol[:, m], ref.draws[:, m], config.level),
                k))
    return {"reference": reference, "per_checkpoint": per,
            "pass": all(e["pass"] for e in per)}


def _ret_gof(config: McConfig, ks, ret) -> dict:
    cdf = innovation_cdf(config.innovation)
    per = [_gof_entry(gof.ks_one_sample(ret[:, m], cdf, config.level), k)
           for m, k in enumerate(ks)]
    return {"reference": "innovation", "per_checkpoint": per,
            "pass": all(e["pass"] for e in per)}


def _independence(config: McConfig, regime: Regime, ks, vol) -> dict:
    # raw statistics are the independent objects in the near-stationary
    # limit; in the Wiener-type limits independence lives in increments
    if regime is Regime.NEAR_STATIONARY:
        matrix, basis = vol, "statistics"
    else:
        matrix, basis = np.diff(vol, axis=1), "increments"
    if matrix.shape[1] < 2:
        return {"basis": basis, "max_abs_corr": 0.0,
                "threshold": independence_threshold(config.reps),
                "pass": True}
    max_corr = gof.max_offdiag_abs_correlation(matrix)
    thr = independence_threshold(config.reps)
    return {"basis": basis, "max_abs_corr": max_corr, "threshold": thr,
            "pass": max_corr < thr}


def _factor_band(values: Sequence[float]) -> dict:
    lo, hi = min(values), max(values)
    ratio = hi / lo if lo > 0.0 else math.inf
    return {"min": lo, "max": hi, "ratio": ratio,
            "within_factor_3": ratio <= 3.0}


def run_n_sweep(config: McConfig,
                n_grid: Sequence[int]) -> Tuple[Tuple[McReport, ...], dict]:
    """One report per n (shared scheme) plus trend diagnostics."""
    if len(n_grid) < 3:
        raise ConfigurationError("n_grid must have at least 3 points")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ConfigurationError("n_grid must be strictly increasing")
    reports = []
    for n in n_grid:
        cfg = McConfig(scheme=config.scheme, innovation=config.innovation,
                       n=int(n), grid=config.grid, reps=config.reps,
                       master_seed=config.master_seed, mode=config.mode,
                       tests=config.tests, level=config.level)
        reports.append(run_experiment(cfg))

    trend: Dict[str, dict] = {"n_grid": {"values": [int(n) for n in n_grid]}}
    if "lemma" in config.tests:
        means = [r.results["lemma"]["mean"] for r in reports]
        trend["lemma"] = {
            "means": means,
            "strictly_decreasing": all(b < a for a, b in zip(means, means[1:])),
        }
    if "remainders" in config.tests:
        r2_scaled, r3_scaled = [], []
        for n, r in zip(n_grid, reports):
            p = realize_params(config.scheme, int(n))
            e = r.results["remainders"]
            k = e["k"]
            r2_scaled.append(e["r2_max_median"] / p.alpha_n ** 2)
            r3_scaled.append(e["r3_rel_median"] * k
                             / (p.alpha_n ** 2 + p.gamma_n ** 2))
        trend["remainders"] = {"r2_over_alpha_sq": _factor_band(r2_scaled),
                               "r3_scaled": _factor_band(r3_scaled)}
    if "tau_coupling" in config.tests:
        est = [r.results["tau_coupling"]["estimate"] for r in reports]
        trend["tau_coupling"] = {
            "estimates": est,
            "strictly_decreasing": all(b < a for a, b in zip(est, est[1:])),
        }
    return tuple(reports), trend
