"""Normalized checkpoint statistics and stable exponential sums.

Two normalization modes run through every statistic:

* ``classical`` is the convergence-bearing variant: exponents j*gamma_n,
  no k-power prefactors, each statistic's leading term equal to the
  driving martingale of the corresponding limit law.
* ``literal`` reproduces the per-sqrt(k) scaled displays in log space.
  Those carry a k^{k/2} bookkeeping factor that makes their linear
  values degenerate; they are emitted for diagnostics only and no
  convergence is asserted for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .localization import GarchParams, Regime, classify_regime
from .simulate import CLASSICAL, LITERAL, MODES, GarchPath


class WrongRegime(ValueError):
    pass


class CancellationError(ArithmeticError):
    """Raised when a centered difference loses more than 10 digits."""


@dataclass(frozen=True)
class CheckpointGrid:
    """Fractions 0 < t_1 < ... < t_N < 1 evaluated at k(m) = floor(n t_m)."""

    t_values: Tuple[float, ...]

    def __post_init__(self):
        ts = self.t_values
        if not ts:
            raise ValueError("empty checkpoint grid")
        if any(not 0.0 < t < 1.0 for t in ts):
            raise ValueError("checkpoint fractions must lie in (0, 1)")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("checkpoint fractions must be strictly increasing")

    def checkpoints(self, n: int) -> Tuple[int, ...]:
        ks = tuple(int(math.floor(n * t)) for t in self.t_values)
        if ks[0] < 3:
            raise ValueError(f"k(1) = {ks[0]} < 3: grid too early for n = {n}")
        return ks


@dataclass(frozen=True)
class StatValue:
    """A statistic value with log-scale bookkeeping for literal mode."""

    value: float
    log_magnitude: float
    sign: float
    degenerate: bool = False

    def __float__(self) -> float:
        return float(self.value)


def _plain(value: float) -> StatValue:
    value = float(value)
    if value == 0.0:
        return StatValue(0.0, -math.inf, 0.0)
    return StatValue(value, math.log(abs(value)), math.copysign(1.0, value))


def geometric_exp_sum(a: float, k: int) -> float:
    """sum_{j=1}^{k-1} e^{j a}, exact at a = 0, expm1-stable near it."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if a == 0.0:
        return float(k - 1)
    if k * a > 709.0:
        return math.inf
    return math.exp(a) * math.expm1((k - 1) * a) / math.expm1(a)


def log_geometric_exp_sum(a: float, k: int) -> float:
    """log of geometric_exp_sum, safe when (k-1)*a overflows exp."""
    if a <= 0.0 or (k - 1) * a < 700.0:
        return math.log(geometric_exp_sum(a, k))
    return a + (k - 1) * a + math.log1p(-math.exp(-(k - 1) * a)) \
        - math.log(math.expm1(a))


def weighted_exp_sum(a: float, k: int) -> float:
    """sum_{j=1}^{k} j e^{j a}, stable closed form.

    Near a = 0 the closed form cancels catastrophically, so a Taylor
    branch in the power sums of j is used for |k a| < 1e-3.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if a == 0.0:
        return k * (k + 1) / 2.0
    if abs(k * a) < 1e-3:
        kk = float(k)
        s1 = kk * (kk + 1) / 2.0
        s2 = kk * (kk + 1) * (2 * kk + 1) / 6.0
        s3 = s1 * s1
        s4 = kk * (kk + 1) * (2 * kk + 1) * (3 * kk * kk + 3 * kk - 1) / 30.0
        s5 = kk * kk * (kk + 1) ** 2 * (2 * kk * kk + 2 * kk - 1) / 12.0
        return s1 + a * s2 + a * a / 2.0 * s3 + a ** 3 / 6.0 * s4 \
            + a ** 4 / 24.0 * s5
    if (k + 1) * a > 700.0:
        return math.inf
    u = math.expm1(a)
    num = -math.expm1(k * a) + k * math.exp(k * a) * u
    return math.exp(a) * num / (u * u)


def _require(params: GarchParams, regime: Regime) -> None:
    actual = classify_regime(params)
    if actual is not regime:
        raise WrongRegime(f"statistic requires {regime.value}, got {actual.value}")


def _stable_centered_diff(log_ratio: float, log_center: float) -> Tuple[float, float]:
    """e^{log_ratio} - e^{log_center} as (log magnitude, sign).

    Evaluated as -e^{L} expm1(C - L) around the larger exponent, which
    keeps full relative accuracy when both terms are huge.  Raises when
    the relative difference drops below 1e-10 (all digits lost).
    """
    hi, lo = max(log_ratio, log_center), min(log_ratio, log_center)
    rel = -math.expm1(lo - hi)
    if rel < 1e-10:
        raise CancellationError(
            f"centered difference lost all significant digits "
            f"(relative gap {rel:.3e})")
    sign = 1.0 if log_ratio > log_center else -1.0
    return hi + math.log(rel), sign


# ---------------------------------------------------------------------------
# near-stationary regime (gamma < 0)

def ns_volatility_stat(sigma_k_sq: float, params: GarchParams, k: int,
                       xi_var: float, mode: str = CLASSICAL,
                       log_sigma_k_sq: Optional[float] = None) -> StatValue:
    _require(params, Regime.NEAR_STATIONARY)
    if xi_var <= 0.0:
        raise ValueError("xi_var must be > 0")
    a, g, w = params.alpha_n, params.gamma_n, params.omega
    if mode == CLASSICAL:
        pref = math.sqrt(2.0 * abs(g) ** 3) / (a * math.sqrt(xi_var))
        return _plain(pref * (sigma_k_sq / w - geometric_exp_sum(g, k)))
    if mode != LITERAL:
        raise ValueError(f"unknown mode {mode!r}")
    pref = math.sqrt(2.0 * abs(g) ** 3) / (a * k ** 0.25 * math.sqrt(xi_var))
    return _literal_centered(sigma_k_sq, log_sigma_k_sq, params, k,
                             math.log(pref), g / math.sqrt(k))


def ns_return_stat(u_k: float, params: GarchParams, k: int,
                   mode: str = CLASSICAL,
                   log_abs_u: Optional[float] = None) -> StatValue:
    _require(params, Regime.NEAR_STATIONARY)
    g, w = params.gamma_n, params.omega
    if mode == CLASSICAL:
        return _plain(math.sqrt(abs(g) / w) * u_k)
    log_pref = 0.5 * (math.log(abs(g)) - math.log(w)
                      - (k + 1) / 2.0 * math.log(k))
    return _literal_return(u_k, log_abs_u, log_pref)


# ---------------------------------------------------------------------------
# integrated regime (gamma = 0)

def int_volatility_stat(sigma_k_sq: float, params: GarchParams, n: int, k: int,
                        xi_var: float, mode: str = CLASSICAL,
                        log_sigma_k_sq: Optional[float] = None) -> StatValue:
    _require(params, Regime.INTEGRATED)
    a, w = params.alpha_n, params.omega
    if mode == CLASSICAL:
        # leading term (alpha * double xi sum) divided by alpha: the
        # n^{-3/2} double-sum martingale that converges to int x dW
        pref = 1.0 / (n ** 1.5 * a * math.sqrt(xi_var))
        return _plain(pref * (sigma_k_sq / w - k))
    if mode != LITERAL:
        raise ValueError(f"unknown mode {mode!r}")
    pref = math.sqrt(k) / (n ** 1.5 * a * math.sqrt(xi_var))
    L = (_log_ratio(sigma_k_sq, log_sigma_k_sq) - math.log(w)
         - 0.5 * k * math.log(k))
    diff = math.exp(L) - k if L < 700.0 else math.inf
    degen = L < math.log(k) - 36.0
    val = pref * diff
    return StatValue(val, math.log(abs(val)) if val else -math.inf,
                     math.copysign(1.0, val) if val else 0.0, degenerate=degen)


def int_return_stat(u_k: float, params: GarchParams, k: int,
                    mode: str = CLASSICAL,
                    log_abs_u: Optional[float] = None) -> StatValue:
    _require(params, Regime.INTEGRATED)
    w = params.omega
    if mode == CLASSICAL:
        return _plain(u_k / math.sqrt(w * k))
    log_pref = -0.5 * (math.log(w) + (0.5 * k + 1.0) * math.log(k))
    return _literal_return(u_k, log_abs_u, log_pref)


# ---------------------------------------------------------------------------
# near-explosive regime (gamma > 0)

def ne_volatility_stat(sigma_k_sq: float, params: GarchParams, n: int, k: int,
                       xi_var: float, mode: str = CLASSICAL,
                       log_sigma_k_sq: Optional[float] = None) -> StatValue:
    _require(params, Regime.NEAR_EXPLOSIVE)
    a, g, w = params.alpha_n, params.gamma_n, params.omega
    if mode == CLASSICAL:
        L = _log_ratio(sigma_k_sq, log_sigma_k_sq) - math.log(w)
        log_center = log_geometric_exp_sum(g, k)
        log_pref = (math.log(g) - k * g
                    - math.log(a * math.sqrt(n) * math.sqrt(xi_var)))
        if L < 700.0 and log_center < 700.0:
            lhs = (sigma_k_sq / w if (log_sigma_k_sq is None
                                      and math.isfinite(sigma_k_sq))
                   else math.exp(L))
            diff = lhs - geometric_exp_sum(g, k)
            if diff == 0.0:
                return _plain(0.0)
            if abs(diff) < 1e-10 * math.exp(max(L, log_center)):
                raise CancellationError(
                    "centered difference lost all significant digits")
            return _plain(math.copysign(
                math.exp(log_pref + math.log(abs(diff))), diff))
        log_diff, sign = _stable_centered_diff(L, log_center)
        return StatValue(sign * math.exp(log_pref + log_diff),
                         log_pref + log_diff, sign)
    if mode != LITERAL:
        raise ValueError(f"unknown mode {mode!r}")
    rk = math.sqrt(k)
    pref_log = math.log(g) - rk * g - math.log(a * rk * math.sqrt(xi_var))
    return _literal_centered(sigma_k_sq, log_sigma_k_sq, params, k,
                             pref_log, g / rk)


def ne_return_stat(u_k: float, params: GarchParams, k: int,
                   mode: str = CLASSICAL,
                   log_abs_u: Optional[float] = None) -> StatValue:
    _require(params, Regime.NEAR_EXPLOSIVE)
    g, w = params.gamma_n, params.omega
    if mode == CLASSICAL:
        log_pref = 0.5 * (math.log(g) - k * g - math.log(w))
        if u_k == 0.0:
            return _plain(0.0)
        la = log_abs_u if log_abs_u is not None else math.log(abs(u_k))
        val = math.copysign(math.exp(log_pref + la), u_k)
        return StatValue(val, log_pref + la, math.copysign(1.0, u_k))
    log_pref = 0.5 * (math.log(g) - math.sqrt(k) * g - math.log(w)
                      - (k + 1) / 2.0 * math.log(k))
    return _literal_return(u_k, log_abs_u, log_pref)


# ---------------------------------------------------------------------------
# proof-device statistics

def tau_stats(path: GarchPath, params: GarchParams, k: int,
              mode: str = CLASSICAL) -> Tuple[float, float]:
    """Single-sum tau and double-sum tau* exponential xi statistics."""
    _require(params, Regime.NEAR_STATIONARY)
    return _tau_pair(path, params, k, mode)


def _tau_pair(path: GarchPath, params: GarchParams, k: int,
              mode: str) -> Tuple[float, float]:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    g = params.gamma_n
    xi_rev = path.xi[k - 1::-1]
    s = np.cumsum(xi_rev)
    j = np.arange(1, k, dtype=float)
    if mode == CLASSICAL:
        wgt = np.exp(g * j)
        return float(np.dot(wgt, xi_rev[:k - 1])), float(np.dot(wgt, s[:k - 1]))
    rk = math.sqrt(k)
    wgt = np.exp(g / rk * j)
    return (float(np.dot(wgt, xi_rev[:k - 1])) / k ** 0.25,
            float(np.dot(wgt, s[:k - 1])) / rk)


def lemma_discrepancy(path: GarchPath, params: GarchParams, k: int,
                      mode: str = CLASSICAL) -> float:
    """Single-replicate squared gap between the exponentially weighted
    double xi sum and its explosive-regime surrogate (a scaled simple
    xi sum); the Monte Carlo mean of this estimates the L2 discrepancy.
    """
    _require(params, Regime.NEAR_EXPLOSIVE)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    g = params.gamma_n
    xi_rev = path.xi[k - 1::-1]
    s = np.cumsum(xi_rev)
    j = np.arange(1, k, dtype=float)
    if mode == CLASSICAL:
        wgt = g * np.exp(g * (j - k))          # gamma e^{-k gamma} e^{j gamma}
        gap = float(np.dot(wgt, s[:k - 1])) - float(s[k - 2])
        return gap * gap / params.n
    rk = math.sqrt(k)
    wgt = (g / rk) * np.exp(g / rk * (j - k))
    gap = float(np.dot(wgt, s[:k - 1])) - float(s[k - 2])
    return gap * gap / k


# ---------------------------------------------------------------------------
# shared literal-mode helpers

def _log_ratio(sigma_k_sq: float, log_sigma_k_sq: Optional[float]) -> float:
    if log_sigma_k_sq is not None:
        return log_sigma_k_sq
    if not sigma_k_sq > 0.0 or not math.isfinite(sigma_k_sq):
        raise ValueError("need log_sigma_k_sq for non-representable sigma^2")
    return math.log(sigma_k_sq)


def _literal_centered(sigma_k_sq: float, log_sigma_k_sq: Optional[float],
                      params: GarchParams, k: int, log_pref: float,
                      g_scaled: float) -> StatValue:
    """Literal display: pref * (sigma^2/(omega k^{k/2}) - sum e^{j g/sqrt k}).

    The scaled volatility term carries exponent -(k/2) log k and
    underflows any linear scale; when it is lost relative to the
    centering sum the result is flagged literal-degenerate.
    """
    L = (_log_ratio(sigma_k_sq, log_sigma_k_sq) - math.log(params.omega)
         - 0.5 * k * math.log(k))
    log_center = log_geometric_exp_sum(g_scaled, k)
    degenerate = L < log_center - 36.0
    diff = (math.exp(L) if L < 700.0 else math.inf) - math.exp(log_center)
    val = math.copysign(math.exp(log_pref + math.log(abs(diff))), diff) \
        if diff != 0.0 else 0.0
    return StatValue(val,
                     log_pref + (math.log(abs(diff)) if diff else -math.inf),
                     math.copysign(1.0, diff) if diff else 0.0,
                     degenerate=degenerate)


def _literal_return(u_k: float, log_abs_u: Optional[float],
                    log_pref: float) -> StatValue:
    if u_k == 0.0:
        return StatValue(0.0, -math.inf, 0.0, degenerate=True)
    la = log_abs_u if log_abs_u is not None else math.log(abs(u_k))
    lm = log_pref + la
    # linear value underflows once lm < log of the smallest subnormal
    val = math.copysign(math.exp(lm), u_k) if lm > -745.0 else 0.0
    return StatValue(val, lm, math.copysign(1.0, u_k), degenerate=True)
