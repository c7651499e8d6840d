"""Synthetic scenarios, seeded trial runners and result aggregation.

Seeding
-------
Trial ``i`` of a batch uses ``seed = base_seed + i``. From that integer the
reference set, the test stream and the detector's tie-breaking draws come
from three separate ``SeedSequence`` entropy lists, so a batch run is
reproducible however the trials are scheduled. Paired runs (default) give
every variant the same reference set and stream; the tie-breaking draws are
always variant specific.

All Gaussian draws use numpy's ``Generator.standard_normal`` (ziggurat).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .betting import BetContext, apply_clip, bet_g
from .detector import (
    CONDITIONAL,
    STANDARD,
    VARIANTS,
    Detector,
    DetectorConfig,
    bet_context_for,
)
from .ecdf import ReferenceSet, build_reference, pooled_pvalue_path, pvalue_fixed, pvalue_fixed_randomized
from .ons import ons_step

SCENARIO_KINDS = ("null", "immediate_shift", "delayed_shift", "gradual", "ar1")


@dataclass(frozen=True)
class Scenario:
    """Test-stream generator; the null distribution is always N(0, 1).

    ``t0`` is the first shifted step (1-indexed) of a delayed shift.
    """

    kind: str = "null"
    horizon: int = 1000
    d: float = 0.0
    t0: int = 1
    lam: float = 0.0
    a: float = 0.7
    sigma2: float = 1.0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {SCENARIO_KINDS}")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.t0 < 1:
            raise ValueError("t0 must be >= 1")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")

    @classmethod
    def null(cls, horizon: int) -> "Scenario":
        return cls("null", horizon)

    @classmethod
    def immediate_shift(cls, d: float, horizon: int) -> "Scenario":
        return cls("immediate_shift", horizon, d=d)

    @classmethod
    def delayed_shift(cls, t0: int, d: float, horizon: int) -> "Scenario":
        return cls("delayed_shift", horizon, d=d, t0=t0)

    @classmethod
    def gradual(cls, lam: float, horizon: int) -> "Scenario":
        return cls("gradual", horizon, lam=lam)

    @classmethod
    def ar1(cls, a: float, sigma2: float, horizon: int) -> "Scenario":
        return cls("ar1", horizon, a=a, sigma2=sigma2)


@dataclass
class TrialResult:
    tau: int | None
    wealth_path: np.ndarray
    pvalue_path: np.ndarray
    eta_path: np.ndarray  # learner's parameter before each step
    regret_vs_oracle: float = float("nan")

    @property
    def horizon(self) -> int:
        return len(self.wealth_path)


@dataclass
class PowerCurve:
    times: np.ndarray
    power: np.ndarray

    def at(self, t: int) -> float:
        return float(self.power[t - 1])


@dataclass(frozen=True)
class SignalDiagnostic:
    delta_k: float
    mean_phat: float
    eps_bar: float


def generate_stream(scenario: Scenario, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    T = scenario.horizon
    t = np.arange(1, T + 1)
    z = rng.standard_normal(T)
    kind = scenario.kind
    if kind == "null":
        return z
    if kind == "immediate_shift":
        return z + scenario.d
    if kind == "delayed_shift":
        return z + scenario.d * (t >= scenario.t0)
    if kind == "gradual":
        return z + scenario.lam * t
    # ar1, started from its stationary law when that exists
    a, sigma = scenario.a, np.sqrt(scenario.sigma2)
    x = np.empty(T)
    x[0] = z[0] * (sigma / np.sqrt(1 - a * a) if abs(a) < 1 else sigma)
    for i in range(1, T):
        x[i] = a * x[i - 1] + sigma * z[i]
    return x


def trial_seeds(seed: int, variant: str, paired: bool = True):
    """``(reference, stream, detector)`` seed sequences of one trial."""
    vidx = VARIANTS.index(variant)
    data_key = [seed] if paired else [seed, 100 + vidx]
    return (
        np.random.SeedSequence(data_key + [0]),
        np.random.SeedSequence(data_key + [1]),
        np.random.SeedSequence([seed, 2, vidx]),
    )


def draw_reference(n_ref: int, seed, delta: float) -> ReferenceSet:
    return build_reference(np.random.default_rng(seed).standard_normal(n_ref), delta)


# --- regret oracle -----------------------------------------------------------

def grid_oracle(p_hats, eps, ctx: BetContext, step: float = 1e-3):
    """Best fixed betting parameter in hindsight by grid search on [-1/2, 1/2].

    Returns ``(best_eta, best_cumulative_loss)``.
    """
    p = np.asarray(p_hats, dtype=float) - 0.5
    eps = np.broadcast_to(np.asarray(eps, dtype=float), p.shape)
    grid = np.linspace(-0.5, 0.5, int(round(1.0 / step)) + 1)
    losses = np.empty(grid.size)
    for lo in range(0, grid.size, 64):
        eta = grid[lo:lo + 64, None]
        g = ctx.scale_c * (eta * p[None, :] - np.sqrt(eta * eta + ctx.k * ctx.k) * eps[None, :])
        losses[lo:lo + 64] = -np.log1p(g).sum(axis=1)
    i = int(np.argmin(losses))
    return float(grid[i]), float(losses[i])


def oracle_regret(etas, p_hats, eps, ctx: BetContext, step: float = 1e-3) -> float:
    """Learner's cumulative loss minus the grid-search best fixed loss."""
    p_hats = np.asarray(p_hats, dtype=float)
    played = -np.log1p(bet_g(p_hats, np.asarray(etas, dtype=float), eps, ctx)).sum()
    return float(played - grid_oracle(p_hats, eps, ctx, step)[1])


# --- trial runners -------------------------------------------------------------

def run_trial(scenario: Scenario, cfg: DetectorConfig, n_ref: int = 1000, seed: int = 0,
              paired: bool = True, with_regret: bool = True) -> TrialResult:
    """Run one seeded trial through the streaming :class:`Detector`."""
    ref_ss, stream_ss, det_ss = trial_seeds(seed, cfg.variant, paired)
    ref = draw_reference(n_ref, ref_ss, cfg.delta)
    stream = generate_stream(scenario, stream_ss)
    det = Detector(ref, cfg, seed=det_ss)
    T = scenario.horizon
    wealth, pvals, etas = np.empty(T), np.empty(T), np.empty(T)
    for i, x in enumerate(stream):
        etas[i] = det.ons.eta
        out = det.step(float(x))
        wealth[i], pvals[i] = out.wealth, out.p_value
    regret = oracle_regret(etas, pvals, det.band(), det.ctx) if with_regret else float("nan")
    return TrialResult(det.rejected_at, wealth, pvals, etas, regret)


def _pvalue_matrix(refs, streams, cfg: DetectorConfig, det_seeds) -> np.ndarray:
    P = np.empty_like(streams)
    T = streams.shape[1]
    for i, (ref, row) in enumerate(zip(refs, streams)):
        if cfg.variant == CONDITIONAL:
            P[i] = pvalue_fixed(ref, row)
            continue
        u = np.random.default_rng(det_seeds[i]).random(T)
        if cfg.variant == STANDARD:
            P[i] = pooled_pvalue_path(ref, row, u)
        else:
            P[i] = pvalue_fixed_randomized(ref, row, u)
    return P


def run_trials(scenario: Scenario, cfg: DetectorConfig, n_ref: int = 1000, trials: int = 100,
               base_seed: int = 0, paired: bool = True, with_regret: bool = True) -> list[TrialResult]:
    """Run ``trials`` seeded trials at once, vectorized across trials.

    Trial ``i`` reproduces ``run_trial(..., seed=base_seed + i)`` step for step.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seeds = [trial_seeds(base_seed + i, cfg.variant, paired) for i in range(trials)]
    refs = [draw_reference(n_ref, s[0], cfg.delta) for s in seeds]
    streams = np.stack([generate_stream(scenario, s[1]) for s in seeds])
    P = _pvalue_matrix(refs, streams, cfg, [s[2] for s in seeds])

    ctx = bet_context_for(refs[0], cfg)
    eps = refs[0].band() if cfg.variant == CONDITIONAL else 0.0
    T = scenario.horizon
    eta, a = np.zeros(trials), np.ones(trials)
    logw = np.zeros(trials)
    tau = np.zeros(trials, dtype=int)
    log_wealth = np.empty((trials, T))
    eta_path = np.empty((trials, T))
    for t in range(T):
        eta_path[:, t] = eta
        p = P[:, t]
        if t + 1 > cfg.warmup:
            eta_bet = apply_clip(eta, ctx.clip)
            g = bet_g(p, eta_bet, eps, ctx)
            logw = logw + np.where(eta_bet != 0.0, np.log1p(g), 0.0)
        log_wealth[:, t] = logw
        tau[(tau == 0) & (logw >= cfg.log_threshold)] = t + 1
        eta, a, _ = ons_step(eta, a, p, eps, ctx)

    fmax = np.finfo(float).max
    with np.errstate(over="ignore"):
        wealth = np.where(log_wealth >= np.log(fmax), fmax, np.exp(log_wealth))
    results = []
    for i in range(trials):
        regret = oracle_regret(eta_path[i], P[i], eps, ctx) if with_regret else float("nan")
        results.append(TrialResult(int(tau[i]) or None, wealth[i], P[i], eta_path[i], regret))
    return results


def compare_variants(scenario: Scenario, cfg: DetectorConfig, variants: Sequence[str],
                     n_ref: int = 1000, trials: int = 100, base_seed: int = 0,
                     paired: bool = True, with_regret: bool = False) -> dict[str, list[TrialResult]]:
    return {
        v: run_trials(scenario, replace(cfg, variant=v), n_ref, trials, base_seed, paired, with_regret)
        for v in variants
    }


# --- aggregation -----------------------------------------------------------------

def _tau(trial) -> int | None:
    return trial.tau if isinstance(trial, TrialResult) else trial


def aggregate_power(trials: Sequence[TrialResult]) -> PowerCurve:
    """Cumulative power ``#{tau <= t} / #trials`` for ``t = 1..T``."""
    if not trials:
        raise ValueError("need at least one trial")
    T = trials[0].horizon
    if any(tr.horizon != T for tr in trials):
        raise ValueError("all trials must share the same horizon")
    taus = np.array([tr.tau if tr.tau is not None else T + 1 for tr in trials])
    times = np.arange(1, T + 1)
    counts = np.bincount(np.minimum(taus, T + 1), minlength=T + 2)[1:T + 1]
    return PowerCurve(times, np.cumsum(counts) / len(trials))


def stopping_summary(trials: Sequence[TrialResult], horizon_cap: int | None = None) -> dict:
    """Median/mean stopping time (unrejected runs count as ``horizon_cap``) and rejection rate."""
    if not trials:
        raise ValueError("need at least one trial")
    cap = horizon_cap if horizon_cap is not None else trials[0].horizon
    taus = np.array([tr.tau if tr.tau is not None else cap for tr in trials], dtype=float)
    rate = float(np.mean([tr.tau is not None for tr in trials]))
    return {"median_tau": float(np.median(taus)), "mean_tau": float(np.mean(taus)), "rejection_rate": rate}


def rejection_time_ratio(trials_a, trials_b, horizon_cap: int) -> float:
    """Median over pairs of ``tau_b / tau_a``; unrejected runs count as ``horizon_cap``.

    Values above 1 mean ``a`` detects faster than ``b``. Entries may be
    :class:`TrialResult` objects or raw stopping times (``None`` if unrejected).
    """
    if len(trials_a) == 0 or len(trials_a) != len(trials_b):
        raise ValueError("need two nonempty trial lists of equal length")
    ta = np.array([_tau(t) or horizon_cap for t in trials_a], dtype=float)
    tb = np.array([_tau(t) or horizon_cap for t in trials_b], dtype=float)
    return float(np.median(tb / ta))


def estimate_signal(ref: ReferenceSet, alt_samples, k: float = 1e-6) -> SignalDiagnostic:
    """Plug-in effective signal strength of an alternative against ``ref``."""
    alt = np.asarray(alt_samples, dtype=float)
    if alt.size == 0:
        raise ValueError("alt_samples must be nonempty")
    mean_phat = float(np.mean(pvalue_fixed(ref, alt)))
    eps_bar = float(np.mean(ref.band(pvalue_fixed(ref, alt))))
    delta_k = abs(mean_phat - 0.5) - np.sqrt(1 + k * k) * eps_bar
    return SignalDiagnostic(float(delta_k), mean_phat, eps_bar)


def trailing_mean(x, window: int = 10) -> np.ndarray:
    """Mean of the latest ``window`` values at each step (fewer at the start)."""
    x = np.asarray(x, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


@dataclass
class ContaminationCurves:
    pooled: np.ndarray
    fixed: np.ndarray
    scenario: Scenario = field(repr=False, default=None)


def pvalue_contamination(n_ref: int = 100, t0: int = 301, horizon: int = 2300, d: float = 1.0,
                         trials: int = 100, base_seed: int = 0, window: int = 10,
                         delta: float = 0.1) -> ContaminationCurves:
    """Trial-averaged trailing means of pooled vs fixed-reference p-values.

    Pooled p-values use the standard (growing-pool) construction, fixed ones
    the plain ECDF of the reference set; both see the same data per trial.
    """
    scenario = Scenario.delayed_shift(t0, d, horizon)
    pooled = np.zeros(horizon)
    fixed = np.zeros(horizon)
    for i in range(trials):
        ref_ss, stream_ss, det_ss = trial_seeds(base_seed + i, STANDARD)
        ref = draw_reference(n_ref, ref_ss, delta)
        stream = generate_stream(scenario, stream_ss)
        u = np.random.default_rng(det_ss).random(horizon)
        pooled += trailing_mean(pooled_pvalue_path(ref, stream, u), window)
        fixed += trailing_mean(pvalue_fixed(ref, stream), window)
    return ContaminationCurves(pooled / trials, fixed / trials, scenario)
