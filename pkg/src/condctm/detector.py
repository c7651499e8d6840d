"""Wealth-process detectors with Ville-threshold stopping.

Three variants share one betting and learning path:

``conditional``
    fixed-reference ECDF p-values, bet corrected by the DKW band width.
``standard``
    growing-pool randomized conformal p-values, no band correction.
``invalid``
    fixed-reference randomized p-values with no correction. Only useful to
    show what goes wrong without the correction; it does not control type-I
    error.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from .betting import BetContext, apply_clip, bet_g
from .ecdf import (
    GrowingPool,
    ReferenceSet,
    build_reference,
    pvalue_fixed,
    pvalue_fixed_randomized,
    pvalue_pooled_randomized,
)
from .ons import OnsState, ons_init, ons_update

CONDITIONAL = "conditional"
STANDARD = "standard"
INVALID = "invalid"
VARIANTS = (CONDITIONAL, STANDARD, INVALID)

CONTINUE = "continue"
REJECT = "reject"

_LOG_FLOAT_MAX = math.log(sys.float_info.max)


@dataclass(frozen=True)
class DetectorConfig:
    alpha: float = 0.05
    delta: float = 0.1
    k: float = 1e-6
    clip: float = 0.1
    variant: str = CONDITIONAL
    warmup: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.k > 0.0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if self.clip < 0.0:
            raise ValueError(f"clip must be >= 0, got {self.clip}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")

    @property
    def threshold(self) -> float:
        return 1.0 / self.alpha

    @property
    def log_threshold(self) -> float:
        return -math.log(self.alpha)


def bet_context_for(ref: ReferenceSet, cfg: DetectorConfig) -> BetContext:
    """Betting parameters of a variant: only the conditional one pays for the band."""
    if cfg.variant == CONDITIONAL:
        return BetContext(k=cfg.k, eps_max=ref.eps_max, clip=cfg.clip)
    return BetContext(k=0.0, eps_max=0.0, clip=cfg.clip)


@dataclass(frozen=True)
class StepOutcome:
    t: int
    p_value: float
    eta: float  # parameter actually bet with; 0 when no bet was placed
    bet_factor: float
    wealth: float
    decision: str


class Detector:
    """Sequential shift detector; feed scores one at a time with :meth:`step`.

    The wealth is kept in log space so long runs cannot overflow; the
    exposed :attr:`wealth` saturates at the largest finite float.
    """

    def __init__(self, ref_samples, cfg: DetectorConfig, seed=0):
        self.cfg = cfg
        self.ref = ref_samples if isinstance(ref_samples, ReferenceSet) else build_reference(ref_samples, cfg.delta)
        self.ctx = bet_context_for(self.ref, cfg)
        self.pool = GrowingPool(self.ref) if cfg.variant == STANDARD else None
        self.rng = np.random.default_rng(seed)
        self.ons: OnsState = ons_init()
        self.log_wealth = 0.0
        self.t = 0
        self.rejected_at: int | None = None

    @property
    def wealth(self) -> float:
        if self.log_wealth >= _LOG_FLOAT_MAX:
            return sys.float_info.max
        return math.exp(self.log_wealth)

    @property
    def rejected(self) -> bool:
        return self.rejected_at is not None

    def band(self) -> float:
        return self.ref.band() if self.cfg.variant == CONDITIONAL else 0.0

    def _pvalue(self, x: float) -> float:
        variant = self.cfg.variant
        if variant == CONDITIONAL:
            return float(pvalue_fixed(self.ref, x))
        u = self.rng.random()
        if variant == STANDARD:
            self.pool.insert(x)
            return float(pvalue_pooled_randomized(self.pool, x, u))
        return float(pvalue_fixed_randomized(self.ref, x, u))

    def step(self, x: float) -> StepOutcome:
        if math.isnan(x):
            raise ValueError("score must not be NaN")
        self.t += 1
        p = self._pvalue(x)
        eps = self.band()

        eta_bet = apply_clip(self.ons.eta, self.ctx.clip)
        if self.t <= self.cfg.warmup or eta_bet == 0.0:
            eta_bet, factor = 0.0, 1.0
        else:
            g = bet_g(p, eta_bet, eps, self.ctx)
            factor = float(1.0 + g)
            self.log_wealth += float(np.log1p(g))

        if self.rejected_at is None and self.log_wealth >= self.cfg.log_threshold:
            self.rejected_at = self.t
        # learner follows its own unclipped parameter
        self.ons = ons_update(self.ons, p, eps, self.ctx)
        return StepOutcome(
            t=self.t,
            p_value=p,
            eta=float(eta_bet),
            bet_factor=factor,
            wealth=self.wealth,
            decision=REJECT if self.rejected else CONTINUE,
        )

    def run(self, stream, stop_on_reject: bool = False) -> list[StepOutcome]:
        out = []
        for x in stream:
            out.append(self.step(float(x)))
            if stop_on_reject and self.rejected:
                break
        return out


def detector_init(ref_samples, cfg: DetectorConfig, seed=0) -> Detector:
    return Detector(ref_samples, cfg, seed)


def detector_step(state: Detector, x: float) -> StepOutcome:
    return state.step(x)
