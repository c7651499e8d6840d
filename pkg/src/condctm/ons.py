"""One-dimensional Online Newton Step for the betting parameter."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .betting import ETA_MAX, BetContext, bet_g, bet_gradient, bet_loss


@dataclass(frozen=True)
class OnsState:
    eta: float = 0.0
    a: float = 1.0
    t: int = 0
    z: float = 0.0  # last scaled gradient, kept for diagnostics


def ons_init() -> OnsState:
    return OnsState()


def ons_step(eta, a, p_hat, eps, ctx: BetContext):
    """One ONS recursion on raw values; works elementwise on arrays.

    Returns ``(eta_next, a_next, z)``.
    """
    g = bet_g(p_hat, eta, eps, ctx)
    one_plus_g = 1.0 + g
    # C scaling keeps 1 + g >= 1/2 on the admissible eta range
    assert np.all(one_plus_g > 0.0), "bet factor must stay positive"
    z = bet_gradient(p_hat, eta, eps, ctx) / one_plus_g
    a_next = a + z * z
    eta_next = np.clip(eta + 4.0 * z / a_next, -ETA_MAX, ETA_MAX)
    return eta_next, a_next, z


def ons_update(state: OnsState, p_hat: float, eps: float, ctx: BetContext) -> OnsState:
    eta, a, z = ons_step(state.eta, state.a, p_hat, eps, ctx)
    return OnsState(eta=float(eta), a=float(a), t=state.t + 1, z=float(z))


def cumulative_loss(etas, p_hats, eps, ctx: BetContext) -> float:
    """Sum of negative-log-bet losses of a prediction sequence."""
    return float(np.sum(bet_loss(np.asarray(p_hats), np.asarray(etas), eps, ctx)))


def regret_against(etas, p_hats, eps, ctx: BetContext, benchmark: float) -> float:
    """Regret of the played ``etas`` against a fixed ``benchmark`` parameter.

    This equals ``log S_T(benchmark) - log S_T(etas)`` exactly.
    """
    p_hats = np.asarray(p_hats, dtype=float)
    fixed = np.full_like(p_hats, benchmark)
    return cumulative_loss(etas, p_hats, eps, ctx) - cumulative_loss(fixed, p_hats, eps, ctx)


def run_ons(p_hats, eps, ctx: BetContext) -> np.ndarray:
    """Return the parameters ``eta_1..eta_T`` ONS plays on a p-value sequence."""
    p_hats = np.asarray(p_hats, dtype=float)
    etas = np.empty(p_hats.size)
    eps = np.broadcast_to(eps, p_hats.shape)
    eta, a = 0.0, 1.0
    for t in range(p_hats.size):
        etas[t] = eta
        eta, a, _ = ons_step(eta, a, p_hats[t], eps[t], ctx)
    return etas
