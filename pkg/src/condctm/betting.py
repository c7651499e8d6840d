"""Robust smoothed betting function and wealth clipping.

The bet placed on a p-value ``p`` with parameter ``eta`` and band half-width
``eps`` is ``1 + g`` where

    g = C * (eta * (p - 0.5) - sqrt(eta**2 + k**2) * eps)

and ``C = 1 / (0.5 + sqrt(1 + k**2) * eps_max)`` keeps the bet in [0, 2]. With
``eta`` restricted to [-1/2, 1/2] the bet actually stays in [1/2, 3/2].

All functions accept numpy arrays as well as scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ETA_MAX = 0.5


def _check_eta(eta) -> None:
    if np.any(np.abs(eta) > ETA_MAX):
        raise ValueError(f"eta must lie in [-{ETA_MAX}, {ETA_MAX}]")


def scaling_constant(eps_max: float, k: float) -> float:
    if not 0.0 <= eps_max <= 1.0:
        raise ValueError(f"eps_max must lie in [0, 1], got {eps_max}")
    if not k >= 0.0:
        raise ValueError(f"k must be >= 0, got {k}")
    return 1.0 / (0.5 + math.sqrt(1.0 + k * k) * eps_max)


@dataclass(frozen=True)
class BetContext:
    """Parameters shared by every bet of one detector.

    ``k = 0`` gives the unsmoothed bet; it is used by the baselines, where
    ``eps`` is identically zero, and by analysis code.
    """

    k: float = 1e-6
    eps_max: float = 0.0
    clip: float = 0.0
    scale_c: float = field(init=False)

    def __post_init__(self):
        if self.clip < 0:
            raise ValueError(f"clip must be >= 0, got {self.clip}")
        object.__setattr__(self, "scale_c", scaling_constant(self.eps_max, self.k))


def _smooth_abs(eta, k):
    return np.sqrt(eta * eta + k * k)


def bet_g(p_hat, eta, eps, ctx: BetContext):
    """Centered bet ``g``; the wealth factor is ``1 + g``."""
    _check_eta(eta)
    return ctx.scale_c * (eta * (p_hat - 0.5) - _smooth_abs(eta, ctx.k) * eps)


def bet_gradient(p_hat, eta, eps, ctx: BetContext):
    """Derivative of :func:`bet_g` with respect to ``eta``.

    At ``k = 0`` the ratio ``eta / |eta|`` is taken as ``sign(eta)``, which is
    0 at ``eta = 0``.
    """
    _check_eta(eta)
    if ctx.k == 0.0:
        ratio = np.sign(eta)
    else:
        ratio = eta / _smooth_abs(eta, ctx.k)
    return ctx.scale_c * (p_hat - 0.5 - ratio * eps)


def bet_loss(p_hat, eta, eps, ctx: BetContext):
    """Negative log of the bet, the learner's per-step loss."""
    return -np.log1p(bet_g(p_hat, eta, eps, ctx))


def apply_clip(eta, clip: float):
    """Zero out betting parameters whose magnitude is below ``clip``."""
    if np.ndim(eta) == 0:
        return 0.0 if abs(eta) < clip else eta
    eta = np.asarray(eta, dtype=float)
    return np.where(np.abs(eta) < clip, 0.0, eta)
