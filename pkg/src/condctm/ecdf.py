"""Empirical CDFs, conformal p-values and DKW confidence bands.

Three p-value constructions live here:

* ``pvalue_fixed``: plain ECDF of a fixed reference set, no randomization.
* ``pvalue_fixed_randomized``: tie-randomized conformal p-value against the
  fixed reference (marginally uniform, but dependent across calls).
* ``pvalue_pooled_randomized``: the classic growing-pool conformal p-value,
  i.i.d. uniform under exchangeability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from sortedcontainers import SortedList


def _check_finite(x) -> None:
    if np.any(np.isnan(x)):
        raise ValueError("score must not be NaN")


def _check_u(u) -> None:
    u = np.asarray(u)
    if np.any(np.isnan(u)) or np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("randomization variable u must lie in [0, 1]")


def dkw_epsilon(n: int, delta: float) -> float:
    """Half-width of the DKW band for ``n`` reference points, clamped to 1."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return min(1.0, math.sqrt(math.log(2.0 / delta) / (2.0 * n)))


@dataclass(frozen=True)
class ReferenceSet:
    """Sorted, immutable null reference scores with their DKW half-width."""

    scores: np.ndarray
    delta: float
    n: int = field(init=False)
    epsilon: float = field(init=False)

    def __post_init__(self):
        scores = np.sort(np.asarray(self.scores, dtype=float).ravel())
        if scores.size == 0:
            raise ValueError("reference set must be nonempty")
        _check_finite(scores)
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "n", int(scores.size))
        object.__setattr__(self, "epsilon", dkw_epsilon(scores.size, self.delta))

    def band(self, p_hat=None):
        """Band half-width at ``p_hat``. DKW is constant, so ``p_hat`` is ignored."""
        if p_hat is None or np.ndim(p_hat) == 0:
            return self.epsilon
        return np.full(np.shape(p_hat), self.epsilon)

    @property
    def eps_max(self) -> float:
        return self.epsilon


def build_reference(samples: Iterable[float], delta: float = 0.1) -> ReferenceSet:
    """Build a :class:`ReferenceSet` from raw null scores.

    Raises
    ------
    ValueError
        If ``samples`` is empty, contains NaN, or ``delta`` is outside (0, 1).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    arr = samples if isinstance(samples, np.ndarray) else list(samples)
    return ReferenceSet(np.asarray(arr, dtype=float), delta)


def ecdf_eval(ref: ReferenceSet, x):
    """Fraction of reference scores ``<= x``. Accepts scalars or arrays."""
    _check_finite(x)
    return np.searchsorted(ref.scores, x, side="right") / ref.n


def pvalue_fixed(ref: ReferenceSet, x):
    """Fixed-reference p-value, the ECDF of the reference evaluated at ``x``."""
    return ecdf_eval(ref, x)


def pvalue_fixed_randomized(ref: ReferenceSet, x, u):
    """Conformal p-value of ``x`` against the fixed reference, ties broken by ``u``.

    ``(#{X_i < x} + u * (1 + #{X_i = x})) / (n + 1)``; the ``+1`` accounts for
    the test point itself.
    """
    _check_finite(x)
    _check_u(u)
    lo = np.searchsorted(ref.scores, x, side="left")
    hi = np.searchsorted(ref.scores, x, side="right")
    return (lo + np.asarray(u) * (1 + hi - lo)) / (ref.n + 1)


class GrowingPool:
    """Multiset of scores that absorbs every test point (``D_0`` plus the stream)."""

    def __init__(self, initial: Iterable[float] | ReferenceSet):
        scores = initial.scores if isinstance(initial, ReferenceSet) else np.asarray(initial, float)
        self._pool = SortedList(float(s) for s in np.ravel(scores))
        self.initial_n = len(self._pool)

    def __len__(self) -> int:
        return len(self._pool)

    @property
    def size(self) -> int:
        return len(self._pool)

    @property
    def absorbed(self) -> int:
        return len(self._pool) - self.initial_n

    def insert(self, x: float) -> None:
        _check_finite(x)
        self._pool.add(float(x))

    def count_less(self, x: float) -> int:
        return self._pool.bisect_left(x)

    def count_equal(self, x: float) -> int:
        return self._pool.bisect_right(x) - self._pool.bisect_left(x)


def pvalue_pooled_randomized(pool: GrowingPool, x: float, u: float) -> float:
    """Randomized conformal p-value of ``x`` within ``pool``.

    ``x`` must already have been inserted, so it ties with itself at least once.
    """
    _check_finite(x)
    _check_u(u)
    if len(pool) == 0:
        raise ValueError("pool is empty; insert x before evaluating")
    return (pool.count_less(x) + u * pool.count_equal(x)) / len(pool)


def pooled_pvalue_path(ref: ReferenceSet, stream, u) -> np.ndarray:
    """Sequential pooled p-values for a whole stream, inserting each point first."""
    stream = np.asarray(stream, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_finite(stream)
    _check_u(u)
    sl = SortedList(ref.scores.tolist())
    out = np.empty(stream.size)
    # same arithmetic as pvalue_pooled_randomized, without per-step validation
    for t, (x, ut) in enumerate(zip(stream.tolist(), u.tolist())):
        sl.add(x)
        lo = sl.bisect_left(x)
        out[t] = (lo + ut * (sl.bisect_right(x) - lo)) / len(sl)
    return out
