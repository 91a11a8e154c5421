"""Closed-form and grid-search power splitting between common and private messages."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import det_equiv
from .errors import InvalidConfigurationError
from .precoding import PowerSplit


@dataclass(frozen=True)
class InterferenceSummary:
    """Inter-group (``gamma_og``) and intra-group (``gamma_ig``) interference levels.

    The per-group arrays hold the values before the minimum over groups.
    """

    gamma_og: float
    gamma_ig: float
    og_per_group: np.ndarray
    ig_per_group: np.ndarray


def _checked_inverse(R, g):
    if np.linalg.cond(R) > 1e12:
        raise InvalidConfigurationError(
            f"reduced covariance of group {g} is singular; b_g exceeds its effective rank"
        )
    return np.linalg.inv(R)


def interference_summary(Rbar, tau2: float, G: int, K_bar: int, b_bar: int) -> InterferenceSummary:
    Rbar = np.asarray(Rbar)
    inv = [_checked_inverse(Rbar[l, l], l) for l in range(G)]
    tr_inv = np.array([np.real(np.trace(Ri)) for Ri in inv])
    og = np.array([
        sum(np.real(np.trace(Rbar[g, l] @ inv[l])) / tr_inv[l] for l in range(G) if l != g) / G
        for g in range(G)
    ])
    ig = tau2 / G * b_bar / tr_inv * (K_bar - 1) / K_bar
    return InterferenceSummary(float(og.min()), float(ig.min()), og, ig)


def weak_regime_split(summary: InterferenceSummary, P: float, K_bar: int):
    """``(alpha, beta)`` when inter-group interference is negligible."""
    if summary.gamma_ig == 0:
        return 1.0, 1.0
    return min(K_bar / (P * summary.gamma_ig), 1.0), 1.0


def strong_regime_split(summary: InterferenceSummary, P: float, K: int, K_bar: int):
    """``(alpha, beta)`` when inter-group interference dominates."""
    return 1.0, min(K / (P * summary.gamma_og + K_bar), 1.0)


def closed_form_split(summary: InterferenceSummary, P: float, K: int, K_bar: int) -> PowerSplit:
    """Combined heuristic: alpha from the weak regime, beta from the strong one.

    alpha falls back to 1 whenever beta < 1.
    """
    if not P > 0:
        raise InvalidConfigurationError(f"total power must be positive, got {P}")
    alpha, _ = weak_regime_split(summary, P, K_bar)
    _, beta = strong_regime_split(summary, P, K, K_bar)
    if beta < 1.0:
        alpha = 1.0
    return PowerSplit(alpha, beta, P)


def split_grid(step: float) -> np.ndarray:
    """Ratios ``step, 2 step, ...`` below 1, followed by 1 itself."""
    if not 0 < step <= 0.5:
        raise InvalidConfigurationError(f"grid step must lie in (0, 0.5], got {step}")
    n = int(np.floor(1.0 / step + 1e-9))
    values = np.arange(1, n + 1) * step
    values = values[values < 1.0 - 1e-9]
    return np.append(values, 1.0)


def argmax_split(values: np.ndarray, grid: np.ndarray):
    """Best ``(alpha, beta)`` of ``values[i_alpha, i_beta]``.

    Ties go to the larger alpha, then the larger beta.
    """
    best = np.max(values)
    ia, ib = np.nonzero(values == best)
    top = ia.max()
    return float(grid[top]), float(grid[ib[ia == top].max()])


def grid_search(objective: Callable, step: float = 0.01):
    """Maximize ``objective(alpha, beta)`` (vectorized over meshgrids) on the ratio grid."""
    grid = split_grid(step)
    A, Bt = np.meshgrid(grid, grid, indexing="ij")
    values = np.asarray(objective(A, Bt), dtype=float)
    return argmax_split(values, grid)


def exhaustive_split(
    scenario,
    P: float,
    grid_step: float = 0.01,
    objective: str = "asymptotic",
    n_draws: int = 500,
    base_seed: int = 0,
) -> PowerSplit:
    """Grid search for the sum-rate maximizing split.

    ``objective="asymptotic"`` scores each grid point by the deterministic
    equivalent of the HRS sum rate. ``"monte_carlo"`` averages the simulated
    sum rate over ``n_draws`` fixed channel draws.
    """
    if objective == "asymptotic":
        de = det_equiv.det_equiv_for(scenario, P)

        def score(a, b):
            return sum(det_equiv.hrs_rate_components(de, a, b))

    elif objective == "monte_carlo":
        from .rate_mc import draw_precoders, hrs_gains, mean_sum_rate_grid

        gains = [hrs_gains(*draw_precoders(scenario, i, base_seed, P)) for i in range(n_draws)]

        def score(a, b):
            return mean_sum_rate_grid(gains, a, b, P)

    else:
        raise InvalidConfigurationError(f"unknown objective {objective!r}")
    alpha, beta = grid_search(score, grid_step)
    return PowerSplit(alpha, beta, P)


def det_equiv_interference_summary(de) -> InterferenceSummary:
    """Interference levels read off the deterministic equivalents.

    ``gamma_ig`` is the intra-group term ``xi_g^2 Upsilon_gg Omega_g / P`` and
    ``gamma_og`` the inter-group term ``sum_{l!=g} xi_l^2 Upsilon_gl / P``,
    each minimized over groups. Both are constant in ``P`` at high SNR and
    coincide with :func:`interference_summary` when the reduced covariances
    are scaled identities.
    """
    weighted = de.Upsilon * de.xi2[None, :]
    own = np.diagonal(weighted)
    ig = own * de.Omega / de.P
    og = (weighted.sum(axis=1) - own) / de.P
    return InterferenceSummary(float(og.min()), float(ig.min()), og, ig)
