"""Instantaneous SINRs and rates of HRS and the baseline schemes, plus Monte Carlo averaging."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel_model import ChannelDraw, draw_seed, sample_draw
from .errors import InvalidConfigurationError
from .precoding import PowerSplit, PrecoderSet, build_precoders, regularization

SCHEMES = ("hrs", "ttp", "baseline2", "baseline3")


def _herm(X):
    return X.conj().T


def _group_index(group_sizes) -> np.ndarray:
    return np.repeat(np.arange(len(group_sizes)), group_sizes)


def _split_groups(values: np.ndarray, group_sizes) -> list:
    return np.split(np.asarray(values), np.cumsum(group_sizes)[:-1], axis=-1)


@dataclass(frozen=True)
class HrsGains:
    """Squared beamforming gains of one draw, users flattened in group order.

    ``private[k, j] = |h_k^H B_g(j) w_j|^2``, ``inner[k, l] = |h_k^H B_l w_ic,l|^2``
    and ``outer[k] = |h_k^H w_oc|^2``.
    """

    private: np.ndarray
    inner: np.ndarray
    outer: np.ndarray
    group_sizes: tuple

    @property
    def group_index(self) -> np.ndarray:
        return _group_index(self.group_sizes)


def private_gains(draw: ChannelDraw, B_list, W_list) -> np.ndarray:
    H = np.hstack(draw.H)
    return np.hstack([np.abs(_herm(B @ W) @ H).T ** 2 for B, W in zip(B_list, W_list)])


def hrs_gains(draw: ChannelDraw, precoders: PrecoderSet) -> HrsGains:
    H = np.hstack(draw.H)
    private = private_gains(draw, precoders.B, precoders.W)
    inner = np.column_stack(
        [np.abs(_herm(H) @ (B @ w)) ** 2 for B, w in zip(precoders.B, precoders.w_ic)]
    )
    outer = np.abs(_herm(H) @ precoders.w_oc) ** 2
    return HrsGains(private, inner, outer, draw.group_sizes)


def _private_sinr(private, p_priv, extra=0.0):
    own = p_priv * np.diagonal(private)
    cross = private - np.diag(np.diagonal(private))
    return own / (extra + p_priv @ cross.T + 1.0)


def sinrs_from_gains(gains: HrsGains, p_oc, p_ic, p_priv):
    """HRS SINRs for given per-message powers.

    Parameters
    ----------
    gains : HrsGains
    p_oc : float or array (...,)
        Outer common power.
    p_ic : array (..., G)
        Inner common power per group.
    p_priv : array (..., K)
        Private power per user.

    Returns
    -------
    tuple of arrays (..., K)
        ``(gamma_oc, gamma_ic, gamma_p)``.
    """
    gid = gains.group_index
    K = gid.size
    own_mask = np.zeros_like(gains.inner, dtype=bool)
    own_mask[np.arange(K), gid] = True
    p_ic = np.asarray(p_ic, dtype=float)
    p_priv = np.asarray(p_priv, dtype=float)
    own_ic = p_ic[..., gid] * gains.inner[own_mask]
    other_ic = p_ic @ np.where(own_mask, 0.0, gains.inner).T
    own_p = p_priv * np.diagonal(gains.private)
    cross = gains.private - np.diag(np.diagonal(gains.private))
    other_p = p_priv @ cross.T
    gamma_p = own_p / (other_ic + other_p + 1.0)
    gamma_ic = own_ic / (other_ic + own_p + other_p + 1.0)
    gamma_oc = np.asarray(p_oc, dtype=float)[..., None] * gains.outer / (
        own_ic + other_ic + own_p + other_p + 1.0
    )
    return gamma_oc, gamma_ic, gamma_p


def message_powers(split: PowerSplit, group_sizes):
    """``(p_oc, p_ic per group, p_private per user)`` for ``split``."""
    G = len(group_sizes)
    p_ic = np.full(G, split.p_ic(G))
    p_priv = np.concatenate([np.full(K_g, split.p_private(G, K_g)) for K_g in group_sizes])
    return split.p_oc, p_ic, p_priv


@dataclass(frozen=True)
class SinrTable:
    """Per-user SINRs, indexed ``[g][k]``."""

    gamma_oc: list
    gamma_ic: list
    gamma_p: list
    scheme: str = "hrs"


def sinr_table(gains: HrsGains, split: PowerSplit, scheme: str = "hrs") -> SinrTable:
    p_oc, p_ic, p_priv = message_powers(split, gains.group_sizes)
    sizes = gains.group_sizes
    g_oc, g_ic, g_p = sinrs_from_gains(gains, p_oc, p_ic, p_priv)
    return SinrTable(
        _split_groups(g_oc, sizes), _split_groups(g_ic, sizes), _split_groups(g_p, sizes), scheme
    )


def hrs_sinrs(draw: ChannelDraw, precoders: PrecoderSet, split: PowerSplit) -> SinrTable:
    return sinr_table(hrs_gains(draw, precoders), split)


@dataclass(frozen=True)
class RateReport:
    """Rates in bit/s/Hz. ``r_ic`` is per group, ``r_p`` per user (group order)."""

    r_oc: float
    r_ic: np.ndarray
    r_p: np.ndarray
    r_sum: float
    scheme: str
    n_draws: int = 1
    stderr: float = 0.0
    group_sizes: tuple = field(default=(), compare=False)

    @property
    def r_ic_total(self) -> float:
        return float(np.sum(self.r_ic))

    @property
    def r_p_total(self) -> float:
        return float(np.sum(self.r_p))


def _report(r_oc, r_ic, r_p, scheme, group_sizes) -> RateReport:
    r_ic = np.asarray(r_ic, dtype=float)
    r_p = np.asarray(r_p, dtype=float)
    r_sum = float(r_oc + r_ic.sum() + r_p.sum())
    return RateReport(float(r_oc), r_ic, r_p, r_sum, scheme, 1, 0.0, tuple(group_sizes))


def hrs_rates(table: SinrTable) -> RateReport:
    """Common rates are limited by the weakest user that must decode them."""
    sizes = tuple(len(g) for g in table.gamma_p)
    r_oc = np.log2(1.0 + min(float(np.min(g)) for g in table.gamma_oc))
    r_ic = [np.log2(1.0 + float(np.min(g))) for g in table.gamma_ic]
    r_p = np.log2(1.0 + np.concatenate(table.gamma_p))
    return _report(r_oc, r_ic, r_p, table.scheme, sizes)


def split_powers_grid(alpha, beta, P: float, group_sizes):
    """Per-message powers for flat arrays of ratios, shaped for :func:`sinrs_from_gains`."""
    alpha = np.asarray(alpha, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    G = len(group_sizes)
    p_oc = P * (1.0 - beta)
    p_ic = np.repeat((P * beta * (1.0 - alpha) / G)[:, None], G, axis=1)
    p_priv = np.concatenate(
        [np.repeat((P * beta * alpha / (G * K_g))[:, None], K_g, axis=1) for K_g in group_sizes], axis=1
    )
    return p_oc, p_ic, p_priv


def mean_sum_rate_grid(gains_list, alpha, beta, P: float):
    """Average HRS sum rate over ``gains_list`` for every ``(alpha, beta)`` pair."""
    shape = np.shape(alpha)
    powers = split_powers_grid(alpha, beta, P, gains_list[0].group_sizes)
    total = np.zeros(int(np.prod(shape)))
    for gains in gains_list:
        total += sum(hrs_rates_grid(gains, *powers))
    return (total / len(gains_list)).reshape(shape)


def hrs_rates_grid(gains: HrsGains, p_oc, p_ic, p_priv):
    """Vectorized HRS rates over a batch of power settings.

    Returns ``(r_oc, r_ic_total, r_p_total)``, each of the batch shape.
    """
    g_oc, g_ic, g_p = sinrs_from_gains(gains, p_oc, p_ic, p_priv)
    r_oc = np.log2(1.0 + g_oc.min(axis=-1))
    r_ic = sum(np.log2(1.0 + g.min(axis=-1)) for g in _split_groups(g_ic, gains.group_sizes))
    r_p = np.log2(1.0 + g_p).sum(axis=-1)
    return r_oc, r_ic, r_p


def ttp_rates(draw: ChannelDraw, B_list, W_list, P: float) -> RateReport:
    """Two-tier precoded broadcast with uniform power ``P/K`` per user."""
    sizes = draw.group_sizes
    K = sum(sizes)
    gamma = _private_sinr(private_gains(draw, B_list, W_list), np.full(K, P / K))
    return _report(0.0, np.zeros(len(sizes)), np.log2(1.0 + gamma), "ttp", sizes)


def ttp_rates_from_gains(gains: HrsGains, P: float) -> RateReport:
    K = len(gains.group_index)
    gamma = _private_sinr(gains.private, np.full(K, P / K))
    return _report(0.0, np.zeros(len(gains.group_sizes)), np.log2(1.0 + gamma), "ttp", gains.group_sizes)


def scheduled_rates(draw: ChannelDraw, B_list, P: float, level: str = "group") -> RateReport:
    """Single-user-per-group (``"group"``) or single-user (``"system"``) scheduling.

    Users are ranked by their estimated effective gain ``||B_g^H h_hat||``;
    ties go to the lowest index. The scheduled user is served by a matched
    beamformer on the estimated effective channel. Group-level scheduling
    splits ``P`` evenly across groups and keeps inter-group leakage as
    interference; system-level scheduling spends all of ``P`` on one user.
    """
    sizes = draw.group_sizes
    G = len(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    H = np.hstack(draw.H)
    eff_hat = [_herm(B) @ Hh for B, Hh in zip(B_list, draw.H_hat)]
    gains = [np.linalg.norm(E, axis=0) for E in eff_hat]
    r_p = np.zeros(sum(sizes))
    if level == "group":
        picks = [int(np.argmax(gn)) for gn in gains]
        beams = [B @ (E[:, k] / gn[k]) for B, E, gn, k in zip(B_list, eff_hat, gains, picks)]
        users = [offsets[g] + picks[g] for g in range(G)]
        amp = np.abs(_herm(H[:, users]) @ np.column_stack(beams)) ** 2  # [receiver, beam]
        p = P / G
        for g in range(G):
            signal = p * amp[g, g]
            interference = p * (amp[g].sum() - amp[g, g])
            r_p[users[g]] = np.log2(1.0 + signal / (interference + 1.0))
        scheme = "baseline2"
    elif level == "system":
        flat = np.concatenate(gains)
        u = int(np.argmax(flat))
        g = int(np.searchsorted(offsets, u, side="right") - 1)
        k = u - offsets[g]
        beam = B_list[g] @ (eff_hat[g][:, k] / gains[g][k])
        r_p[u] = np.log2(1.0 + P * np.abs(np.vdot(H[:, u], beam)) ** 2)
        scheme = "baseline3"
    else:
        raise InvalidConfigurationError(f"unknown scheduling level {level!r}")
    return _report(0.0, np.zeros(G), r_p, scheme, sizes)


def average_reports(reports: Sequence[RateReport]) -> RateReport:
    """Average per-draw reports in the given order."""
    if not reports:
        raise InvalidConfigurationError("nothing to average")
    n = len(reports)
    r_oc = float(np.mean([r.r_oc for r in reports]))
    r_ic = np.mean([r.r_ic for r in reports], axis=0)
    r_p = np.mean([r.r_p for r in reports], axis=0)
    sums = np.array([r.r_sum for r in reports])
    stderr = float(np.std(sums, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return RateReport(
        r_oc, r_ic, r_p, float(r_oc + r_ic.sum() + r_p.sum()), reports[0].scheme, n, stderr,
        reports[0].group_sizes,
    )


def draw_precoders(scenario, index: int, base_seed: int, P: float):
    """Channel draw ``index`` and its precoders at total power ``P``."""
    draw = sample_draw(scenario.stats, scenario.group_sizes, draw_seed(base_seed, index))
    eps = regularization(scenario.K, scenario.b_total, P)
    return draw, build_precoders(draw, scenario.B, eps)


def evaluate_draw(scenario, scheme: str, split: PowerSplit, index: int, base_seed: int) -> RateReport:
    draw, precoders = draw_precoders(scenario, index, base_seed, split.P)
    if scheme == "hrs":
        report = hrs_rates(hrs_sinrs(draw, precoders, split))
    elif scheme == "ttp":
        report = ttp_rates(draw, precoders.B, precoders.W, split.P)
    elif scheme == "baseline2":
        report = scheduled_rates(draw, scenario.B, split.P, "group")
    elif scheme == "baseline3":
        report = scheduled_rates(draw, scenario.B, split.P, "system")
    else:
        raise InvalidConfigurationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return report


def _evaluate_chunk(args):
    scenario, scheme, split, indices, base_seed = args
    return [evaluate_draw(scenario, scheme, split, i, base_seed) for i in indices]


def chunked(n: int, workers: int) -> list:
    """Split ``range(n)`` into contiguous index blocks, one or more per worker."""
    n_chunks = max(1, min(n, 4 * workers))
    return [list(c) for c in np.array_split(np.arange(n), n_chunks) if len(c)]


def monte_carlo(
    scenario,
    scheme: str,
    split: PowerSplit,
    n_draws: int,
    base_seed: int = 0,
    workers: int = 1,
) -> RateReport:
    """Average rate of ``scheme`` over ``n_draws`` independent channel draws.

    Draw ``i`` is seeded from ``(base_seed, i)`` so the result does not depend
    on ``workers``.
    """
    if n_draws < 1:
        raise InvalidConfigurationError(f"n_draws must be >= 1, got {n_draws}")
    if scheme not in SCHEMES:
        raise InvalidConfigurationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    chunks = chunked(n_draws, workers)
    tasks = [(scenario, scheme, split, c, base_seed) for c in chunks]
    if workers <= 1:
        results = [_evaluate_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_chunk, tasks))
    return average_reports([r for chunk in results for r in chunk])
