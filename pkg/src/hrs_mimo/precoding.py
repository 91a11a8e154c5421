"""Two-tier precoders and the common-message beamformers of hierarchical rate splitting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel_model import ChannelDraw, GroupStatistics, check_sum_rank, eigendecompose
from .errors import DegenerateChannelError, InvalidConfigurationError

NULL_SINGULAR_TOL = 1e-8
DEGENERATE_TOL = 1e-14


def _herm(X):
    return X.conj().T


@dataclass(frozen=True)
class PowerSplit:
    """Power-splitting ratios and total transmit power.

    ``beta`` is the fraction of ``P`` given to the groups (inner common plus
    private messages), the rest feeds the outer common message. Within a
    group, ``alpha`` is the fraction given to the private messages.
    """

    alpha: float
    beta: float
    P: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0 and 0.0 < self.beta <= 1.0):
            raise InvalidConfigurationError(
                f"power-splitting ratios must lie in (0, 1], got alpha={self.alpha}, beta={self.beta}"
            )
        if self.P < 0:
            raise InvalidConfigurationError(f"total power must be nonnegative, got {self.P}")

    @property
    def p_oc(self) -> float:
        return self.P * (1.0 - self.beta)

    def p_ic(self, G: int) -> float:
        return self.P * self.beta * (1.0 - self.alpha) / G

    def p_private(self, G: int, K_g: int) -> float:
        return self.P * self.beta * self.alpha / (G * K_g)

    def total(self, group_sizes: Sequence[int]) -> float:
        G = len(group_sizes)
        return self.p_oc + sum(self.p_ic(G) + K_g * self.p_private(G, K_g) for K_g in group_sizes)


def build_outer_precoder(stats: Sequence[GroupStatistics], g: int, b_g: int) -> np.ndarray:
    """Statistical outer precoder of group ``g``.

    Projects onto the null space of the other groups' dominant eigenvectors
    and keeps the ``b_g`` strongest eigenmodes of the projected covariance.

    Parameters
    ----------
    stats : sequence of GroupStatistics
        Statistics of all groups.
    g : int
        Group index (0-based).
    b_g : int
        Number of columns of the precoder.

    Returns
    -------
    numpy.ndarray
        (M, b_g) matrix with orthonormal columns.
    """
    check_sum_rank(stats)
    M = stats[0].M
    others = [s for l, s in enumerate(stats) if l != g]
    r_others = sum(s.dominant_rank for s in others)
    n_null = M - r_others
    if b_g > n_null:
        raise InvalidConfigurationError(
            f"b_g <= M - sum_(l!=g) r^d_l violated for group {g}: {b_g} > {n_null}"
        )
    if b_g > stats[g].dominant_rank:
        raise InvalidConfigurationError(
            f"b_g <= r^d_g violated for group {g}: {b_g} > {stats[g].dominant_rank}"
        )
    if b_g < 1:
        raise InvalidConfigurationError(f"b_g must be positive, got {b_g}")

    if r_others == 0:
        E0 = np.eye(M, dtype=complex)
    else:
        U_others = np.hstack([s.U_dominant for s in others])
        L, sv, _ = np.linalg.svd(U_others, full_matrices=True)
        n_vanishing = M - int(np.count_nonzero(sv >= NULL_SINGULAR_TOL))
        if n_vanishing != n_null:
            raise InvalidConfigurationError(
                f"group {g}: {n_vanishing} vanishing singular values of the other groups' "
                f"dominant eigenvectors, expected M - sum r^d_l = {n_null}"
            )
        E0 = L[:, M - n_null :]

    R_proj = _herm(E0) @ stats[g].R @ E0
    F, lam, rank = eigendecompose(R_proj)
    if rank < b_g:
        raise InvalidConfigurationError(
            f"projected covariance of group {g} has rank {rank} < b_g = {b_g}"
        )
    return E0 @ F[:, :b_g]


def build_outer_precoders(stats: Sequence[GroupStatistics], b: Sequence[int]) -> list:
    return [build_outer_precoder(stats, g, b_g) for g, b_g in enumerate(b)]


def rzf_inner_precoder(H_eff_hat: np.ndarray, B: np.ndarray, eps: float):
    """Regularized zero-forcing on the estimated effective channel.

    ``W = xi (H H^H + b_g eps I)^{-1} H`` with ``xi`` chosen so that
    ``trace(W^H B^H B W) = K_g``.

    Returns
    -------
    W : numpy.ndarray
        (b_g, K_g) inner precoder including the scaling.
    xi : float
    """
    if not eps > 0:
        raise InvalidConfigurationError(f"regularization must be positive, got {eps}")
    b_g, K_g = H_eff_hat.shape
    gram = H_eff_hat @ _herm(H_eff_hat) + b_g * eps * np.eye(b_g)
    V = np.linalg.solve(gram, H_eff_hat)
    BV = B @ V
    norm2 = np.real(np.vdot(BV, BV))
    if norm2 < DEGENERATE_TOL:
        raise DegenerateChannelError("RZF normalization trace vanished")
    xi = float(np.sqrt(K_g / norm2))
    return xi * V, xi


def outer_common_precoder(B_list, H_eff_hat_list, weights=None) -> np.ndarray:
    """Matched beamformer summing all users' reconstructed effective channels.

    ``weights`` (one per user, in group order) default to equal weighting.
    The result has unit norm.
    """
    H_tilde = np.hstack([B @ Hh for B, Hh in zip(B_list, H_eff_hat_list)])
    if H_tilde.shape[1] == 0:
        raise InvalidConfigurationError("outer common precoder needs at least one user")
    if weights is None:
        v = H_tilde.sum(axis=1)
    else:
        v = H_tilde @ np.asarray(weights)
    nrm = np.linalg.norm(v)
    if nrm < DEGENERATE_TOL:
        raise DegenerateChannelError("outer common beamformer sums to zero")
    return v / nrm


def inner_common_precoder(W: np.ndarray, B: np.ndarray, weights=None):
    """Equally weighted combination of the group's private precoders.

    Returns ``(w_ic, zeta)`` with ``||B w_ic|| = 1``.
    """
    K_g = W.shape[1]
    if K_g < 1:
        raise InvalidConfigurationError("inner common precoder needs at least one user")
    q = W.mean(axis=1) if weights is None else W @ np.asarray(weights) / K_g
    Bq = B @ q
    norm2 = np.real(np.vdot(Bq, Bq))
    if norm2 < DEGENERATE_TOL:
        raise DegenerateChannelError("inner common beamformer vanished")
    zeta = float(1.0 / np.sqrt(norm2))
    return zeta * q, zeta


@dataclass(frozen=True)
class PrecoderSet:
    """All precoders for one channel draw."""

    B: list
    W: list
    w_ic: list
    w_oc: np.ndarray
    xi: tuple
    zeta_ic: tuple
    eps: float


def regularization(K: int, b_total: int, P: float) -> float:
    """RZF regularization ``K / (b P)`` with ``b`` the sum of outer precoder widths."""
    return K / (b_total * P)


def build_precoders(draw: ChannelDraw, B_list, eps: float) -> PrecoderSet:
    """Construct inner, inner-common and outer-common precoders for ``draw``."""
    H_eff_hat = [_herm(B) @ Hh for B, Hh in zip(B_list, draw.H_hat)]
    Ws, xis, w_ics, zetas = [], [], [], []
    for B, Hh in zip(B_list, H_eff_hat):
        W, xi = rzf_inner_precoder(Hh, B, eps)
        w_ic, zeta = inner_common_precoder(W, B)
        Ws.append(W)
        xis.append(xi)
        w_ics.append(w_ic)
        zetas.append(zeta)
    w_oc = outer_common_precoder(B_list, H_eff_hat)
    return PrecoderSet(list(B_list), Ws, w_ics, w_oc, tuple(xis), tuple(zetas), eps)


def hrs_transmit_power(precoders: PrecoderSet, split: PowerSplit) -> float:
    """Expected ``||x||^2`` of the HRS signal for unit-power independent symbols."""
    G = len(precoders.B)
    total = split.p_oc * np.linalg.norm(precoders.w_oc) ** 2
    for B, W, w_ic in zip(precoders.B, precoders.W, precoders.w_ic):
        K_g = W.shape[1]
        total += split.p_ic(G) * np.linalg.norm(B @ w_ic) ** 2
        total += split.p_private(G, K_g) * np.linalg.norm(B @ W) ** 2
    return float(total)


def ttp_transmit_power(precoders: PrecoderSet, P: float) -> float:
    K = sum(W.shape[1] for W in precoders.W)
    return float(sum(P / K * np.linalg.norm(B @ W) ** 2 for B, W in zip(precoders.B, precoders.W)))
