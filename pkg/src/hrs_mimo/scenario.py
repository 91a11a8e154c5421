"""Long-term (statistical) part of a simulation scenario."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel_model import (
    DEFAULT_QUADRATURE_NODES,
    DEFAULT_RANK_TOL,
    AntennaArray,
    GroupStatistics,
    build_uca,
    check_sum_rank,
    group_statistics,
)
from .errors import InvalidConfigurationError
from .precoding import build_outer_precoders


def default_azimuths(G: int) -> list:
    """Group azimuths ``-pi/2 + g pi/3`` for ``g = 0..G-1``."""
    return [-np.pi / 2 + g * np.pi / 3 for g in range(G)]


@dataclass(frozen=True)
class Scenario:
    """Group statistics together with the outer precoders derived from them."""

    array: AntennaArray
    stats: tuple
    B: tuple
    group_sizes: tuple

    @property
    def G(self) -> int:
        return len(self.stats)

    @property
    def K(self) -> int:
        return sum(self.group_sizes)

    @property
    def M(self) -> int:
        return self.array.M

    @property
    def b(self) -> tuple:
        return tuple(B.shape[1] for B in self.B)

    @property
    def b_total(self) -> int:
        return sum(self.b)

    @property
    def tau2(self) -> float:
        """Common CSIT error; raises if the groups disagree."""
        values = {s.tau2 for s in self.stats}
        if len(values) != 1:
            raise InvalidConfigurationError(
                "the large-system analysis assumes equal CSIT error in every group"
            )
        return values.pop()

    def reduced_covariances(self) -> np.ndarray:
        """``Rbar[g, l] = B_l^H R_g B_l``; requires equal outer-precoder widths."""
        if len(set(self.b)) != 1:
            raise InvalidConfigurationError("reduced covariances need equal b_g in every group")
        return np.array([[B.conj().T @ s.R @ B for B in self.B] for s in self.stats])


def make_scenario(
    stats: Sequence[GroupStatistics],
    group_sizes: Sequence[int],
    b: Sequence[int],
    array: AntennaArray | None = None,
) -> Scenario:
    check_sum_rank(stats)
    if len(stats) != len(group_sizes) or len(stats) != len(b):
        raise InvalidConfigurationError("group sizes and outer widths must be given per group")
    for g, (K_g, b_g) in enumerate(zip(group_sizes, b)):
        if K_g < 1:
            raise InvalidConfigurationError(f"group {g} has no users")
        if K_g > b_g:
            raise InvalidConfigurationError(f"K_g <= b_g violated for group {g}: {K_g} > {b_g}")
    B = build_outer_precoders(stats, b)
    if array is None:
        array = AntennaArray(np.zeros((stats[0].M, 2)))
    return Scenario(array, tuple(stats), tuple(B), tuple(int(k) for k in group_sizes))


def one_ring_scenario(
    M: int,
    G: int,
    K_per_group: int,
    b: int,
    dominant_rank: int,
    tau2: float,
    spread: float,
    azimuths: Sequence[float] | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
) -> Scenario:
    """Uniform circular array serving ``G`` equal groups of one-ring users."""
    array = build_uca(M)
    if azimuths is None:
        azimuths = default_azimuths(G)
    if len(azimuths) != G:
        raise InvalidConfigurationError(f"need {G} azimuths, got {len(azimuths)}")
    stats = [
        group_statistics(array, theta, spread, dominant_rank, tau2, rank_tol, n_nodes)
        for theta in azimuths
    ]
    return make_scenario(stats, [K_per_group] * G, [b] * G, array)
