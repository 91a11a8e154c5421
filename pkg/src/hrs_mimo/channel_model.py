"""Antenna geometry, one-ring spatial covariance and correlated channel sampling.

All lengths are expressed in wavelengths (the carrier wavelength is 1).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidConfigurationError, InvalidInputError

DEFAULT_QUADRATURE_NODES = 200
DEFAULT_RANK_TOL = 1e-6


@dataclass(frozen=True)
class AntennaArray:
    """Planar antenna array; ``positions`` has shape (M, 2) in wavelengths."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise InvalidConfigurationError("positions must have shape (M, 2)")
        object.__setattr__(self, "positions", pos)

    @property
    def M(self) -> int:
        return self.positions.shape[0]


def uca_radius(M: int) -> float:
    """Radius (in wavelengths) giving half-wavelength spacing of adjacent elements."""
    step = 2 * np.pi / M
    return 0.5 / np.sqrt((1 - np.cos(step)) ** 2 + np.sin(step) ** 2)


def build_uca(M: int) -> AntennaArray:
    """Uniform circular array of ``M`` elements with adjacent spacing 0.5."""
    if M < 2:
        raise InvalidConfigurationError(f"UCA needs M >= 2 antennas, got M={M}")
    D = uca_radius(M)
    phi = 2 * np.pi * np.arange(M) / M
    return AntennaArray(D * np.column_stack([np.cos(phi), np.sin(phi)]))


def steering_vector(array: AntennaArray, theta: float) -> np.ndarray:
    """Plane-wave response ``exp(-j 2 pi psi(theta) . r_i)`` of every element."""
    wave = np.array([np.cos(theta), np.sin(theta)])
    return np.exp(-2j * np.pi * (array.positions @ wave))


def steering_covariance(array: AntennaArray, theta: float) -> np.ndarray:
    """Rank-one covariance ``v v^H``; the zero angular-spread limit of the one-ring model."""
    v = steering_vector(array, theta)
    return np.outer(v, v.conj())


def one_ring_covariance(
    array: AntennaArray,
    theta: float,
    spread: float,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
) -> np.ndarray:
    """One-ring spatial covariance of a user at azimuth ``theta``.

    Averages the plane-wave outer product uniformly over departure angles in
    ``[theta - spread, theta + spread]`` using Gauss-Legendre quadrature.

    Parameters
    ----------
    array : AntennaArray
        Transmit array geometry.
    theta : float
        Azimuth in radians.
    spread : float
        Half-width of the angular support in radians, must be positive.
    n_nodes : int
        Number of Gauss-Legendre nodes.

    Returns
    -------
    numpy.ndarray
        (M, M) Hermitian matrix with unit diagonal.
    """
    if not spread > 0:
        raise InvalidConfigurationError(f"angular spread must be positive, got {spread}")
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    angles = theta + spread * x
    # (1/(2*spread)) * spread * sum(w f) = sum(w f) / 2
    weights = w / 2.0
    waves = np.column_stack([np.cos(angles), np.sin(angles)])
    V = np.exp(-2j * np.pi * (waves @ array.positions.T))  # (n_nodes, M)
    R = (V.T * weights) @ V.conj()
    R = 0.5 * (R + R.conj().T)
    np.fill_diagonal(R, 1.0)
    return R


def eigendecompose(R: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL):
    """Eigen-decomposition of a Hermitian PSD matrix restricted to its numerical rank.

    Eigenvalues above ``rank_tol * max_eigenvalue`` are kept, sorted in
    descending order (ties keep their original order).

    Returns
    -------
    U : numpy.ndarray
        (M, r) orthonormal eigenvectors.
    eigenvalues : numpy.ndarray
        (r,) descending eigenvalues.
    r : int
        Numerical rank.
    """
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise InvalidInputError("covariance must be a square matrix")
    if np.max(np.abs(R - R.conj().T), initial=0.0) > 1e-8:
        raise InvalidInputError("covariance is not Hermitian")
    lam, vecs = np.linalg.eigh(0.5 * (R + R.conj().T))
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    vecs = vecs[:, order]
    if lam[0] <= 0:
        raise InvalidInputError("covariance has no positive eigenvalue")
    r = int(np.count_nonzero(lam > rank_tol * lam[0]))
    return vecs[:, :r], lam[:r].copy(), r


@dataclass(frozen=True)
class GroupStatistics:
    """Second-order statistics shared by every user of one group."""

    R: np.ndarray
    eigenvalues: np.ndarray
    U: np.ndarray
    dominant_rank: int
    theta: float = 0.0
    spread: float = 0.0
    tau2: float = 0.0

    def __post_init__(self):
        if not 0 <= self.dominant_rank <= self.rank:
            raise InvalidConfigurationError(
                f"dominant rank {self.dominant_rank} exceeds covariance rank {self.rank}"
            )
        if not 0.0 <= self.tau2 <= 1.0:
            raise InvalidConfigurationError(f"CSIT error tau^2={self.tau2} outside [0, 1]")

    @property
    def M(self) -> int:
        return self.R.shape[0]

    @property
    def rank(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def U_dominant(self) -> np.ndarray:
        return self.U[:, : self.dominant_rank]

    @property
    def tau(self) -> float:
        return float(np.sqrt(self.tau2))

    @property
    def sqrt_factor(self) -> np.ndarray:
        """``U diag(sqrt(eigenvalues))``, the Karhunen-Loeve synthesis matrix."""
        return self.U * np.sqrt(self.eigenvalues)


def group_statistics(
    array: AntennaArray,
    theta: float,
    spread: float,
    dominant_rank: int,
    tau2: float,
    rank_tol: float = DEFAULT_RANK_TOL,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
) -> GroupStatistics:
    R = one_ring_covariance(array, theta, spread, n_nodes)
    U, lam, _ = eigendecompose(R, rank_tol)
    return GroupStatistics(R, lam, U, dominant_rank, theta, spread, tau2)


def check_sum_rank(stats: Sequence[GroupStatistics]) -> None:
    """Raise if the dominant ranks of all groups do not fit in the array dimension."""
    M = stats[0].M
    if any(s.M != M for s in stats):
        raise InvalidConfigurationError("all groups must share the same antenna count")
    total = sum(s.dominant_rank for s in stats)
    if total > M:
        raise InvalidConfigurationError(f"sum of dominant ranks {total} exceeds M={M}")


@dataclass(frozen=True)
class ChannelDraw:
    """One channel realization: true and estimated channels for every group."""

    G: list
    Z: list
    H: list
    H_hat: list
    seed: object = field(default=None, compare=False)

    @property
    def group_sizes(self) -> tuple:
        return tuple(h.shape[1] for h in self.H)


def draw_seed(base_seed: int, index: int) -> np.random.SeedSequence:
    """Independent seed for Monte Carlo draw ``index`` of a run seeded by ``base_seed``."""
    return np.random.SeedSequence([int(base_seed), int(index)])


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def sample_draw(stats: Sequence[GroupStatistics], group_sizes: Sequence[int], seed) -> ChannelDraw:
    """Sample true channels and imperfect CSIT estimates for every group.

    The estimate of group ``g`` is ``U Lambda^{1/2} (sqrt(1 - tau^2) G + tau Z)``
    with ``Z`` independent of ``G``.
    """
    if len(stats) != len(group_sizes):
        raise InvalidConfigurationError("one group size per group is required")
    M = stats[0].M
    if any(s.M != M for s in stats):
        raise InvalidConfigurationError("all groups must share the same antenna count")
    rng = np.random.default_rng(seed)
    Gs, Zs, Hs, H_hats = [], [], [], []
    for s, K_g in zip(stats, group_sizes):
        Gg = _cn(rng, (s.rank, K_g))
        Zg = _cn(rng, (s.rank, K_g))
        A = s.sqrt_factor
        H = A @ Gg
        if s.tau2 == 0.0:
            H_hat = H.copy()
        else:
            H_hat = A @ (np.sqrt(1.0 - s.tau2) * Gg + s.tau * Zg)
        Gs.append(Gg)
        Zs.append(Zg)
        Hs.append(H)
        H_hats.append(H_hat)
    return ChannelDraw(Gs, Zs, Hs, H_hats, seed)


def export_covariance_csv(R: np.ndarray, path) -> None:
    """Write ``R`` row-major with each entry as a ``re,im`` column pair."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in np.asarray(R):
            cells = []
            for z in row:
                cells.extend((repr(float(z.real)), repr(float(z.imag))))
            writer.writerow(cells)


def read_covariance_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    data = np.asarray(rows)
    return data[:, 0::2] + 1j * data[:, 1::2]
