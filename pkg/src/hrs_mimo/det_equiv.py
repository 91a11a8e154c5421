"""Large-system deterministic equivalents of the HRS and two-tier broadcast SINRs.

All groups are assumed to share ``K_bar`` users, outer width ``b_bar`` and
CSIT error ``tau2``. Quantities are built from the reduced covariances
``Rbar[g, l] = B_l^H R_g B_l``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InstabilityError, InvalidConfigurationError
from .precoding import PowerSplit


def _tr(X) -> float:
    return float(np.real(np.trace(X)))


def solve_fixed_point(Rbar, K_bar, b_bar, eps, tol=1e-12, max_iter=10_000, m0=1.0):
    """Solve ``m = tr(Rbar T)/b_bar`` with ``T = (K_bar/b_bar Rbar/(1+m) + eps I)^{-1}``.

    Plain fixed-point iteration started from ``m0``.

    Returns
    -------
    m : float
    T : numpy.ndarray
    """
    if not eps > 0:
        raise InvalidConfigurationError(f"regularization must be positive, got {eps}")
    Rbar = np.asarray(Rbar)
    eye = np.eye(Rbar.shape[0])
    m = float(m0)
    delta = np.inf
    for _ in range(max_iter):
        T = np.linalg.inv(K_bar / b_bar * Rbar / (1.0 + m) + eps * eye)
        m_new = _tr(Rbar @ T) / b_bar
        delta = abs(m_new - m)
        m = m_new
        if delta <= tol:
            T = np.linalg.inv(K_bar / b_bar * Rbar / (1.0 + m) + eps * eye)
            return m, 0.5 * (T + T.conj().T)
    raise ConvergenceError(
        f"fixed point did not converge in {max_iter} iterations (last change {delta:.3e})", delta
    )


def _stability_denominator(Rll, T, m, K_bar, b_bar):
    d = 1.0 - (K_bar / b_bar) * _tr(Rll @ T @ Rll @ T) / (b_bar * (1.0 + m) ** 2)
    if not d > 0:
        raise InstabilityError(f"derivative denominator {d:.3e} is not positive")
    return d


def derivative_terms(Rbar, T, m, K_bar, b_bar, BhB=None):
    """Derivative terms of the fixed point.

    Parameters
    ----------
    Rbar : array (G, G, b, b)
        Reduced covariances, ``Rbar[g, l] = B_l^H R_g B_l``.
    T : sequence of (b, b) arrays
        Converged resolvents per group.
    m : sequence of float
        Converged fixed points per group.
    BhB : sequence of (b, b) arrays, optional
        ``B_g^H B_g`` per group; identity when omitted.

    Returns
    -------
    m_prime : numpy.ndarray (G,)
    m_prime_cross : numpy.ndarray (G, G)
        ``m_prime_cross[g, l]`` couples group ``g``'s covariance through group ``l``'s precoder.
    """
    G = len(T)
    denom = [_stability_denominator(Rbar[l, l], T[l], m[l], K_bar, b_bar) for l in range(G)]
    m_prime = np.empty(G)
    cross = np.empty((G, G))
    for g in range(G):
        BB = np.eye(T[g].shape[0]) if BhB is None else BhB[g]
        m_prime[g] = _tr(Rbar[g, g] @ T[g] @ BB @ T[g]) / b_bar / denom[g]
        for l in range(G):
            cross[g, l] = _tr(Rbar[l, l] @ T[l] @ Rbar[g, l] @ T[l]) / b_bar / denom[l]
    return m_prime, cross


@dataclass(frozen=True)
class DetEquiv:
    """Deterministic-equivalent quantities of one scenario at one power level."""

    m: np.ndarray
    T: tuple
    m_prime: np.ndarray
    m_prime_cross: np.ndarray
    Psi: np.ndarray
    xi2: np.ndarray
    Phi: np.ndarray
    Upsilon: np.ndarray
    kappa: np.ndarray
    Omega: np.ndarray
    Rbar: np.ndarray
    K_bar: int
    b_bar: int
    eps: float
    tau2: float
    P: float
    G: int

    @property
    def K(self) -> int:
        return self.K_bar * self.G


def assemble_det_equiv(Rbar, K_bar, b_bar, eps, tau2, P, tol=1e-12, max_iter=10_000) -> DetEquiv:
    """Solve all fixed points and derive every quantity entering the asymptotic SINRs."""
    Rbar = np.asarray(Rbar)
    G = Rbar.shape[0]
    if Rbar.shape[:2] != (G, G) or Rbar.shape[2] != b_bar:
        raise InvalidConfigurationError("Rbar must have shape (G, G, b_bar, b_bar)")
    sols = [solve_fixed_point(Rbar[g, g], K_bar, b_bar, eps, tol, max_iter) for g in range(G)]
    m = np.array([s[0] for s in sols])
    T = tuple(s[1] for s in sols)
    m_prime, cross = derivative_terms(Rbar, T, m, K_bar, b_bar)
    Psi = K_bar / b_bar * m_prime / (1.0 + m) ** 2
    xi2 = K_bar / Psi
    Phi = (1.0 - tau2) * m**2 / (1.0 + m) ** 2
    Upsilon = P / G / b_bar * cross / (1.0 + m[None, :]) ** 2
    tr_own = np.array([_tr(Rbar[g, g]) for g in range(G)])
    kappa = tr_own**2 / (K_bar * tr_own.sum())
    Omega = (K_bar - 1) / K_bar * (1.0 - tau2 * (1.0 - (1.0 + m) ** 2)) / (1.0 + m) ** 2
    return DetEquiv(
        m, T, m_prime, cross, Psi, xi2, Phi, Upsilon, kappa, Omega, Rbar,
        int(K_bar), int(b_bar), float(eps), float(tau2), float(P), G,
    )


def det_equiv_for(scenario, P: float, **kw) -> DetEquiv:
    """Deterministic equivalent of an equal-group ``Scenario`` at power ``P``."""
    sizes = set(scenario.group_sizes)
    if len(sizes) != 1:
        raise InvalidConfigurationError("the large-system analysis needs equal group sizes")
    K_bar = sizes.pop()
    eps = scenario.K / (scenario.b_total * P)
    return assemble_det_equiv(
        scenario.reduced_covariances(), K_bar, scenario.b[0], eps, scenario.tau2, P, **kw
    )


@dataclass(frozen=True)
class AsymptoticRates:
    """Asymptotic per-group SINRs and sum rates; HRS fields are NaN when no split was given."""

    gamma_oc: np.ndarray
    gamma_ic: np.ndarray
    gamma_p: np.ndarray
    gamma_ttp: np.ndarray
    r_oc: float
    r_ic: float
    r_p: float
    r_sum: float
    r_sum_ttp: float
    delta_r: float


def _interference_terms(de: DetEquiv):
    """Inter-group term ``sum_{l!=g} xi_l^2 Upsilon_gl`` and intra-group ``xi_g^2 Upsilon_gg Omega_g``."""
    weighted = de.Upsilon * de.xi2[None, :]
    inter = weighted.sum(axis=1) - np.diagonal(weighted)
    intra = np.diagonal(weighted) * de.Omega
    return inter, intra


def ttp_sinrs(de: DetEquiv) -> np.ndarray:
    inter, intra = _interference_terms(de)
    return de.P / de.K * de.xi2 * de.Phi / (inter + intra + 1.0)


def hrs_sinrs(de: DetEquiv, alpha, beta):
    """Asymptotic HRS SINRs; ``alpha`` and ``beta`` may be arrays (broadcast against groups).

    Returns ``(gamma_oc, gamma_ic, gamma_p)`` with a trailing group axis.
    """
    alpha = np.asarray(alpha, dtype=float)[..., None]
    beta = np.asarray(beta, dtype=float)[..., None]
    inter, intra = _interference_terms(de)
    signal = de.P / de.K * de.xi2 * de.Phi
    gamma_oc = de.kappa * de.P * (1.0 - beta) * (1.0 - de.tau2) / (
        beta * (inter + intra + signal) + 1.0
    )
    gamma_ic = beta * (1.0 - alpha) * (intra + signal) / (
        beta * inter + beta * alpha * (intra + signal) + 1.0
    )
    gamma_p = beta * alpha * signal / (beta * inter + beta * alpha * intra + 1.0)
    return gamma_oc, gamma_ic, gamma_p


def hrs_rate_components(de: DetEquiv, alpha, beta):
    """``(R_oc, R_ic, R_p)`` for scalar or array ``alpha``, ``beta``."""
    g_oc, g_ic, g_p = hrs_sinrs(de, alpha, beta)
    r_oc = np.log2(1.0 + g_oc.min(axis=-1))
    r_ic = np.log2(1.0 + g_ic).sum(axis=-1)
    r_p = de.K_bar * np.log2(1.0 + g_p).sum(axis=-1)
    return r_oc, r_ic, r_p


def hrs_asymptotic_sinrs(de: DetEquiv, split: PowerSplit) -> AsymptoticRates:
    g_oc, g_ic, g_p = (np.asarray(x) for x in hrs_sinrs(de, split.alpha, split.beta))
    g_ttp = ttp_sinrs(de)
    r_oc = float(np.log2(1.0 + g_oc.min()))
    r_ic = float(np.log2(1.0 + g_ic).sum())
    r_p = float(de.K_bar * np.log2(1.0 + g_p).sum())
    r_ttp = float(de.K_bar * np.log2(1.0 + g_ttp).sum())
    delta = r_oc + r_ic + float(de.K_bar * (np.log2(1.0 + g_p) - np.log2(1.0 + g_ttp)).sum())
    return AsymptoticRates(g_oc, g_ic, g_p, g_ttp, r_oc, r_ic, r_p, r_oc + r_ic + r_p, r_ttp, delta)


def ttp_asymptotic_rate(de: DetEquiv) -> AsymptoticRates:
    g = ttp_sinrs(de)
    r = float(de.K_bar * np.log2(1.0 + g).sum())
    nan = np.full(de.G, np.nan)
    return AsymptoticRates(nan, nan, nan, g, np.nan, np.nan, np.nan, np.nan, r, np.nan)


def export_det_equiv_csv(de: DetEquiv, path) -> None:
    """One row per (g, l) pair; per-group columns repeat across ``l``."""
    header = ["g", "l", "m", "m_prime", "Psi", "Phi", "kappa", "Omega", "m_prime_gl", "Upsilon_gl"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for g in range(de.G):
            for l in range(de.G):
                writer.writerow([
                    g, l, f"{de.m[g]:.10g}", f"{de.m_prime[g]:.10g}", f"{de.Psi[g]:.10g}",
                    f"{de.Phi[g]:.10g}", f"{de.kappa[g]:.10g}", f"{de.Omega[g]:.10g}",
                    f"{de.m_prime_cross[g, l]:.10g}", f"{de.Upsilon[g, l]:.10g}",
                ])
