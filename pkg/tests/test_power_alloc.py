import numpy as np
import pytest

from hrs_mimo.errors import InvalidConfigurationError
from hrs_mimo.power_alloc import (
    InterferenceSummary,
    argmax_split,
    closed_form_split,
    det_equiv_interference_summary,
    exhaustive_split,
    grid_search,
    interference_summary,
    split_grid,
)
from hrs_mimo.det_equiv import assemble_det_equiv
from hrs_mimo.experiment import PRESETS


def coupled_rbar(G, c, b=4, seed=0):
    rng = np.random.default_rng(seed)
    own = []
    for _ in range(G):
        X = rng.standard_normal((b, b)) + 1j * rng.standard_normal((b, b))
        own.append(X @ X.conj().T / b + 0.2 * np.eye(b))
    Rbar = np.empty((G, G, b, b), dtype=complex)
    for g in range(G):
        for l in range(G):
            Rbar[g, l] = own[l] if g == l else c * own[l]
    return Rbar


def test_proportional_cross_covariance_identity_own():
    G, c, b = 3, 0.25, 4
    Rbar = np.zeros((G, G, b, b), dtype=complex)
    for g in range(G):
        for l in range(G):
            Rbar[g, l] = np.eye(b) * (1.0 if g == l else c)
    s = interference_summary(Rbar, 0.4, G, 3, b)
    assert s.gamma_og == pytest.approx((G - 1) * c / G, rel=1e-12)


def test_proportional_cross_covariance_general_own():
    # tr(c R R^-1) / tr(R^-1) = c b / tr(R^-1)
    G, c, b = 3, 0.25, 4
    Rbar = coupled_rbar(G, c, b)
    s = interference_summary(Rbar, 0.4, G, 3, b)
    tr_inv = np.array([np.trace(np.linalg.inv(Rbar[l, l])).real for l in range(G)])
    expected = [sum(c * b / tr_inv[l] for l in range(G) if l != g) / G for g in range(G)]
    np.testing.assert_allclose(s.og_per_group, expected, rtol=1e-12)
    assert s.gamma_og == pytest.approx(min(expected), rel=1e-12)


@pytest.mark.parametrize("tau2,K_bar", [(0.0, 3), (0.4, 1)])
def test_intra_group_term_vanishes(tau2, K_bar):
    s = interference_summary(coupled_rbar(2, 0.1), tau2, 2, K_bar, 4)
    assert s.gamma_ig == 0.0


def test_intra_group_term_for_identity():
    Rbar = np.zeros((2, 2, 4, 4), dtype=complex)
    Rbar[0, 0] = Rbar[1, 1] = 2.0 * np.eye(4)
    s = interference_summary(Rbar, 0.4, 2, 3, 4)
    # tau2/G * b / tr(R^-1) * (K-1)/K = 0.2 * 4 / 2 * 2/3
    assert s.gamma_ig == pytest.approx(0.4 * 2 / 3)
    assert s.gamma_og == 0.0


def test_singular_reduced_covariance_rejected():
    Rbar = coupled_rbar(2, 0.1)
    Rbar[0, 0] = np.diag([1.0, 1.0, 1.0, 0.0])
    with pytest.raises(InvalidConfigurationError):
        interference_summary(Rbar, 0.4, 2, 3, 4)


def test_det_equiv_summary_matches_literal_for_scaled_identity():
    G, b, K_bar, tau2, c = 3, 5, 3, 0.4, 0.3
    Rbar = np.zeros((G, G, b, b), dtype=complex)
    for g in range(G):
        for l in range(G):
            Rbar[g, l] = np.eye(b) * (1.0 if g == l else c)
    P = 1e6
    de = assemble_det_equiv(Rbar, K_bar, b, K_bar * G / (G * b * P), tau2, P)
    lit = interference_summary(Rbar, tau2, G, K_bar, b)
    via_de = det_equiv_interference_summary(de)
    assert via_de.gamma_og == pytest.approx(lit.gamma_og, rel=1e-4)
    assert via_de.gamma_ig == pytest.approx(lit.gamma_ig, rel=1e-4)


def _summary(og, ig):
    return InterferenceSummary(og, ig, np.array([og]), np.array([ig]))


def test_closed_form_low_snr_is_full_private():
    split = closed_form_split(_summary(0.2, 0.1), 1.0, 12, 3)
    assert (split.alpha, split.beta) == (1.0, 1.0)


def test_closed_form_high_snr_regimes():
    weak = closed_form_split(_summary(0.0, 0.1), 1000.0, 12, 3)
    assert weak.beta == 1.0 and weak.alpha == pytest.approx(3 / 100)
    strong = closed_form_split(_summary(0.5, 0.1), 1000.0, 12, 3)
    assert strong.alpha == 1.0 and strong.beta == pytest.approx(12 / 503)
    with pytest.raises(InvalidConfigurationError):
        closed_form_split(_summary(0.5, 0.1), 0.0, 12, 3)


def test_split_grid():
    np.testing.assert_allclose(split_grid(0.25), [0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(split_grid(0.3), [0.3, 0.6, 0.9, 1.0])
    assert len(split_grid(0.01)) == 100
    for bad in (0.0, 0.6):
        with pytest.raises(InvalidConfigurationError):
            split_grid(bad)


def test_ties_prefer_larger_ratios():
    assert grid_search(lambda a, b: np.zeros_like(a), 0.1) == (1.0, 1.0)
    grid = np.array([0.5, 1.0])
    values = np.array([[2.0, 2.0], [2.0, 1.0]])
    assert argmax_split(values, grid) == (1.0, 0.5)


def test_grid_search_finds_interior_peak():
    alpha, beta = grid_search(lambda a, b: -((a - 0.3) ** 2) - (b - 0.7) ** 2, 0.1)
    assert (alpha, beta) == pytest.approx((0.3, 0.7))


@pytest.fixture(scope="module")
def disjoint():
    return PRESETS["disjoint"].build()


def test_simulated_search_keeps_outer_common_off_for_disjoint(disjoint):
    split = exhaustive_split(disjoint, 1000.0, 0.25, "monte_carlo", n_draws=20)
    assert split.beta == 1.0


def test_fine_asymptotic_search_keeps_outer_common_off_for_disjoint(disjoint):
    split = exhaustive_split(disjoint, 1000.0, 0.01, "asymptotic")
    assert split.beta == 1.0
    assert split.alpha < 0.05


@pytest.mark.xfail(
    strict=True,
    reason="on the 0.25 grid the asymptotic private rate is interference-limited and "
    "insensitive to beta, so the outer common message wins",
)
def test_coarse_asymptotic_search_keeps_outer_common_off_for_disjoint(disjoint):
    split = exhaustive_split(disjoint, 1000.0, 0.25, "asymptotic")
    assert split.beta == 1.0


def test_unknown_objective(disjoint):
    with pytest.raises(InvalidConfigurationError):
        exhaustive_split(disjoint, 1000.0, 0.25, "oracle")
