import numpy as np
import pytest

from hrs_mimo.errors import DegenerateChannelError, InvalidConfigurationError
from hrs_mimo.precoding import (
    PowerSplit,
    build_outer_precoder,
    hrs_transmit_power,
    inner_common_precoder,
    outer_common_precoder,
    rzf_inner_precoder,
    ttp_transmit_power,
)
from hrs_mimo.scenario import one_ring_scenario


def test_outer_precoder_nulls_other_groups(small_disjoint):
    stats = small_disjoint.stats
    for g, B in enumerate(small_disjoint.B):
        np.testing.assert_allclose(B.conj().T @ B, np.eye(B.shape[1]), atol=1e-10)
        for l, s in enumerate(stats):
            if l != g:
                assert np.max(np.abs(s.U_dominant.conj().T @ B)) <= 1e-8


def test_outer_precoder_width_limits(small_disjoint):
    stats = small_disjoint.stats
    with pytest.raises(InvalidConfigurationError, match="b_g"):
        build_outer_precoder(stats, 0, stats[0].dominant_rank + 1)
    with pytest.raises(InvalidConfigurationError):
        build_outer_precoder(stats, 0, 0)


def test_single_group_outer_precoder_spans_dominant_eigvecs():
    sc = one_ring_scenario(16, 1, 2, 3, 5, 0.2, np.pi / 6)
    B = sc.B[0]
    U = sc.stats[0].U[:, :3]
    np.testing.assert_allclose(np.abs(U.conj().T @ B), np.eye(3), atol=1e-8)


def test_rzf_matches_direct_formula_and_normalization(small_draw):
    draw, pre = small_draw
    B = pre.B[0]
    Hh = B.conj().T @ draw.H_hat[0]
    W, xi = rzf_inner_precoder(Hh, B, pre.eps)
    b = B.shape[1]
    direct = np.linalg.inv(Hh @ Hh.conj().T + b * pre.eps * np.eye(b)) @ Hh
    np.testing.assert_allclose(W, xi * direct, rtol=1e-10)
    assert np.linalg.norm(B @ W) ** 2 == pytest.approx(Hh.shape[1])


def test_common_precoders_have_unit_norm(small_draw):
    _, pre = small_draw
    assert np.linalg.norm(pre.w_oc) == pytest.approx(1.0)
    for B, w in zip(pre.B, pre.w_ic):
        assert np.linalg.norm(B @ w) == pytest.approx(1.0)


def test_degenerate_precoders_raise():
    B = np.eye(3)[:, :2]
    with pytest.raises(DegenerateChannelError):
        rzf_inner_precoder(np.zeros((2, 2)), B, 0.1)
    with pytest.raises(DegenerateChannelError):
        inner_common_precoder(np.array([[1.0, -1.0], [2.0, -2.0]]), B)
    with pytest.raises(DegenerateChannelError):
        outer_common_precoder([B], [np.array([[1.0, -1.0], [0.0, 0.0]])])


def test_power_split_validation():
    for a, b in [(0.0, 1.0), (1.0, 0.0), (1.2, 0.5)]:
        with pytest.raises(InvalidConfigurationError):
            PowerSplit(a, b, 1.0)
    with pytest.raises(InvalidConfigurationError):
        PowerSplit(1.0, 1.0, -1.0)


@pytest.mark.parametrize("alpha,beta", [(1.0, 1.0), (0.3, 1.0), (1.0, 0.2), (0.05, 0.7)])
def test_power_budget_identity(small_draw, alpha, beta):
    _, pre = small_draw
    P = 100.0
    split = PowerSplit(alpha, beta, P)
    assert abs(split.total((2, 2)) - P) <= 1e-8 * P
    assert abs(hrs_transmit_power(pre, split) - P) <= 1e-8 * P


def test_ttp_power_budget(small_draw):
    _, pre = small_draw
    assert abs(ttp_transmit_power(pre, 100.0) - 100.0) <= 1e-8 * 100.0
