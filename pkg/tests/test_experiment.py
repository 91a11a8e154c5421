import math
from dataclasses import replace

import numpy as np
import pytest

from hrs_mimo.errors import InvalidConfigurationError
from hrs_mimo.experiment import (
    CSV_HEADER,
    PRESETS,
    ScenarioConfig,
    SweepResult,
    config_from_mapping,
    dump_config,
    emit_csv,
    emit_curves,
    load_config,
    parse_angle,
    read_csv,
    run_sweep,
)

SMALL = ScenarioConfig(
    scenario="small", M=24, K=4, G=2, b_bar=4, r_d=8, snr_db=(0.0, 20.0), n_draws=6, grid_step=0.1,
    schemes=("TTP", "Baseline2", "Baseline3", "HRS_CLF", "HRS_EXS", "HRS_FIXED", "HRS_DetEquiv", "TTP_DetEquiv"),
    alpha=0.5, beta=0.9,
)


@pytest.fixture(scope="module")
def small_result():
    return run_sweep(SMALL)


def test_rows_in_scheme_then_snr_order(small_result):
    keys = [(r.scheme, r.snr_db) for r in small_result.rows]
    assert keys == [(s, snr) for s in SMALL.schemes for snr in (0.0, 20.0)]


def test_sweep_row_contents(small_result):
    fixed = small_result.get("HRS_FIXED", 20.0)
    assert (fixed.alpha, fixed.beta) == (0.5, 0.9)
    assert math.isnan(small_result.get("Baseline2", 0.0).alpha)
    assert small_result.get("HRS_DetEquiv", 0.0).n_draws == 0
    assert small_result.get("TTP", 0.0).n_draws == 6
    for r in small_result.rows:
        assert r.r_sum == pytest.approx(r.r_oc + r.r_ic + r.r_p)
        assert r.wall_ms == 0.0


def test_exhaustive_beats_on_grid_splits_on_shared_draws(small_result):
    # (1, 1) and (0.5, 0.9) both lie on the 0.1 grid
    for snr in SMALL.snr_db:
        best = small_result.get("HRS_EXS", snr).r_sum
        assert best >= small_result.get("TTP", snr).r_sum - 1e-12
        assert best >= small_result.get("HRS_FIXED", snr).r_sum - 1e-9


def test_csv_roundtrip(tmp_path, small_result):
    path = tmp_path / "out.csv"
    emit_csv(small_result, path)
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    back = read_csv(path)
    assert len(back.rows) == len(small_result.rows)
    for a, b in zip(back.rows, small_result.rows):
        assert a.scheme == b.scheme and a.r_sum == pytest.approx(b.r_sum, rel=1e-5)


def test_csv_header_only_and_single_row(tmp_path, small_result):
    empty = tmp_path / "empty.csv"
    emit_csv(SweepResult([]), empty)
    assert empty.read_text() == ",".join(CSV_HEADER) + "\n"
    one = tmp_path / "one.csv"
    emit_csv(SweepResult(small_result.rows[:1]), one)
    assert len(one.read_text().splitlines()) == 2


def test_csv_bytes_independent_of_workers(tmp_path):
    cfg = replace(SMALL, snr_db=(10.0,), n_draws=5)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(run_sweep(cfg), a)
    emit_csv(run_sweep(replace(cfg, workers=3)), b)
    assert a.read_bytes() == b.read_bytes()


def test_curves(tmp_path, small_result):
    paths = emit_curves(small_result, tmp_path / "fig")
    assert (tmp_path / "fig_TTP.dat") in paths
    data = np.loadtxt(tmp_path / "fig_TTP.dat")
    np.testing.assert_allclose(data[:, 0], [0.0, 20.0])


@pytest.mark.parametrize(
    "text,value",
    [("pi/8", math.pi / 8), ("pi", math.pi), ("-pi/2", -math.pi / 2), ("2*pi/3", 2 * math.pi / 3), ("0.3", 0.3)],
)
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value)


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("preset = overlapping  # start here\nsnr_db = 0, 30\nn_draws = 7\ntiming = yes\n\n")
    cfg = load_config(path)
    assert cfg.scenario == "overlapping" and cfg.spread == pytest.approx(math.pi / 3)
    assert cfg.snr_db == (0.0, 30.0) and cfg.n_draws == 7 and cfg.timing


def test_dump_config_roundtrip(tmp_path):
    cfg = replace(PRESETS["disjoint"], azimuths=(0.1, 0.2, 0.3, 0.4))
    path = tmp_path / "dump.cfg"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg


@pytest.mark.parametrize(
    "updates,match",
    [
        ({"K": 13}, "divisible"),
        ({"r_d": 30}, "sum rank"),
        ({"b_bar": 2}, "K_bar <= b_bar"),
        ({"b_bar": 21}, "b_bar <= "),
        ({"schemes": ("ZF",)}, "unknown schemes"),
        ({"snr_db": ()}, "SNR"),
        ({"grid_step": 0.0}, "grid step"),
    ],
)
def test_invalid_configs(updates, match):
    with pytest.raises(InvalidConfigurationError, match=match):
        replace(ScenarioConfig(), **updates).validate()


def test_bad_config_keys(tmp_path):
    with pytest.raises(InvalidConfigurationError):
        config_from_mapping({"antennas": "4"})
    with pytest.raises(InvalidConfigurationError):
        config_from_mapping({"M": "many"})
    path = tmp_path / "bad.cfg"
    path.write_text("M 100\n")
    with pytest.raises(InvalidConfigurationError):
        load_config(path)
