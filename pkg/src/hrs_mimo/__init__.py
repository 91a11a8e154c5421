"""Hierarchical rate splitting for FDD massive MIMO with imperfect CSIT."""

from .channel_model import (
    AntennaArray,
    ChannelDraw,
    GroupStatistics,
    build_uca,
    eigendecompose,
    group_statistics,
    one_ring_covariance,
    sample_draw,
)
from .det_equiv import AsymptoticRates, DetEquiv, assemble_det_equiv, det_equiv_for
from .errors import (
    ConvergenceError,
    DegenerateChannelError,
    HRSError,
    InstabilityError,
    InvalidConfigurationError,
    InvalidInputError,
)
from .experiment import ScenarioConfig, SweepResult, emit_csv, run_sweep
from .power_alloc import (
    InterferenceSummary,
    closed_form_split,
    det_equiv_interference_summary,
    exhaustive_split,
    interference_summary,
)
from .precoding import PowerSplit, PrecoderSet, build_outer_precoder, build_precoders
from .rate_mc import RateReport, SinrTable, monte_carlo
from .scenario import Scenario, make_scenario, one_ring_scenario

__version__ = "0.1.0"
