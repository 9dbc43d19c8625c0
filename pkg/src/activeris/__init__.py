"""Joint power, beamforming and active-RIS optimisation for the multi-user uplink
under imperfect CSI, plus a Monte Carlo harness for active/passive comparisons."""

__version__ = "0.1.0"

from .model import (
    ChannelEstimates,
    ConfigurationError,
    ResourceState,
    RisState,
    SinrBreakdown,
    SystemConfig,
    combined_channel,
    sinr,
    sinr_breakdown,
    sum_rate,
    sum_rate_nat,
)
from .orchestrator import OptimizationPlan, OptimizationReport, PLANS, run
from .simulation import AggregateResult, ScenarioSpec, generate_channels, run_scenario
