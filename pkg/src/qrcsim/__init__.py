"""Simulator for three-satellite quantum-repeater constellations:
J2-perturbed orbit propagation, time-varying optical channel budgets,
and closed-form memory-assisted Bell-state-measurement rates."""

from .channel import AoConfig, ChannelModel, ChannelSample, OpticalTerminal
from .engine import (
    CampaignResult,
    ConstellationSpec,
    PassResult,
    Scenario,
    StepRecord,
    annual_campaign,
    build_constellation,
    simulate_pass,
    sweep,
)
from .orbit import (
    EpochClock,
    GravityModel,
    GroundStation,
    KeplerElements,
    StateVector,
    cartesian_to_kepler,
    kepler_to_cartesian,
    propagate,
)
from .swap import BsmRates, DeviceParams, LinkState, MemoryParams, bsm_rates, optimize_cutoffs
from .turbulence import TurbulenceProfile, WindModel, hv_10_10

__version__ = "0.1.0"

__all__ = [
    "AoConfig",
    "BsmRates",
    "CampaignResult",
    "ChannelModel",
    "ChannelSample",
    "ConstellationSpec",
    "DeviceParams",
    "EpochClock",
    "GravityModel",
    "GroundStation",
    "KeplerElements",
    "LinkState",
    "MemoryParams",
    "OpticalTerminal",
    "PassResult",
    "Scenario",
    "StateVector",
    "StepRecord",
    "TurbulenceProfile",
    "WindModel",
    "annual_campaign",
    "bsm_rates",
    "build_constellation",
    "cartesian_to_kepler",
    "hv_10_10",
    "kepler_to_cartesian",
    "optimize_cutoffs",
    "propagate",
    "simulate_pass",
    "sweep",
]
