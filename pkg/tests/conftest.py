"""Shared scenario fixtures for the test suite."""
from datetime import datetime, timezone

import pytest

from qrcsim.channel import ChannelModel, OpticalTerminal
from qrcsim.engine import ConstellationSpec, Scenario
from qrcsim.orbit import EpochClock, GroundStation
from qrcsim.swap import DeviceParams, MemoryParams
from qrcsim.turbulence import hv_10_10

NYC = GroundStation("New York City", 40.7128, -74.0060)
BERLIN = GroundStation("Berlin", 52.5200, 13.4050)
MADRID = GroundStation("Madrid", 40.4168, -3.7038)


@pytest.fixture(scope="session")
def clock():
    return EpochClock(datetime(2020, 1, 1, 2, 0, 0, tzinfo=timezone.utc))


@pytest.fixture(scope="session")
def channel_model():
    return ChannelModel(
        gs_terminal=OpticalTerminal(1.0, uplink_beam_waist_m=0.15),
        sat_terminal=OpticalTerminal(0.5),
        profile=hv_10_10(),
    )


def make_scenario(clock, channel_model, station_a=NYC, station_b=BERLIN, **overrides):
    defaults = dict(
        station_a=station_a,
        station_b=station_b,
        clock=clock,
        constellation=ConstellationSpec("aligned", 500.0, 1.0, 0.0),
        channel=channel_model,
        devices=DeviceParams(),
        memory_a=MemoryParams(),
        memory_b=MemoryParams(),
        architecture="DL",
        t_start_s=-900.0,
        t_end_s=900.0,
        dt_s=1.0,
    )
    defaults.update(overrides)
    return Scenario(**defaults)


@pytest.fixture(scope="session")
def ic_downlink(clock, channel_model):
    return make_scenario(clock, channel_model)


@pytest.fixture(scope="session")
def ic_uplink(clock, channel_model):
    return make_scenario(clock, channel_model, architecture="UL")


@pytest.fixture(scope="session")
def eu_downlink(clock, channel_model):
    return make_scenario(clock, channel_model, station_a=MADRID, station_b=BERLIN)
