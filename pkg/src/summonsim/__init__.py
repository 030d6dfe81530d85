"""Deterministic vehicle-summoning stack: typed bus, simulated drive-by-wire
vehicle with RTK/SPP GPS and lidar, adapter nodes, a point-and-go planner,
and an HTTP summon service."""

from .launcher import LaunchConfig, Scenario, launch, replay, run_scenario

__all__ = ["LaunchConfig", "Scenario", "launch", "replay", "run_scenario"]
__version__ = "0.1.0"
