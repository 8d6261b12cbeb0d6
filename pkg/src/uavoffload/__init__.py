"""Simulation and learning toolkit for UAV-aided task offloading with a
heterogeneous graph-network DQN."""
from .channel import ChannelParams, Position
from .scenario import ScenarioConfig, Task, Topology, build_topology, generate_tasks

__version__ = "0.1.0"

__all__ = ["ChannelParams", "Position", "ScenarioConfig", "Task", "Topology", "build_topology", "generate_tasks"]
