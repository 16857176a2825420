"""Link-level Monte-Carlo simulation of RIS-assisted upper mid-band links."""
from .channel import ChannelParams, LinkGeometry, LinkRealization, LosMode, Node3D
from .mcengine import MetricSamples, RadioParams, run_trials
from .ris import Mode, RisPanel
from .scenarios import ScenarioConfig, SweepSpec, build_placement, build_use_case, run_sweep

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "LinkGeometry",
    "LinkRealization",
    "LosMode",
    "MetricSamples",
    "Mode",
    "Node3D",
    "RadioParams",
    "RisPanel",
    "ScenarioConfig",
    "SweepSpec",
    "build_placement",
    "build_use_case",
    "run_sweep",
    "run_trials",
]
