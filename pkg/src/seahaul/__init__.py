"""System-level simulator for multi-hop mmWave wireless backhaul at sea.

The package is organised as a numpy-based library: propagation models
(``channel``), array antennas (``antenna``), link budgets (``phy``), the
backhaul adaptation header and routing (``bap``), tunnels and queues
(``tunnels``), the TDD scheduler (``sched``), traffic sources (``traffic``),
the slot-driven engine (``engine``), scenario handling (``scenario``) and
metric aggregation (``metrics``).  ``cli`` exposes the command line front end.
"""

__version__ = "0.1.0"

from .errors import ConfigError, FramingError, InvariantViolation, RoutingError, TopologyError

__all__ = [
    "ConfigError",
    "FramingError",
    "InvariantViolation",
    "RoutingError",
    "TopologyError",
    "__version__",
]
