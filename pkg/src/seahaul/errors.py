"""Exception types shared across the simulator.

Plain ``ValueError`` is used for domain errors on scalar inputs (bad
frequency, negative bandwidth, ...); the classes below mark conditions that
callers are expected to handle distinctly.
"""


class ConfigError(Exception):
    """Scenario or model configuration is invalid or incomplete."""


class TopologyError(ConfigError):
    """Node graph is not a forest of donor-rooted trees."""


class FramingError(Exception):
    """A wire-format blob has the wrong size or an impossible layout."""


class RoutingError(Exception):
    """No routing entry exists for a destination; the packet is dropped."""


class InvariantViolation(AssertionError):
    """A runtime invariant (half duplex, conservation, ...) was breached."""
