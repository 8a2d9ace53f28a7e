"""hubspoke: design pandemic-safe hub-and-spoke campus bus routes, match
legacy throughput with new headways, and validate the design with a
discrete-event passenger/bus simulation."""

__version__ = "0.1.0"

from .network import (
    DemandSpec,
    RouteDesign,
    Stop,
    TransferGroup,
    TransitError,
    TransitInstance,
    TravelTimeMatrix,
    route_duration,
    validate_instance,
)

__all__ = [
    "DemandSpec",
    "RouteDesign",
    "Stop",
    "TransferGroup",
    "TransitError",
    "TransitInstance",
    "TravelTimeMatrix",
    "route_duration",
    "validate_instance",
    "__version__",
]
