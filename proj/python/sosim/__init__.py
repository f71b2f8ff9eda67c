"""Resource-flow simulator for networks of producing and consuming agents."""

from ._sosim import (  # noqa: F401
    Network,
    SimulationError,
    InputError,
    allocate_summary,
    block_fixture,
    erdos_renyi,
    paper_suite,
    price,
    read_gml,
    run_cli,
    spectral_radius,
    validation_fixture_3node,
    write_gml,
)

__all__ = [
    "Network",
    "SimulationError",
    "InputError",
    "allocate_summary",
    "block_fixture",
    "erdos_renyi",
    "paper_suite",
    "price",
    "read_gml",
    "run_cli",
    "spectral_radius",
    "validation_fixture_3node",
    "write_gml",
]
