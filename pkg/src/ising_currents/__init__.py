"""Exact expansions and Monte Carlo for random currents in the ferromagnetic Ising model."""
from .errors import (
    CapExceededError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    EmptySupportError,
    GraphFormatError,
    IsingError,
    PreconditionError,
)
from .graph import WeightedGraph, from_generator, load_graph, save_graph

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "ConvergenceError",
    "DegenerateError",
    "DomainError",
    "EmptySupportError",
    "GraphFormatError",
    "IsingError",
    "PreconditionError",
    "WeightedGraph",
    "from_generator",
    "load_graph",
    "save_graph",
    "__version__",
]
