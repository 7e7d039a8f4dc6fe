"""Detection of a planted dense subgraph in a sparse random graph."""

__version__ = "0.1.0"
