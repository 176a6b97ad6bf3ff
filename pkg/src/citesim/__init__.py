"""Agent-based simulation of substantive and rhetorical citing."""

__version__ = "0.1.0"
