"""Propagators and interference terms for a particle whose radial path is
continuously monitored while it moves in the expanded field of a massive
source."""

__version__ = "0.1.0"
