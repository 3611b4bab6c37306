"""bohmex: many-particle Bohmian trajectories with exchange symmetry."""

__version__ = "0.1.0"
