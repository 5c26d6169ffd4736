"""Numerical laboratory for the chaos expansion of nodal volumes of
random hyperspherical harmonics."""

__version__ = "0.1.0"
