"""Maxwell-Lorentz dynamics of a rotating extended charge, with verification tools."""

__version__ = "0.1.0"
