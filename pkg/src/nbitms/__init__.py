"""nbitms: fault and configuration management engine for heterogeneous network devices."""

__version__ = "0.1.0"
