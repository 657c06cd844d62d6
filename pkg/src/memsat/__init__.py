"""Memcomputing 3-SAT toolkit.

Continuous-dynamics 3-SAT solving, planted hard-instance generation,
fixed-point hardware-schedule emulation, and scaling benchmarks.
"""

__version__ = "0.1.0"
