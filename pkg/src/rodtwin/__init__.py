"""Desk-scale PWR fuel rod digital twin.

Coupled conduction / channel thermal-hydraulics ground truth, a learned
boundary-integral reconstruction network driven by four cladding surface
temperatures, and a simplified thermomechanical post-processor.
"""

__version__ = "0.1.0"
