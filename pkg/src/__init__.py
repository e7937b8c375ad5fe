"""
IoVUplink - Dual-agent uplink scheduling for Internet-of-Vehicles map updates

Trains an allocation agent and a resolution agent (HAPPO and baselines)
on a seeded IoV-MMBS uplink simulator and reports delay, mAP and idle
statistics across congestion scenarios.
"""

__version__ = "0.1.0"
__author__ = "IoVUplink Development Team"
