"""
Command-line surface for trsoden (`trsoden <command>`).
"""

__version__ = "0.1.0"
