"""
Test suite for trsoden.
"""
