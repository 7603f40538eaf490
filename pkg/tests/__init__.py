"""
Test suite for hypres.

Contains unit tests, property-based tests and end-to-end checks against
closed-form model systems.
"""
