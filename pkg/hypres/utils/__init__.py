"""
Utility module for hypres.

Contains settings, structured logging setup and the error hierarchy
shared by every numerical module.
"""
