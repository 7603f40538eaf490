"""
Workflow orchestration for hypres.

Contains the pipeline that runs orbit search, continuation, Floquet
analysis, hypothesis checks and resonance strings for one run configuration.
"""
