"""Pytest configuration: keep property tests deterministic run to run."""

from hypothesis import settings

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")
