"""Soft tester UE: a deterministic, desk-scale RAN security-testing harness."""

__version__ = "0.1.0"
