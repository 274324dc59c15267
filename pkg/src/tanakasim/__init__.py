"""Simulation and statistical verification for dX = lam dt + 1{X > 0} dW."""

__version__ = "0.1.0"
