"""Discrete Gaussian MCMC sampling, NTRU ring arithmetic and security metrics."""

__version__ = "0.1.0"
