"""Positivity of the Lyapunov exponent for the skew-shift Schrodinger cocycle:
constants, sampling, Diophantine checks and a certified replay of the
multiscale induction."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.0.0"
