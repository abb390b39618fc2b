"""Simulation and verification toolkit for equilibrium perturbations of
lattice gases and anharmonic chains."""

from ._eqpert import *  # noqa: F401,F403
from ._eqpert import __doc__  # noqa: F401
