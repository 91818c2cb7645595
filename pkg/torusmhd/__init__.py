"""
TorusMHD - MHD equilibria with pressure foliations on the 3-torus.
"""

from .lab import Lab
from .version import __version__

__all__ = ["Lab", "__version__"]
