"""Python surface for the multicell beamforming core."""

from _mcbeam import *  # noqa: F401,F403
from _mcbeam import __version__  # noqa: F401
