"""Semilinear heat equations u_t = Delta u + f(u) on weighted graphs.

Heat kernels and spectral estimates on Dirichlet truncations, mild
solutions by Picard iteration of the Duhamel map, domain exhaustion, and
the blow-up versus global-existence dichotomy.
"""

from .graph import *  # noqa: F401,F403
from .spectral import *  # noqa: F401,F403
from .sources import *  # noqa: F401,F403
from .semilinear import *  # noqa: F401,F403
from .blowup import *  # noqa: F401,F403
from . import sources, io, config  # noqa: F401

__version__ = "0.1.0"
