"""Optimal epidemic control toolkit.

SEIR dynamics with bounded, delayed vaccination and transmission-suppression
controls; penalized cost functionals; a Pontryagin forward-backward sweep
solver; kappa/horizon continuation; and sensitivity analysis. The heavy
lifting lives in the compiled extension `_epictrl`.
"""

try:
    from ._epictrl import *  # noqa: F401,F403  (installed package layout)
    from ._epictrl import __version__  # noqa: F401
except ImportError:  # development layout: extension on PYTHONPATH
    from _epictrl import *  # noqa: F401,F403
    from _epictrl import __version__  # noqa: F401
