"""Open-system Lindblad dynamics through a composite-system effective Hamiltonian.

The compiled extension carries the implementation; this package re-exports it.
"""

try:
    from ._adiabat import *  # noqa: F401,F403
    from ._adiabat import __version__  # noqa: F401
except ImportError:  # development tree: extension next to the build directory
    from _adiabat import *  # noqa: F401,F403
    from _adiabat import __version__  # noqa: F401
