"""Python bindings for the mobisim scenario simulator."""

from ._mobisim import *  # noqa: F401,F403
from ._mobisim import __version__  # noqa: F401
