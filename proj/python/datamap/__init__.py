from ._datamap import *  # noqa: F401,F403
from ._datamap import __version__  # noqa: F401
