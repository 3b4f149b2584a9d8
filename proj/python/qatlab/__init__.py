"""Quantum Arnold transformation lab."""

from ._qatlab import *  # noqa: F401,F403
from ._qatlab import QatError, __doc__  # noqa: F401
